"""Fitting mixing-law parameters to portfolio claim data.

Two routes are offered:

* moment matching, which inverts the unconditional mean/variance relations
  and needs every policy to share one exposure length;
* maximum likelihood over the closed-form pmfs, which handles heterogeneous
  exposures. The search is a Nelder-Mead simplex in log-parameter
  coordinates (positivity for free), multi-started from the moment fit.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize

from .core import ConvergenceError, DomainError, check_count, check_positive
from .poisson_gamma import GammaMixParams
from .poisson_inv_gamma import InvGammaMixParams

RECORD_FIELDS = ("policy_id", "exposure_years", "claim_count")

_FAMILY_ALIASES = {
    "gamma": "gamma",
    "nb": "gamma",
    "invgamma": "invgamma",
    "inv-gamma": "invgamma",
    "inverse-gamma": "invgamma",
}


def normalize_family(family: str) -> str:
    try:
        return _FAMILY_ALIASES[family.lower()]
    except KeyError:
        raise DomainError(f"unknown family {family!r}; expected 'gamma' or 'invgamma'") from None


def make_params(family: str, first: float, second: float):
    """Build (alpha, beta) or (m, s) parameters for ``family``."""
    if normalize_family(family) == "gamma":
        return GammaMixParams(first, second)
    return InvGammaMixParams(first, second)


@dataclass(frozen=True)
class ClaimRecord:
    policy_id: str
    exposure_years: float
    claim_count: int

    def __post_init__(self):
        object.__setattr__(self, "policy_id", str(self.policy_id))
        object.__setattr__(self, "exposure_years", check_positive(self.exposure_years, "exposure_years"))
        object.__setattr__(self, "claim_count", check_count(self.claim_count, "claim_count"))


def read_records_csv(source) -> list[ClaimRecord]:
    """Read records from a path or text stream with header policy_id,exposure_years,claim_count."""
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_records_csv(fh)
    reader = csv.DictReader(source)
    missing = set(RECORD_FIELDS) - set(reader.fieldnames or ())
    if missing:
        raise DomainError(f"claim CSV is missing columns: {', '.join(sorted(missing))}")
    records = []
    for row in reader:
        count = float(row["claim_count"])
        records.append(ClaimRecord(row["policy_id"], float(row["exposure_years"]), count))
    return records


def write_records_csv(records: Iterable[ClaimRecord], target=None) -> str | None:
    """Write records as CSV; returns the text when ``target`` is None."""
    buffer = io.StringIO() if target is None else None
    fh = buffer if target is None else target
    if isinstance(target, (str, Path)):
        with open(target, "w", newline="") as out:
            write_records_csv(records, out)
        return None
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for r in records:
        writer.writerow((r.policy_id, repr(r.exposure_years), r.claim_count))
    return buffer.getvalue() if buffer is not None else None


@dataclass(frozen=True)
class EmpiricalMoments:
    mean: float
    variance: float
    exposure: float


def _counts_and_exposure(records: Sequence[ClaimRecord]):
    if not records:
        raise DomainError("no claim records supplied")
    counts = np.array([r.claim_count for r in records], dtype=float)
    exposures = np.array([r.exposure_years for r in records], dtype=float)
    if np.any(exposures != exposures[0]):
        raise DomainError(
            "moment matching needs a common exposure for all records; use maximum likelihood instead"
        )
    return counts, float(exposures[0])


def empirical_moments(records: Sequence[ClaimRecord], require_overdispersion: bool = False) -> EmpiricalMoments:
    """Sample mean, unbiased sample variance and the shared exposure.

    Raises :class:`DomainError` for mixed exposures, fewer than two records,
    or a sample without spread (all counts equal, so variance 0 <= mean).
    With ``require_overdispersion`` any sample with variance <= mean is
    rejected as well, since neither mixture is then identified by its
    moments; the moment fits ask for this.
    """
    counts, exposure = _counts_and_exposure(records)
    if counts.size < 2:
        raise DomainError("at least two records are needed for a sample variance")
    mean = float(counts.mean())
    variance = float(counts.var(ddof=1))
    if variance <= mean and (require_overdispersion or variance == 0.0):
        raise DomainError(
            f"sample variance {variance:.6g} <= mean {mean:.6g}: no overdispersion, mixed model unidentifiable"
        )
    return EmpiricalMoments(mean, variance, exposure)


def _check_overdispersed(mean: float, variance: float) -> None:
    check_positive(mean, "mean")
    if not (math.isfinite(variance) and variance > mean):
        raise DomainError(f"need variance > mean > 0, got mean={mean!r}, variance={variance!r}")


def _decimal(x: float) -> Fraction:
    # shortest round-trip decimal, so typed-in moments invert without drift
    return Fraction(repr(float(x)))


def fit_moments_gamma(mean: float, variance: float, exposure: float = 1.0) -> GammaMixParams:
    """alpha = mean**2 / (var - mean), beta = J mean / (var - mean).

    Evaluated in exact rational arithmetic and rounded once.
    """
    _check_overdispersed(mean, variance)
    j = check_positive(exposure, "exposure")
    mu, excess = _decimal(mean), _decimal(variance) - _decimal(mean)
    return GammaMixParams(float(mu * mu / excess), float(_decimal(j) * mu / excess))


def fit_moments_invgamma(mean: float, variance: float, exposure: float = 1.0) -> InvGammaMixParams:
    """s = 2 + mean**2 / (var - mean), m = mean (s - 1) / J, rounded once."""
    _check_overdispersed(mean, variance)
    j = check_positive(exposure, "exposure")
    mu = _decimal(mean)
    s = 2 + mu * mu / (_decimal(variance) - mu)
    return InvGammaMixParams(float(mu * (s - 1) / _decimal(j)), float(s))


def fit_moments(family: str, records: Sequence[ClaimRecord]):
    em = empirical_moments(records, require_overdispersion=True)
    if normalize_family(family) == "gamma":
        return fit_moments_gamma(em.mean, em.variance, em.exposure)
    return fit_moments_invgamma(em.mean, em.variance, em.exposure)


def moment_fit_standard_errors(family: str, records: Sequence[ClaimRecord]) -> dict[str, float]:
    """Delta-method standard errors of the moment-fit parameters.

    Uses the large-sample covariance of (sample mean, sample variance):
    Var = mu2/n, Cov = mu3/n, Var(S^2) = (mu4 - mu2^2)/n, with empirical
    central moments. Meaningless when the fourth moment of the count law is
    infinite (inverse-gamma shape s <= 4).
    """
    counts, j = _counts_and_exposure(records)
    em = empirical_moments(records, require_overdispersion=True)
    n = counts.size
    centred = counts - counts.mean()
    mu2 = float(np.mean(centred**2))
    mu3 = float(np.mean(centred**3))
    mu4 = float(np.mean(centred**4))
    cov = np.array([[mu2, mu3], [mu3, mu4 - mu2 * mu2]]) / n
    x, v = em.mean, em.variance
    d = v - x
    if normalize_family(family) == "gamma":
        grads = {
            "alpha": np.array([2 * x / d + x * x / d**2, -x * x / d**2]),
            "beta": np.array([j / d + j * x / d**2, -j * x / d**2]),
        }
    else:
        s = 2.0 + x * x / d
        ds = np.array([2 * x / d + x * x / d**2, -x * x / d**2])
        grads = {
            "m": np.array([(s - 1.0) / j, 0.0]) + (x / j) * ds,
            "s": ds,
        }
    return {name: float(math.sqrt(g @ cov @ g)) for name, g in grads.items()}


def _grouped(records: Sequence[ClaimRecord]):
    """{exposure: (unique counts, multiplicities)}; order-free so fits ignore record order."""
    table: dict[float, dict[int, int]] = {}
    for r in records:
        bucket = table.setdefault(r.exposure_years, {})
        bucket[r.claim_count] = bucket.get(r.claim_count, 0) + 1
    out = {}
    for j in sorted(table):
        items = sorted(table[j].items())
        out[j] = (np.array([k for k, _ in items], dtype=float), np.array([c for _, c in items], dtype=float))
    return out


def log_likelihood(params, records: Sequence[ClaimRecord]) -> float:
    return _grouped_loglik(params, _grouped(records))


def _grouped_loglik(params, groups) -> float:
    total = 0.0
    for j, (counts, weights) in groups.items():
        total += float(np.dot(weights, params.log_pmf(counts, j)))
    return total


@dataclass(frozen=True)
class FitResult:
    params: GammaMixParams | InvGammaMixParams
    method: str
    log_likelihood: float | None = None
    converged: bool = True
    identifiable: bool = True
    evaluations: int = 0
    messages: tuple[str, ...] = field(default_factory=tuple)


# log-parameters beyond this are treated as running off to the boundary
_BOUNDARY_LOG = 12.0
_PERTURBATIONS = ((0.5, 0.5), (-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5))


def _default_start(family: str, records: Sequence[ClaimRecord]):
    counts = np.array([r.claim_count for r in records], dtype=float)
    exposure = np.array([r.exposure_years for r in records], dtype=float)
    rate = max(counts.sum() / exposure.sum(), 1e-6)
    try:
        return fit_moments(family, records)
    except DomainError:
        pass
    if family == "gamma":
        return GammaMixParams(1.0, 1.0 / rate)
    return InvGammaMixParams(2.0 * rate, 3.0)


def fit_mle(
    family: str,
    records: Sequence[ClaimRecord],
    max_evaluations: int = 10_000,
    xtol: float = 1e-8,
) -> FitResult:
    """Maximum-likelihood fit of a gamma or inverse-gamma mixing law.

    Nelder-Mead in (log p1, log p2), stopped when the simplex spread falls
    below ``xtol`` or after ``max_evaluations`` likelihood evaluations per
    start. Starts: the moment fit when available (otherwise a crude guess
    from the pooled claim rate) plus four fixed perturbations of it. The
    best converged run is returned.

    Data that cannot pin down both parameters (a single record, no
    overdispersion) push the optimum to the edge of parameter space; such
    results come back with ``identifiable=False`` rather than an exception.

    Raises
    ------
    ConvergenceError
        If no start converges within the evaluation budget.
    """
    family = normalize_family(family)
    if not records:
        raise DomainError("no claim records supplied")
    groups = _grouped(records)
    start = _default_start(family, records)
    base = np.log([start.alpha, start.beta] if family == "gamma" else [start.m, start.s])

    def objective(theta):
        if np.any(np.abs(theta) > 50):
            return np.inf
        try:
            params = make_params(family, *np.exp(theta))
            value = -_grouped_loglik(params, groups)
        except (DomainError, FloatingPointError, OverflowError):
            return np.inf
        return value if np.isfinite(value) else np.inf

    runs = []
    evaluations = 0
    for offset in ((0.0, 0.0),) + _PERTURBATIONS:
        res = minimize(
            objective,
            base + np.asarray(offset),
            method="Nelder-Mead",
            options={"xatol": xtol, "fatol": np.inf, "maxfev": max_evaluations, "maxiter": max_evaluations},
        )
        evaluations += int(res.nfev)
        runs.append(res)
    finite = [r for r in runs if np.isfinite(r.fun)]
    converged = [r for r in finite if r.success]
    messages = []
    identifiable = True
    if converged:
        best = min(converged, key=lambda r: (r.fun, tuple(r.x)))
    elif finite and np.any(np.abs(min(finite, key=lambda r: r.fun).x) > _BOUNDARY_LOG):
        # drifting along an unbounded ray never satisfies the simplex test
        best = min(finite, key=lambda r: (r.fun, tuple(r.x)))
        messages.append("simplex did not settle: optimum lies at infinity")
    else:
        raise ConvergenceError(f"Nelder-Mead did not converge within {max_evaluations} evaluations")

    if len(records) < 2 or len({r.claim_count for r in records}) < 2:
        identifiable = False
        messages.append("data cannot identify two parameters (fewer than two distinct counts)")
    if np.any(np.abs(best.x) > _BOUNDARY_LOG):
        identifiable = False
        messages.append("optimum runs to the parameter boundary; likelihood unbounded along a ray")
    return FitResult(
        params=make_params(family, *np.exp(best.x)),
        method="mle",
        log_likelihood=-float(best.fun),
        converged=bool(best.success),
        identifiable=identifiable,
        evaluations=evaluations,
        messages=tuple(messages),
    )
