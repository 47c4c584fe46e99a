"""Poisson-inverse-gamma experience rating.

The claim intensity ``theta`` follows an inverse-gamma law with scale ``m``
and shape ``s``,

    f(theta) = (1/m) exp(-m/theta) / ((theta/m)**(s+1) Gamma(s)),

with mean ``m/(s-1)`` (finite for s > 1) and variance
``(m/(s-1))**2 / (s-2)`` (finite for s > 2). The claim count over ``J`` years
has the closed form

    P(N = n) = 2 (J m)**((s+n)/2) / (n! Gamma(s)) * K_{s-n}(2 sqrt(J m)),

whose tail decays like ``n**-(s+1)``. Given ``n`` claims in ``J`` years the
intensity is generalized inverse Gaussian (GIG),

    posterior(theta) ∝ theta**(n-s-1) exp(-J theta - m/theta),

normalised with the integral identity
``∫ exp(-j x - a/x) x**b dx = 2 (j/a)**(-(1+b)/2) K_{1+b}(2 sqrt(a j))``.
Posterior and predictive moments are Bessel-function ratios; all of them are
evaluated as differences of log-Bessel values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import INF, DomainError, MomentSummary, check_count, check_positive
from .special import (
    DEBYE_SEAM,
    LOG_2,
    bessel_k_log_ratio,
    log_bessel_k,
    log_bessel_k_excess,
    log_gamma,
    log_gamma_ratio,
)


@dataclass(frozen=True)
class InvGammaMixParams:
    """Inverse-gamma mixing law with scale ``m`` and shape (tail) parameter ``s``."""

    m: float
    s: float

    family = "invgamma"
    n_params = 2

    def __post_init__(self):
        object.__setattr__(self, "m", check_positive(self.m, "m"))
        object.__setattr__(self, "s", check_positive(self.s, "s"))

    @property
    def mixing_mean(self) -> float:
        return self.m / (self.s - 1.0) if self.s > 1.0 else INF

    @property
    def mixing_variance(self) -> float:
        if self.s <= 2.0:
            return INF
        return (self.m / (self.s - 1.0)) ** 2 / (self.s - 2.0)

    def log_pmf(self, n, exposure: float = 1.0):
        return pig_log_pmf(self, exposure, n)

    def moments(self, exposure: float = 1.0) -> MomentSummary:
        return pig_moments(self, exposure)

    def posterior_moments(self, exposure: float, n: int) -> "PosteriorMoments":
        return posterior_moments(self, exposure, n)

    def predictive_log_pmf(self, j1: float, n1: int, j2: float, n2):
        return predictive_log_pmf(self, j1, n1, j2, n2)

    def predictive_moments(self, j1: float, n1: int, j2: float) -> MomentSummary:
        return predictive_moments(self, j1, n1, j2)


class PosteriorMoments(NamedTuple):
    mean: float
    variance: float


@dataclass(frozen=True)
class GigPosterior:
    """Density proportional to theta**(order-1) * exp(-lin_coeff*theta - inv_coeff/theta)."""

    order: float
    lin_coeff: float
    inv_coeff: float

    def __post_init__(self):
        check_positive(self.lin_coeff, "lin_coeff")
        check_positive(self.inv_coeff, "inv_coeff")

    @property
    def _arg(self) -> float:
        return 2.0 * math.sqrt(self.lin_coeff * self.inv_coeff)

    @property
    def log_normalizer(self) -> float:
        return (
            LOG_2
            + 0.5 * self.order * math.log(self.inv_coeff / self.lin_coeff)
            + log_bessel_k(self.order, self._arg)
        )

    def log_pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta <= 0) or not np.all(np.isfinite(theta)):
            raise DomainError("theta must be finite and > 0")
        out = (
            (self.order - 1.0) * np.log(theta)
            - self.lin_coeff * theta
            - self.inv_coeff / theta
            - self.log_normalizer
        )
        return float(out) if out.ndim == 0 else out

    def moments(self) -> PosteriorMoments:
        scale = math.sqrt(self.inv_coeff / self.lin_coeff)
        # ln K_{order+1}/K_order and ln K_{order+2}/K_order (symmetry puts the shift on -order)
        r1 = math.exp(bessel_k_log_ratio(-self.order, self._arg, 1))
        r2 = math.exp(bessel_k_log_ratio(-self.order, self._arg, 2))
        mean = scale * r1
        variance = scale * scale * (r2 - r1 * r1)
        return PosteriorMoments(mean, max(variance, 0.0))

    @property
    def mode(self) -> float:
        # root of (order-1)/theta - lin + inv/theta**2 = 0
        b = self.order - 1.0
        return (b + math.sqrt(b * b + 4.0 * self.lin_coeff * self.inv_coeff)) / (2.0 * self.lin_coeff)


def _as_counts(n):
    arr = np.asarray(n)
    if arr.ndim == 0:
        return float(check_count(n)), True
    if arr.size and (np.any(arr < 0) or np.any(arr != np.floor(arr))):
        raise DomainError("claim counts must be nonnegative integers")
    return arr.astype(float), False


def pig_log_pmf(params: InvGammaMixParams, exposure: float, n):
    """ln P(N = n) for claims over ``exposure`` years (scalar or array ``n``).

    ``ln 2 + (s+n)/2 ln(Jm) - ln n! - ln Gamma(s) + ln K_{s-n}(2 sqrt(Jm))``.
    Once ``|s - n|`` reaches the Debye seam the Bessel term is split into
    its large-order limit and an excess; the limit's ``ln Gamma(|s-n|)``
    then pairs with ``ln n!`` (or ``ln Gamma(s)``) in a cancellation-free
    ratio, keeping full relative accuracy for counts in the millions.
    """
    j = check_positive(exposure, "exposure")
    counts, scalar = _as_counts(n)
    counts = np.atleast_1d(np.asarray(counts, dtype=float))
    s = params.s
    jm = j * params.m
    log_jm = math.log(jm)
    x = 2.0 * math.sqrt(jm)
    out = np.empty(counts.shape)

    high = counts - s >= DEBYE_SEAM
    low = s - counts >= DEBYE_SEAM
    mid = ~(high | low)
    if np.any(high):
        c = counts[high]
        out[high] = (
            s * log_jm + log_gamma_ratio(c + 1.0, -s - 1.0) - log_gamma(s)
            + log_bessel_k_excess(c - s, x)
        )
    if np.any(low):
        c = counts[low]
        out[low] = (
            c * log_jm + log_gamma_ratio(s, -c) - log_gamma(c + 1.0)
            + log_bessel_k_excess(s - c, x)
        )
    if np.any(mid):
        c = counts[mid]
        out[mid] = (
            LOG_2 + 0.5 * (s + c) * log_jm - log_gamma(c + 1.0) - log_gamma(s)
            + log_bessel_k(s - c, x)
        )
    return float(out[0]) if scalar else out


def pig_moments(params: InvGammaMixParams, exposure: float) -> MomentSummary:
    """Unconditional mean and variance; ``inf`` where the mixing moment diverges."""
    j = check_positive(exposure, "exposure")
    s = params.s
    if s <= 1.0:
        return MomentSummary(INF, INF)
    mean = j * params.m / (s - 1.0)
    if s <= 2.0:
        return MomentSummary(mean, INF)
    return MomentSummary(mean, mean + mean * mean / (s - 2.0))


def posterior(params: InvGammaMixParams, exposure: float, n: int) -> GigPosterior:
    j = check_positive(exposure, "exposure")
    n = check_count(n)
    return GigPosterior(order=n - params.s, lin_coeff=j, inv_coeff=params.m)


def posterior_log_pdf(params: InvGammaMixParams, exposure: float, n: int, theta):
    return posterior(params, exposure, n).log_pdf(theta)


def posterior_moments(params: InvGammaMixParams, exposure: float, n: int) -> PosteriorMoments:
    """E and Var of the intensity given ``n`` claims in ``exposure`` years.

    Mean is ``sqrt(m/J) K_{s-n-1}(2 sqrt(Jm)) / K_{s-n}(2 sqrt(Jm))``; the
    variance uses the second ratio ``K_{s-n-2}/K_{s-n}``. Always finite.
    """
    return posterior(params, exposure, n).moments()


def predictive_log_pmf(params: InvGammaMixParams, j1: float, n1: int, j2: float, n2):
    """ln P(N2 = n2 | N1 = n1) for a later window of ``j2`` years.

    The ratio of GIG normalisers for (n1 + n2, J1 + J2) and (n1, J1), times
    the Poisson factor ``J2**n2 / n2!``.
    """
    j1 = check_positive(j1, "J1")
    j2 = check_positive(j2, "J2")
    n1 = check_count(n1, "n1")
    counts, scalar = _as_counts(n2)
    m, s = params.m, params.s
    jt = j1 + j2
    out = (
        counts * math.log(j2)
        - log_gamma(np.asarray(counts) + 1.0)
        + 0.5 * (s - n1 - counts) * math.log(jt / m)
        - 0.5 * (s - n1) * math.log(j1 / m)
        + log_bessel_k(s - n1 - np.asarray(counts), 2.0 * math.sqrt(m * jt))
        - log_bessel_k(s - n1, 2.0 * math.sqrt(m * j1))
    )
    return float(out) if scalar else np.asarray(out)


def predictive_moments(params: InvGammaMixParams, j1: float, n1: int, j2: float) -> MomentSummary:
    """(J2 E[theta|n1], J2 E[theta|n1] + J2**2 Var[theta|n1])."""
    j2 = check_positive(j2, "J2")
    post = posterior_moments(params, j1, n1)
    mean = j2 * post.mean
    return MomentSummary(mean, mean + j2 * j2 * post.variance)


class TailSums(NamedTuple):
    """Sums over n >= start of P(n), n P(n) and n (n-1) P(n)."""

    mass: float
    first: float
    second: float


def tail_sums(params: InvGammaMixParams, exposure: float, start: int, max_terms: int = 40) -> TailSums:
    """Mass and factorial moments of the pmf beyond ``start``.

    With ``a = J m`` and ``U ~ Gamma(n - s)``,
    ``P(n) = a**s Gamma(n-s) / (Gamma(s) n!) * E[exp(-a/U)]``. Expanding the
    expectation in inverse moments of ``U`` and summing each term in closed
    form (``sum_{n>=N} Gamma(n+A)/Gamma(n+B) = Gamma(N+A) / ((B-A-1) Gamma(N+B-1))``)
    gives a series in ``a / N``. Requires ``start`` well above ``a + s``;
    callers use :func:`default_tail_start`.
    """
    j = check_positive(exposure, "exposure")
    a = j * params.m
    s = params.s
    big_n = int(start)
    if big_n <= s + max_terms + 1:
        raise DomainError("tail start must exceed s + number of series terms")
    out = []
    for order in (0, 1, 2):
        if s <= order:
            out.append(INF)
            continue
        total = 0.0
        for k in range(max_terms):
            log_term = (
                (s + k) * math.log(a)
                - math.lgamma(s)
                - math.lgamma(k + 1.0)
                + log_gamma_ratio(big_n - order, order - s - k)
                - math.log(s + k - order)
            )
            term = (-1.0) ** k * math.exp(log_term)
            total += term
            if abs(term) <= 1e-17 * abs(total):
                break
        out.append(total)
    return TailSums(*out)


def default_tail_start(params: InvGammaMixParams, exposure: float) -> int:
    return int(max(2000, math.ceil(20.0 * (exposure * params.m + params.s + 40.0))))


def support_with_tail(params: InvGammaMixParams, exposure: float, start: int | None = None):
    """Explicit pmf on ``0..start-1`` plus analytic tail sums beyond it.

    Returns ``(counts, probabilities, TailSums)``.
    """
    if start is None:
        start = default_tail_start(params, exposure)
    counts = np.arange(start)
    probs = np.exp(pig_log_pmf(params, exposure, counts))
    return counts, probs, tail_sums(params, exposure, start)
