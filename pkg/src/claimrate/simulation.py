"""Synthetic portfolios from the mixed Poisson models, and a chi-square check.

Each policy draws an intensity ``theta`` from the mixing law and then a
claim count from Poisson(J theta).

Random streams
--------------
Policies are processed in fixed blocks of ``BLOCK_SIZE``. Block ``b`` of a
run seeded with ``seed`` uses NumPy's PCG64 bit generator initialised from
``SeedSequence(seed, spawn_key=(b,))``: first all intensities of the block
are drawn, then all counts; the last block is drawn in full and truncated.
A policy's count therefore depends only on ``(seed, policy index)``, never
on the portfolio size or on how blocks are scheduled across threads.

Gamma variates for shape >= 1 come from NumPy's ``standard_gamma``
(Marsaglia-Tsang squeeze). Below shape 1 the boost
``G(a) = G(a + 1) * U**(1/a)`` is applied, carried out in log space so that
tiny shapes do not underflow. An inverse-gamma draw with scale ``m`` and
shape ``s`` is ``1 / G`` for ``G ~ Gamma(shape=s, rate=m)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import chi2

from .core import DomainError, check_positive
from .estimation import ClaimRecord
from .poisson_gamma import GammaMixParams
from .poisson_inv_gamma import InvGammaMixParams

BLOCK_SIZE = 65_536
# Poisson means above this are drawn from the normal approximation
_POISSON_CAP = 1e15
_THETA_CAP = 1e300


@dataclass(frozen=True)
class SimConfig:
    params: GammaMixParams | InvGammaMixParams
    exposure_years: float
    portfolio_size: int
    seed: int

    def __post_init__(self):
        check_positive(self.exposure_years, "exposure_years")
        if int(self.portfolio_size) != self.portfolio_size or self.portfolio_size < 1:
            raise DomainError("portfolio_size must be an integer >= 1")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    @property
    def family(self) -> str:
        return self.params.family


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


def log_standard_gamma(shape: float, rng: np.random.Generator, size=None):
    """Log of Gamma(shape, 1) variates, valid for every shape > 0."""
    if shape >= 1.0:
        return np.log(rng.standard_gamma(shape, size))
    boosted = np.log(rng.standard_gamma(shape + 1.0, size))
    return boosted + np.log(rng.random(size)) / shape


def sample_theta(params, rng: np.random.Generator, size=None):
    """Draw mixing intensities: Gamma(alpha, rate beta) or InvGamma(scale m, shape s)."""
    with np.errstate(over="ignore"):
        if isinstance(params, GammaMixParams):
            out = np.exp(log_standard_gamma(params.alpha, rng, size)) / params.beta
        elif isinstance(params, InvGammaMixParams):
            out = params.m * np.exp(-log_standard_gamma(params.s, rng, size))
        else:
            raise DomainError(f"cannot sample intensities for {params!r}")
    out = np.minimum(out, _THETA_CAP)
    return float(out) if np.ndim(out) == 0 else out


def _poisson(rng: np.random.Generator, lam: np.ndarray) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    big = lam > _POISSON_CAP
    if not np.any(big):
        return rng.poisson(lam)
    out = rng.poisson(np.where(big, 0.0, lam))
    approx = lam[big] + np.sqrt(lam[big]) * rng.standard_normal(int(big.sum()))
    out = out.astype(np.int64)
    out[big] = np.minimum(np.round(approx), 2.0**62).astype(np.int64)
    return out


def _sample_block(config: SimConfig, block: int) -> np.ndarray:
    start = block * BLOCK_SIZE
    size = min(BLOCK_SIZE, config.portfolio_size - start)
    rng = block_rng(config.seed, block)
    # always draw a full block so a policy's count never depends on portfolio size
    theta = sample_theta(config.params, rng, BLOCK_SIZE)
    return _poisson(rng, config.exposure_years * theta)[:size]


def sample_counts(config: SimConfig, workers: int | None = None) -> np.ndarray:
    """Claim counts for every policy of the portfolio, as an int64 array."""
    blocks = range(math.ceil(config.portfolio_size / BLOCK_SIZE))
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda b: _sample_block(config, b), blocks))
    else:
        parts = [_sample_block(config, b) for b in blocks]
    return np.concatenate(parts).astype(np.int64)


def sample_portfolio(config: SimConfig, workers: int | None = None) -> list[ClaimRecord]:
    counts = sample_counts(config, workers)
    width = max(7, len(str(config.portfolio_size - 1)))
    j = float(config.exposure_years)
    return [ClaimRecord(f"P{i:0{width}d}", j, int(c)) for i, c in enumerate(counts)]


class GofBin(NamedTuple):
    low: int
    high: int | None  # None: open-ended right tail
    observed: int
    expected: float


class GofResult(NamedTuple):
    chi_square: float
    degrees_of_freedom: int
    bins: list[GofBin]
    p_value: float


def goodness_of_fit(records: Sequence[ClaimRecord] | np.ndarray, model, fitted_params: int = 0,
                    exposure: float | None = None, min_expected: float = 5.0) -> GofResult:
    """Pearson chi-square of observed claim counts against ``model``.

    Counts are binned from zero upward, each bin closed once its expected
    frequency reaches ``min_expected``; whatever remains becomes an
    open-ended tail bin, merged into its neighbour if still too small.
    Degrees of freedom are ``bins - 1 - fitted_params``, where
    ``fitted_params`` is the number of parameters estimated from these same
    data.

    ``records`` may also be a plain array of counts, in which case
    ``exposure`` must be given.
    """
    if isinstance(records, np.ndarray):
        counts = records.astype(np.int64)
        if exposure is None:
            raise DomainError("exposure is required when passing raw counts")
        j = check_positive(exposure, "exposure")
    else:
        if not records:
            raise DomainError("no claim records supplied")
        exposures = {r.exposure_years for r in records}
        if len(exposures) != 1:
            raise DomainError("goodness of fit needs a common exposure")
        j = exposures.pop()
        counts = np.array([r.claim_count for r in records], dtype=np.int64)
    total = counts.size
    if total == 0:
        raise DomainError("no claim counts supplied")
    observed = np.bincount(counts)

    bins: list[list] = []  # [low, high, expected]
    low, acc, cum, n = 0, 0.0, 0.0, 0
    while True:
        remaining = max(1.0 - cum, 0.0)
        if total * remaining < 2 * min_expected:
            break
        p = math.exp(float(model.log_pmf(n, j)))
        acc += p
        cum += p
        n += 1
        if total * acc >= min_expected:
            bins.append([low, n - 1, total * acc])
            low, acc = n, 0.0
    tail_expected = total * (acc + max(1.0 - cum, 0.0))
    if tail_expected >= min_expected or not bins:
        bins.append([low, None, tail_expected])
    else:
        bins[-1][1] = None
        bins[-1][2] += tail_expected
    if len(bins) < 2:
        raise DomainError("fewer than two bins remain after merging; chi-square test impossible")
    dof = len(bins) - 1 - int(fitted_params)
    if dof < 1:
        raise DomainError("no degrees of freedom left")

    out, stat = [], 0.0
    for lo, hi, exp_count in bins:
        stop = observed.size if hi is None else hi + 1
        obs = int(observed[lo:stop].sum()) if lo < observed.size else 0
        out.append(GofBin(lo, hi, obs, exp_count))
        stat += (obs - exp_count) ** 2 / exp_count
    return GofResult(stat, dof, out, float(chi2.sf(stat, dof)))
