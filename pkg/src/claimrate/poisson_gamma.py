"""Classical Poisson-gamma experience rating (negative binomial claim counts).

Claim intensities across the portfolio follow a gamma law with shape
``alpha`` and rate ``beta``,

    f(theta) = beta**alpha * theta**(alpha - 1) * exp(-beta * theta) / Gamma(alpha),

so the number of claims in ``J`` years is negative binomial with
``p = beta / (beta + J)``. After observing ``n`` claims in ``J`` years the
intensity is again gamma, with shape ``alpha + n`` and rate ``beta + J``, and
the posterior mean takes the credibility form

    (alpha + n) / (beta + J) = z * n / J + (1 - z) * alpha / beta,  z = J / (beta + J).

``beta`` is the number of observation years that give the risk's own
experience the same weight as the portfolio mean; ``alpha`` is the expected
number of claims in a period of ``beta`` years.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import DomainError, MomentSummary, check_count, check_positive
from .special import log_gamma, log_gamma_ratio


@dataclass(frozen=True)
class GammaMixParams:
    """Gamma mixing law with shape ``alpha`` and rate ``beta``."""

    alpha: float
    beta: float

    family = "gamma"
    n_params = 2

    def __post_init__(self):
        object.__setattr__(self, "alpha", check_positive(self.alpha, "alpha"))
        object.__setattr__(self, "beta", check_positive(self.beta, "beta"))

    @property
    def mixing_mean(self) -> float:
        return self.alpha / self.beta

    @property
    def mixing_variance(self) -> float:
        return self.alpha / self.beta**2

    # model protocol used by tail_analysis, resolution, pricing, estimation
    def log_pmf(self, n, exposure: float = 1.0):
        return nb_log_pmf(self, exposure, n)

    def moments(self, exposure: float = 1.0) -> MomentSummary:
        return nb_moments(self, exposure)

    def posterior_moments(self, exposure: float, n: int) -> "GammaPosteriorMoments":
        return posterior_moments(self, exposure, n)

    def predictive_log_pmf(self, j1: float, n1: int, j2: float, n2):
        return predictive_log_pmf(self, j1, n1, j2, n2)

    def predictive_moments(self, j1: float, n1: int, j2: float) -> MomentSummary:
        return predictive_moments(self, j1, n1, j2)


@dataclass(frozen=True)
class GammaPosterior:
    """Gamma posterior of the claim intensity: shape ``alpha + n``, rate ``beta + J``."""

    shape: float
    rate: float

    def __post_init__(self):
        check_positive(self.shape, "shape")
        check_positive(self.rate, "rate")

    def log_pdf(self, theta):
        theta = np.asarray(theta, dtype=float)
        if np.any(theta <= 0):
            raise DomainError("theta must be > 0")
        out = (
            self.shape * math.log(self.rate)
            + (self.shape - 1.0) * np.log(theta)
            - self.rate * theta
            - log_gamma(self.shape)
        )
        return float(out) if out.ndim == 0 else out


class GammaPosteriorMoments(NamedTuple):
    mean: float
    variance: float
    credibility_weight: float


def _as_counts(n):
    arr = np.asarray(n)
    if arr.ndim == 0:
        return check_count(n), True
    if arr.size and (np.any(arr < 0) or np.any(arr != np.floor(arr))):
        raise DomainError("claim counts must be nonnegative integers")
    return arr.astype(float), False


def nb_log_pmf(params: GammaMixParams, exposure: float, n):
    """ln P(N = n) for claims over ``exposure`` years (negative binomial).

    ``n`` may be an integer or an integer array. With ``p = beta/(beta+J)``
    this is ``ln C(n+alpha-1, n) + alpha ln p + n ln(1-p)``; the binomial
    coefficient comes from a cancellation-free log-gamma ratio and both
    logs from ``log1p``, so the result stays accurate for huge ``n``.
    """
    j = check_positive(exposure, "exposure")
    counts, scalar = _as_counts(n)
    counts = np.asarray(counts, dtype=float)
    a, b = params.alpha, params.beta
    out = (
        log_gamma_ratio(counts + 1.0, a - 1.0)
        - log_gamma(a)
        - a * math.log1p(j / b)
        - counts * math.log1p(b / j)
    )
    return float(out) if scalar else out


def nb_moments(params: GammaMixParams, exposure: float) -> MomentSummary:
    j = check_positive(exposure, "exposure")
    mean = j * params.alpha / params.beta
    return MomentSummary(mean, mean * (1.0 + j / params.beta))


def posterior(params: GammaMixParams, exposure: float, n: int) -> GammaPosterior:
    j = check_positive(exposure, "exposure")
    n = check_count(n)
    return GammaPosterior(params.alpha + n, params.beta + j)


def posterior_moments(params: GammaMixParams, exposure: float, n: int) -> GammaPosteriorMoments:
    """Posterior mean/variance of the intensity plus the credibility weight J/(beta+J)."""
    post = posterior(params, exposure, n)
    j = float(exposure)
    return GammaPosteriorMoments(
        mean=post.shape / post.rate,
        variance=post.shape / post.rate**2,
        credibility_weight=j / post.rate,
    )


def predictive_log_pmf(params: GammaMixParams, j1: float, n1: int, j2: float, n2):
    """ln P(N2 = n2 | N1 = n1): negative binomial, shape alpha+n1, p=(beta+J1)/(beta+J1+J2)."""
    j1 = check_positive(j1, "J1")
    n1 = check_count(n1, "n1")
    return nb_log_pmf(GammaMixParams(params.alpha + n1, params.beta + j1), j2, n2)


def predictive_moments(params: GammaMixParams, j1: float, n1: int, j2: float) -> MomentSummary:
    j1 = check_positive(j1, "J1")
    j2 = check_positive(j2, "J2")
    n1 = check_count(n1, "n1")
    rate = params.beta + j1
    mean = j2 * (n1 + params.alpha) / rate
    return MomentSummary(mean, mean * (rate + j2) / rate)


def support_with_tail_bound(params: GammaMixParams, exposure: float, tail_tol: float = 1e-12):
    """Counts ``0..N*`` and their probabilities, with a bound on the omitted mass.

    ``N*`` is the first count past the mode at which the geometric bound
    ``P(N*+1) / (1 - r)`` on the remaining mass drops below ``tail_tol``,
    where ``r`` is the (decreasing) ratio ``P(n+1)/P(n) = (n+alpha)/(n+1) * (1-p)``.

    Returns ``(counts, probabilities, tail_bound)``.
    """
    j = check_positive(exposure, "exposure")
    q = j / (params.beta + j)
    a = params.alpha
    block = 256
    start = 0
    counts_all, probs_all = [], []
    while True:
        counts = np.arange(start, start + block)
        probs = np.exp(nb_log_pmf(params, j, counts))
        counts_all.append(counts)
        probs_all.append(probs)
        # sup of P(k+1)/P(k) over k > n: q if alpha <= 1, else the (decreasing) ratio at k = n+1
        ratio = q * np.where(a <= 1, 1.0, (counts + 1 + a) / (counts + 2))
        next_prob = np.exp(nb_log_pmf(params, j, counts + 1))
        with np.errstate(divide="ignore"):
            bound = np.where(ratio < 1, next_prob / (1.0 - ratio), np.inf)
        hit = np.nonzero(bound < tail_tol)[0]
        if hit.size:
            stop = hit[0]
            counts = np.concatenate(counts_all)[: start + stop + 1]
            probs = np.concatenate(probs_all)[: start + stop + 1]
            return counts, probs, float(bound[stop])
        start += block
        block *= 2
