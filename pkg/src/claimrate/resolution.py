"""Resolution: can adjacent claim-count classes be told apart?

For claims ``n1`` observed over ``J1`` years and a forecast window ``J2``,

    resolution(n1) = (E[N2 | n1 + 1] - E[N2 | n1]) / sqrt(Var[N2 | n1]).

Values of 1 or more mean the predictive laws for ``n1`` and ``n1 + 1`` are
separated by at least their width. The denominator uses the variance at
``n1`` only; ``pooled=True`` swaps in the average of the two variances.

For the gamma mixture this reduces to
``sqrt(J2 / ((n1 + alpha) (beta + J1 + J2)))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import check_count, check_positive
from .poisson_gamma import GammaMixParams

DEFAULT_THRESHOLD = 1.0


@dataclass(frozen=True)
class ResolutionReport:
    n1: int
    resolution: float
    threshold: float = DEFAULT_THRESHOLD

    @property
    def high_resolution(self) -> bool:
        return self.resolution >= self.threshold


def resolution_generic(
    model,
    j1: float,
    j2: float,
    n1: int,
    pooled: bool = False,
    threshold: float = DEFAULT_THRESHOLD,
) -> ResolutionReport:
    """Resolution for any model exposing ``predictive_moments(j1, n1, j2)``."""
    j1 = check_positive(j1, "J1")
    j2 = check_positive(j2, "J2")
    n1 = check_count(n1, "n1")
    here = model.predictive_moments(j1, n1, j2)
    there = model.predictive_moments(j1, n1 + 1, j2)
    var = 0.5 * (here.variance + there.variance) if pooled else here.variance
    return ResolutionReport(n1, (there.mean - here.mean) / math.sqrt(var), threshold)


def resolution_gamma_closed_form(params: GammaMixParams, j1: float, j2: float, n1: int) -> float:
    j1 = check_positive(j1, "J1")
    j2 = check_positive(j2, "J2")
    n1 = check_count(n1, "n1")
    return math.sqrt(j2 / ((n1 + params.alpha) * (params.beta + j1 + j2)))


@dataclass(frozen=True)
class ResolutionProfile:
    reports: list[ResolutionReport]
    threshold: float

    @property
    def last_resolved(self) -> int | None:
        """Largest n1 whose resolution reaches the threshold, or None."""
        hits = [r.n1 for r in self.reports if r.high_resolution]
        return max(hits) if hits else None


def resolution_profile(
    model,
    j1: float,
    j2: float,
    n1_max: int,
    threshold: float = DEFAULT_THRESHOLD,
    pooled: bool = False,
) -> ResolutionProfile:
    n1_max = check_count(n1_max, "n1_max")
    reports = [resolution_generic(model, j1, j2, n, pooled=pooled, threshold=threshold) for n in range(n1_max + 1)]
    return ResolutionProfile(reports, threshold)
