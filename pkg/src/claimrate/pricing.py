"""A posteriori premiums and bonus-malus relativity tables.

The classical rule charges the posterior mean intensity ``E[theta | n]``.
Because the full posterior is available for both mixtures, loaded principles
acting on the posterior variance are offered as well. All premiums are per
unit of the portfolio base premium (the prior mean intensity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import DomainError, check_count, check_positive


class PrincipleKind(str, Enum):
    EXPECTATION = "expectation"
    VARIANCE = "variance-loaded"
    STDDEV = "stddev-loaded"


@dataclass(frozen=True)
class PremiumPrinciple:
    kind: PrincipleKind = PrincipleKind.EXPECTATION
    loading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PrincipleKind(self.kind))
        loading = float(self.loading)
        if not math.isfinite(loading) or loading < 0:
            raise DomainError(f"loading must be a finite number >= 0, got {self.loading!r}")
        object.__setattr__(self, "loading", loading)


EXPECTATION = PremiumPrinciple()


def premium(mean: float, variance: float, principle: PremiumPrinciple = EXPECTATION) -> float:
    """Premium for a risk with the given mean and variance.

    expectation: mean; variance-loaded: mean + c var; stddev-loaded: mean + c sd.
    """
    mean = check_positive(mean, "mean")
    variance = float(variance)
    if principle.kind is PrincipleKind.EXPECTATION:
        return mean
    if not math.isfinite(variance):
        raise DomainError(f"{principle.kind.value} principle needs a finite variance")
    if variance < 0:
        raise DomainError("variance must be >= 0")
    if principle.kind is PrincipleKind.VARIANCE:
        return mean + principle.loading * variance
    return mean + principle.loading * math.sqrt(variance)


@dataclass(frozen=True)
class BmsTableRow:
    n1: int
    posterior_mean: float
    posterior_variance: float
    relativity: float
    premium: float


def bms_table(model, j1: float, n1_max: int, principle: PremiumPrinciple = EXPECTATION) -> list[BmsTableRow]:
    """Relativities E[theta | n1] / E[theta] and premiums for n1 = 0..n1_max.

    ``model`` exposes ``mixing_mean`` and ``posterior_moments(exposure, n)``.
    """
    j1 = check_positive(j1, "J1")
    n1_max = check_count(n1_max, "n1_max")
    base = model.mixing_mean
    if not math.isfinite(base):
        raise DomainError("portfolio mean intensity is infinite (inverse-gamma needs s > 1); no base premium")
    rows = []
    for n in range(n1_max + 1):
        post = model.posterior_moments(j1, n)
        rows.append(
            BmsTableRow(
                n1=n,
                posterior_mean=post.mean,
                posterior_variance=post.variance,
                relativity=post.mean / base,
                premium=premium(post.mean, post.variance, principle) / base,
            )
        )
    return rows
