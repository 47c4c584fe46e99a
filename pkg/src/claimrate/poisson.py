"""Plain Poisson claim counts, the unmixed reference model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DomainError, MomentSummary, check_positive
from .special import log_gamma


@dataclass(frozen=True)
class PoissonParams:
    """Poisson claim counts with annual intensity ``lam``."""

    lam: float

    family = "poisson"
    n_params = 1

    def __post_init__(self):
        object.__setattr__(self, "lam", check_positive(self.lam, "lam"))

    def log_pmf(self, n, exposure: float = 1.0):
        rate = self.lam * check_positive(exposure, "exposure")
        counts = np.asarray(n, dtype=float)
        if np.any(counts < 0) or np.any(counts != np.floor(counts)):
            raise DomainError("claim counts must be nonnegative integers")
        out = -rate + counts * math.log(rate) - log_gamma(counts + 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def moments(self, exposure: float = 1.0) -> MomentSummary:
        rate = self.lam * check_positive(exposure, "exposure")
        return MomentSummary(rate, rate)
