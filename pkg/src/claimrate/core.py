"""Shared types and input checks used by every model module."""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(RuntimeError):
    """A numerical procedure exhausted its refinement or iteration budget."""


@dataclass(frozen=True)
class MomentSummary:
    """Mean and variance of a claim-count law.

    Infinite moments are stored as ``math.inf``; they are legitimate values
    (heavy-tailed mixing laws have them), never signalled by exceptions.
    """

    mean: float
    variance: float

    @property
    def mean_finite(self) -> bool:
        return math.isfinite(self.mean)

    @property
    def variance_finite(self) -> bool:
        return math.isfinite(self.variance)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def check_positive(value, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be a finite number > 0, got {value!r}")
    return value


def check_count(value, name: str = "n") -> int:
    if isinstance(value, bool):
        raise DomainError(f"{name} must be a nonnegative integer, got {value!r}")
    try:
        as_int = int(value)
    except (TypeError, ValueError, OverflowError):
        raise DomainError(f"{name} must be a nonnegative integer, got {value!r}") from None
    if as_int != value or as_int < 0:
        raise DomainError(f"{name} must be a nonnegative integer, got {value!r}")
    return as_int
