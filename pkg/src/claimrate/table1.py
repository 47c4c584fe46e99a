"""Published tail-slope scan for the Poisson-inverse-gamma law (exposure J = 1).

Each row holds the printed ``m`` and ``s``, the printed mean and variance
(``None`` where the variance is infinite) and the printed log-log slopes
``dy/dx`` at ``x = 10`` and ``x = 13``.

The printed ``m``/``s`` are rounded (``s`` to four significant figures), so
the exact parameters are recovered from the printed moments where the
variance is finite (``s = 2 + mean**2 / (var - mean)``, ``m = mean (s - 1)``)
and taken as printed otherwise.
"""

from __future__ import annotations

from typing import NamedTuple

from .core import INF
from .poisson_inv_gamma import InvGammaMixParams


class PublishedRow(NamedTuple):
    m: float
    s: float
    mean: float
    variance: float | None
    slope_x10: float
    slope_x13: float

    @property
    def variance_or_inf(self) -> float:
        return INF if self.variance is None else self.variance


ROWS: tuple[PublishedRow, ...] = tuple(
    PublishedRow(*r)
    for r in [
        (0.0011, 2.100, 0.001, 0.00101, -3.100, -3.109),
        (0.00101, 2.010, 0.001, 0.0011, -3.010, -3.020),
        (0.001001, 2.001, 0.001, 0.002, -3.001, -3.011),
        (0.001000111, 2.000, 0.001, 0.01, -3.000, -3.011),
        (0.00100001, 2.000, 0.001, 0.1, -3.000, -3.010),
        (0.001000001, 2.000, 0.001, 1.0, -3.000, -3.010),
        (0.0001, 1.100, 0.001, None, -2.100, -2.110),
        (0.001, 2.000, 0.001, None, -3.000, -3.010),
        (0.02, 3.000, 0.01, 0.0101, -4.000, -4.009),
        (0.011, 2.100, 0.01, 0.011, -3.100, -3.109),
        (0.0101, 2.010, 0.01, 0.02, -3.010, -3.019),
        (0.010011111, 2.001, 0.01, 0.1, -3.001, -3.010),
        (0.01000101, 2.000, 0.01, 1.0, -3.000, -3.010),
        (0.0100001, 2.000, 0.01, 10.0, -3.000, -3.009),
        (0.001, 1.100, 0.01, None, -2.100, -2.110),
        (0.01, 2.000, 0.01, None, -3.000, -3.009),
        (1.1, 12.00, 0.1, 0.101, -13.00, -13.01),
        (0.2, 3.000, 0.1, 0.11, -4.000, -4.008),
        (0.11, 2.100, 0.1, 0.2, -3.100, -3.108),
        (0.101111111, 2.011, 0.1, 1.0, -3.011, -3.020),
        (0.10010101, 2.001, 0.1, 10.0, -3.001, -3.010),
        (0.10001001, 2.000, 0.1, 100.0, -3.000, -3.009),
        (0.01, 1.100, 0.1, None, -2.100, -2.109),
        (0.1, 2.000, 0.1, None, -3.000, -3.009),
        (101.0, 102.0, 1.0, 1.01, -103.2, -103.0),
        (11.0, 12.00, 1.0, 1.1, -13.00, -13.01),
        (2.0, 3.000, 1.0, 2.0, -4.000, -4.008),
        (1.111111111, 2.111, 1.0, 10.0, -3.111, -3.119),
        (1.01010101, 2.010, 1.0, 100.0, -3.010, -3.018),
        (1.001001001, 2.001, 1.0, 1000.0, -3.001, -3.009),
        (0.1, 1.100, 1.0, None, -2.100, -2.108),
        (1.0, 2.000, 1.0, None, -3.000, -3.008),
        (10010.0, 1002.0, 10.0, 10.1, -1026.0, -1004.0),
        (1010.0, 102.0, 10.0, 11.0, -103.2, -103.0),
        (110.0, 12.00, 10.0, 20.0, -13.00, -13.01),
        (21.11111111, 3.111, 10.0, 100.0, -4.111, -4.119),
        (11.01010101, 2.101, 10.0, 1000.0, -3.101, -3.108),
        (10.1001001, 2.010, 10.0, 10000.0, -3.010, -3.017),
        (1.0, 1.100, 10.0, None, -2.100, -2.108),
        (10.0, 2.000, 10.0, None, -3.000, -3.007),
        (1211.111111, 13.11, 100.0, 1000.0, -14.06, -14.11),
        (516.6666667, 6.167, 100.0, 2500.0, -7.144, -7.172),
        (201.010101, 3.010, 100.0, 10000.0, -4.001, -4.016),
        (10.0, 1.100, 100.0, None, -2.100, -2.107),
        (100.0, 2.000, 100.0, None, -2.996, -3.006),
        (11101.0101, 12.10, 1000.0, 100000.0, -12.60, -13.08),
        (100.0, 1.100, 1000.0, None, -2.096, -2.106),
        (1000.0, 2.000, 1000.0, None, -2.955, -3.004),
    ]
)


def exact_params(row: PublishedRow) -> InvGammaMixParams:
    """Parameters reproducing the row's printed mean and variance exactly."""
    if row.variance is None:
        return InvGammaMixParams(row.m, row.s)
    from .estimation import fit_moments_invgamma

    return fit_moments_invgamma(row.mean, row.variance, 1.0)


def table1_params() -> list[InvGammaMixParams]:
    return [exact_params(r) for r in ROWS]
