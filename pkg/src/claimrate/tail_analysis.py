"""Log-log tail study of claim-count laws.

With ``x = ln n`` and ``y = ln P(N = n)`` a power-law tail
``P(n) ~ n**(-1/xi)`` shows up as a straight line of slope ``-1/xi``. For the
Poisson-inverse-gamma law the slope settles at ``-(s + 1)``; Poisson and
negative binomial curves bend down without limit because of their
``-n ln n`` term.

Stirling-based closed forms of the Poisson and negative binomial curves:

Poisson(lam):
    y = c0 + c1 e^x - (e^x + 1/2) x,
    c0 = -lam - ln(2 pi)/2,  c1 = 1 + ln lam.

Negative binomial (alpha, beta, J), p = beta/(beta+J):
    y = c0 + c1 e^x + (c2 + e^x) ln(c3 + e^x) - (e^x + 1/2) x,
    c0 = alpha ln p - ln Gamma(alpha) - alpha,  c1 = ln(1 - p),
    c2 = alpha - 1/2,  c3 = alpha.

The NB form comes from Stirling applied to ln Gamma(n + alpha) as
``(n + alpha - 1/2) ln(n + alpha) - (n + alpha) + ln(2 pi)/2`` and to
``ln n!`` as ``(n + 1/2) ln n - n + ln(2 pi)/2``; the two ``1/(12 z)``
corrections cancel to ``O(alpha / n**2)``. Shifting to ``c3 = alpha - 1``
(Stirling for Gamma(w+1) with w = n + alpha - 1) is equally valid but leaves
a ``(1 - alpha)/(12 n**2)`` residue, larger for the small shapes typical of
claim data.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .core import DomainError, check_positive
from .poisson_gamma import GammaMixParams
from .poisson_inv_gamma import InvGammaMixParams, pig_moments
from .special import log_gamma

DEFAULT_HALF_WIDTH = float(os.environ.get("CLAIMRATE_SLOPE_DELTA", "0.05"))
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class LogLogPoint(NamedTuple):
    x: float
    y: float


def loglog_curve(model, n_values, exposure: float = 1.0) -> list[LogLogPoint]:
    """Points (ln n, ln P(N=n)) for a model exposing ``log_pmf(n, exposure)``."""
    n = np.asarray(n_values)
    if n.size == 0 or np.any(n < 1):
        raise DomainError("n_values must be a nonempty list of integers >= 1")
    y = np.atleast_1d(model.log_pmf(n.astype(np.int64), exposure))
    return [LogLogPoint(float(a), float(b)) for a, b in zip(np.log(n.astype(float)), y)]


def slope_at(model, x: float, half_width: float = DEFAULT_HALF_WIDTH, exposure: float = 1.0) -> float:
    """Finite-difference log-log slope dy/dx around ``x``.

    Uses counts ``n1 = round(e^x (1 - d))`` and ``n2 = round(e^x (1 + d))``
    and returns ``(y(n2) - y(n1)) / (ln n2 - ln n1)``.
    """
    if not 0.0 < half_width < 0.5:
        raise DomainError("half_width must lie in (0, 0.5)")
    if x < math.log(2.0):
        raise DomainError("x must be at least ln 2")
    centre = math.exp(x)
    n1 = int(round(centre * (1.0 - half_width)))
    n2 = int(round(centre * (1.0 + half_width)))
    if n1 == n2 or n1 < 1:
        raise DomainError(f"x={x} and half_width={half_width} round to a single count")
    y1, y2 = model.log_pmf(np.array([n1, n2]), exposure)
    return float((y2 - y1) / (math.log(n2) - math.log(n1)))


@dataclass
class TailScanRow:
    params: InvGammaMixParams
    mean: float
    variance: float
    slopes: dict[float, float] = field(default_factory=dict)
    error: str | None = None

    @property
    def slope_x10(self) -> float:
        return self.slopes.get(10.0, math.nan)

    @property
    def slope_x13(self) -> float:
        return self.slopes.get(13.0, math.nan)

    @property
    def tail_index(self) -> float:
        """The asymptotic 1/xi = s + 1."""
        return self.params.s + 1.0


def _scan_one(params, x_points, exposure, half_width) -> TailScanRow:
    try:
        mom = pig_moments(params, exposure)
        row = TailScanRow(params, mom.mean, mom.variance)
        for x in x_points:
            row.slopes[float(x)] = slope_at(params, x, half_width, exposure)
        return row
    except (DomainError, ArithmeticError, ValueError) as exc:
        return TailScanRow(params, math.nan, math.nan, error=str(exc))


def table1_scan(
    rows: Sequence[InvGammaMixParams],
    x_points: Sequence[float] = (10.0, 13.0),
    exposure: float = 1.0,
    half_width: float = DEFAULT_HALF_WIDTH,
    workers: int | None = None,
) -> list[TailScanRow]:
    """Moments and log-log slopes for each parameter row.

    A failing row records its error message and the scan carries on.
    """
    x_points = [float(x) for x in x_points]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda p: _scan_one(p, x_points, exposure, half_width), rows))
    return [_scan_one(p, x_points, exposure, half_width) for p in rows]


def asymptotic_pig_log_pmf(params: InvGammaMixParams, exposure: float, n):
    """Leading large-n form s ln(Jm) - ln Gamma(s) + ln Gamma(n-s) - ln Gamma(n+1)."""
    n = np.asarray(n, dtype=float)
    if np.any(n <= params.s):
        raise DomainError("asymptotic form needs n > s")
    jm = check_positive(exposure, "exposure") * params.m
    return params.s * math.log(jm) - log_gamma(params.s) + log_gamma(n - params.s) - log_gamma(n + 1.0)


def poisson_loglog_approx(lam: float, x: float) -> float:
    """Stirling form of ln P(N = e^x) for Poisson(lam)."""
    lam = check_positive(lam, "lambda")
    n = math.exp(x)
    c0 = -lam - HALF_LOG_2PI
    c1 = 1.0 + math.log(lam)
    return c0 + c1 * n - (n + 0.5) * x


def nb_loglog_coefficients(params: GammaMixParams, exposure: float = 1.0) -> tuple[float, float, float, float]:
    j = check_positive(exposure, "exposure")
    a = params.alpha
    log_p = math.log(params.beta) - math.log(params.beta + j)
    log_q = math.log(j) - math.log(params.beta + j)
    return (a * log_p - math.lgamma(a) - a, log_q, a - 0.5, a)


def nb_loglog_approx(params: GammaMixParams, exposure: float, x: float) -> float:
    """Stirling form of ln P(N = e^x) for the negative binomial."""
    c0, c1, c2, c3 = nb_loglog_coefficients(params, exposure)
    n = math.exp(x)
    return c0 + c1 * n + (c2 + n) * math.log(c3 + n) - (n + 0.5) * x


class LineFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def fit_line(points: Sequence[LogLogPoint]) -> LineFit:
    x = np.array([p.x for p in points])
    y = np.array([p.y for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LineFit(float(slope), float(intercept), r2)


def default_n_grid(x_max: float = 13.0, points_per_unit: int = 20) -> np.ndarray:
    xs = np.linspace(0.0, x_max, int(x_max * points_per_unit) + 1)
    return np.unique(np.maximum(np.round(np.exp(xs)), 1).astype(np.int64))


FIGURE1_PIG = InvGammaMixParams(0.0011, 2.1)
FIGURE1_NB = GammaMixParams(0.1, 100.0)


def figure1_data(
    pig: InvGammaMixParams = FIGURE1_PIG,
    nb: GammaMixParams = FIGURE1_NB,
    exposure: float = 1.0,
    n_grid=None,
) -> dict[str, list[LogLogPoint]]:
    """Log-log series of two moment-matched models, keyed by family name."""
    n_grid = default_n_grid() if n_grid is None else np.asarray(n_grid)
    return {
        "invgamma": loglog_curve(pig, n_grid, exposure),
        "gamma": loglog_curve(nb, n_grid, exposure),
    }
