"""Log-space trapezoidal quadrature for log-concave integrands on the real line.

Every integral in this package (Bessel K, the mixing integrals, posterior
moments, predictive probabilities) becomes, after the substitution
``x = exp(t)``, an integral over the whole real line of ``exp(h(t))`` with
``h`` strictly concave. For such integrands the trapezoidal rule converges
exponentially, so successive halving of the step gives a cheap and very
reliable error estimate.

The routines here are deliberately written without reference to the closed
forms they are used to check.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .core import ConvergenceError

LogIntegrand = Callable[[np.ndarray], np.ndarray]

# integrand is dropped once it falls this far (in log) below its peak
_LOG_CUTOFF = 60.0


def _eval(logf: LogIntegrand, t) -> np.ndarray:
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        out = np.asarray(logf(np.asarray(t, dtype=float)), dtype=float)
    return np.where(np.isnan(out), -np.inf, out)


def _locate_peak(logf: LogIntegrand, hint: float | None) -> float:
    if hint is not None and math.isfinite(hint):
        start = float(hint)
        span = 1.0
    else:
        start, span = 0.0, 1.0
    res = minimize_scalar(
        lambda t: -float(_eval(logf, t)),
        bracket=(start - span, start + span),
        tol=1e-12,
    )
    return float(res.x)


def _peak_width(logf: LogIntegrand, t0: float, f0: float) -> float:
    h = 1e-3
    for _ in range(8):
        fp, fm = _eval(logf, [t0 + h, t0 - h])
        curv = -(fp + fm - 2.0 * f0) / (h * h)
        if not math.isfinite(curv) or curv <= 0.0:
            h *= 0.1
            continue
        width = 1.0 / math.sqrt(curv)
        if h <= 0.05 * width:
            return width
        h = 0.01 * width
    return max(h, 1e-12)


def _cut_point(logf: LogIntegrand, t0: float, f0: float, width: float, sign: int) -> float:
    d = width
    for _ in range(200):
        if _eval(logf, t0 + sign * d) - f0 < -_LOG_CUTOFF:
            return t0 + sign * d
        d *= 1.5
    raise ConvergenceError("integrand does not decay; cannot bound the integration range")


def log_quad(
    logf: LogIntegrand,
    peak_hint: float | None = None,
    rtol: float = 1e-14,
    max_doublings: int = 18,
) -> float:
    """Return ``log(integral of exp(logf(t)) dt)`` over the real line.

    Parameters
    ----------
    logf : callable
        Vectorised log of the integrand; must be concave (unimodal suffices
        in practice).
    peak_hint : float, optional
        Approximate location of the maximum of ``logf``.
    rtol : float
        Stop when two successive step halvings agree to this absolute
        tolerance in log (equivalently, relative tolerance on the integral).
    max_doublings : int
        Refinement budget; exceeding it raises :class:`ConvergenceError`.
    """
    t0 = _locate_peak(logf, peak_hint)
    f0 = float(_eval(logf, t0))
    if not math.isfinite(f0):
        raise ConvergenceError("integrand is not finite at its peak")
    width = _peak_width(logf, t0, f0)
    lo = _cut_point(logf, t0, f0, width, -1)
    hi = _cut_point(logf, t0, f0, width, +1)

    npts = 64
    step = (hi - lo) / npts
    grid = lo + step * np.arange(npts + 1)
    total = np.sum(np.exp(_eval(logf, grid) - f0))
    estimate = math.log(total * step)
    for _ in range(max_doublings):
        mids = lo + step * (np.arange(npts) + 0.5)
        total += np.sum(np.exp(_eval(logf, mids) - f0))
        npts *= 2
        step *= 0.5
        refined = math.log(total * step)
        if abs(refined - estimate) <= rtol:
            return f0 + refined
        estimate = refined
    raise ConvergenceError(
        f"trapezoidal refinement did not converge after {max_doublings} halvings"
    )
