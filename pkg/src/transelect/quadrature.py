"""Log-space adaptive quadrature for one-dimensional evidence integrals."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .errors import IntegrationFailure

# Default integration windows per parameter support.
REAL_WINDOW = (-5.0, 7.0)
POSITIVE_WINDOW = (1e-8, 20.0)

# Hard limits beyond which tails are declared non-decaying. Heavy-tailed
# data can push a family's posterior mode to very large lambda (a large
# shift constant compresses the relative range of the shifted data), so the
# real-scale limit is generous.
REAL_LIMIT = (-200.0, 200.0)
POSITIVE_LIMIT = (1e-12, 200.0)


def _log_trapz(log_vals: np.ndarray, step: float) -> float:
    logw = np.full(log_vals.size, math.log(step))
    logw[0] -= math.log(2.0)
    logw[-1] -= math.log(2.0)
    return float(logsumexp(log_vals + logw))


def _eval(log_f: Callable[[float], float], xs: np.ndarray) -> np.ndarray:
    vals = np.array([log_f(float(x)) for x in xs], dtype=float)
    return np.where(np.isnan(vals), -np.inf, vals)


def log_integral(
    log_f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    init_points: int = 257,
    abs_tol: float = 1e-8,
    max_doublings: int = 10,
    tail_tol: float = 1e-12,
    limits: tuple[float, float] | None = None,
    boundary_lo: bool = False,
) -> float:
    """log of the integral of exp(log_f) over [lo, hi].

    The trapezoid grid is refined by halving the step until the log value
    stabilizes. When `limits` is given the window is first expanded until
    endpoint contributions fall below `tail_tol` of the total mass.
    boundary_lo marks the lower limit as a support boundary where the
    integrand may stay finite without the integral being truncated.
    """
    if limits is not None:
        lo, hi = _expand_window(log_f, lo, hi, limits, tail_tol, boundary_lo)

    xs = np.linspace(lo, hi, init_points)
    vals = _eval(log_f, xs)
    total = _log_trapz(vals, xs[1] - xs[0])
    for _ in range(max_doublings):
        mid = (xs[:-1] + xs[1:]) / 2.0
        new_xs = np.empty(xs.size + mid.size)
        new_vals = np.empty_like(new_xs)
        new_xs[0::2], new_xs[1::2] = xs, mid
        new_vals[0::2], new_vals[1::2] = vals, _eval(log_f, mid)
        xs, vals = new_xs, new_vals
        refined = _log_trapz(vals, xs[1] - xs[0])
        done = abs(refined - total) < abs_tol
        total = refined
        if done:
            break
    return total


def _expand_window(log_f, lo, hi, limits, tail_tol, boundary_lo=False):
    lim_lo, lim_hi = limits
    log_tail = math.log(tail_tol)
    for _ in range(200):
        xs = np.linspace(lo, hi, 129)
        vals = _eval(log_f, xs)
        step = xs[1] - xs[0]
        total = _log_trapz(vals, step)
        lo_heavy = vals[0] + math.log(step) - total > log_tail
        hi_heavy = vals[-1] + math.log(step) - total > log_tail
        width = hi - lo
        grew = False
        if lo_heavy and lo > lim_lo:
            lo = max(lim_lo, lo - 0.5 * width)
            grew = True
        if hi_heavy and hi < lim_hi:
            hi = min(lim_hi, hi + 0.5 * width)
            grew = True
        if not grew:
            if (lo_heavy and lo <= lim_lo and not boundary_lo) or (
                    hi_heavy and hi >= lim_hi):
                raise IntegrationFailure(
                    f"integrand tails do not decay within limits {limits}")
            return lo, hi
    raise IntegrationFailure("window expansion did not converge")


def default_window(positive: bool) -> tuple[float, float]:
    return POSITIVE_WINDOW if positive else REAL_WINDOW


def default_limits(positive: bool) -> tuple[float, float]:
    return POSITIVE_LIMIT if positive else REAL_LIMIT
