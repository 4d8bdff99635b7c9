"""Scalar maximization helpers shared by the attack and sweep modules."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f: Callable[[float], float], a: float, b: float,
               tol: float = 1e-10, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section search for the maximum of f on [a, b].

    Assumes f is unimodal on the bracket; on multimodal functions it
    converges to some local maximum, which is why callers first locate the
    best cell of a dense grid. Returns (x, f(x)).
    """
    if b < a:
        a, b = b, a
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def grid_then_golden_max(f_grid: Callable[[np.ndarray], np.ndarray],
                         f_scalar: Callable[[float], float],
                         lo: float, hi: float, points: int,
                         log_spaced: bool = False,
                         tol: float = 1e-10) -> tuple[float, float]:
    """Dense-grid scan followed by golden-section refinement of the best cell.

    f_grid evaluates the objective on an array (may return -inf for invalid
    points); f_scalar evaluates a single point. The best of {grid optimum,
    refined optimum, both interval endpoints} is returned, so exact endpoint
    optima are never lost to the local search.
    """
    if hi < lo:
        raise ValueError("empty search interval")
    if hi == lo or points < 2:
        return lo, f_scalar(lo)
    if log_spaced:
        if lo <= 0:
            raise ValueError("log-spaced grid needs lo > 0")
        xs = np.logspace(math.log10(lo), math.log10(hi), points)
        xs[0], xs[-1] = lo, hi
    else:
        xs = np.linspace(lo, hi, points)
    values = np.asarray(f_grid(xs), dtype=float)
    k = int(np.nanargmax(values))
    bracket_lo = xs[max(k - 1, 0)]
    bracket_hi = xs[min(k + 1, points - 1)]
    x_ref, v_ref = golden_max(f_scalar, float(bracket_lo), float(bracket_hi), tol=tol)

    candidates = [(float(xs[k]), float(values[k])), (x_ref, v_ref)]
    for edge in (lo, hi):
        candidates.append((edge, f_scalar(edge)))
    best = max(candidates, key=lambda pair: pair[1] if math.isfinite(pair[1]) else -math.inf)
    return best
