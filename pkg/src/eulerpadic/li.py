"""Offset logarithmic integral Li(x) = int_2^x dt / log t.

Scalar evaluation uses composite Gauss-Legendre on dyadic panels at 128-bit
precision, refining by halving every panel until two levels agree. The
vectorised table for integer arguments integrates unit intervals in float64
and accumulates them exactly (see summation.ExactPrefix).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from ._mp import mp
from .summation import U64, ExactPrefix

GL_POINTS = 20
_TABLE_POINTS = 8
_MAX_LEVEL = 10


@lru_cache(maxsize=8)
def gauss_legendre(npts: int, prec: int = 160):
    """Nodes and weights on [-1, 1], computed by Newton iteration on P_n."""
    ctx = mp.clone()
    ctx.prec = prec
    nodes = []
    for i in range(1, npts + 1):
        x = ctx.cos(ctx.pi * (i - ctx.mpf(1) / 4) / (npts + ctx.mpf(1) / 2))
        for _ in range(100):
            p0, p1 = ctx.one, x
            for k in range(2, npts + 1):
                p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
            dp = npts * (x * p1 - p0) / (x * x - 1)
            dx = p1 / dp
            x -= dx
            if abs(dx) < ctx.ldexp(1, -prec + 8):
                break
        p0, p1 = ctx.one, x
        for k in range(2, npts + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = npts * (x * p1 - p0) / (x * x - 1)
        w = 2 / ((1 - x * x) * dp * dp)
        nodes.append((mp.mpf(x), mp.mpf(w)))
    return tuple(nodes)


def _panel_sum(edges, level, rule):
    total = mp.zero
    parts = 1 << level
    for a, b in zip(edges[:-1], edges[1:]):
        h = (b - a) / parts
        for j in range(parts):
            lo = a + j * h
            half = h / 2
            mid = lo + half
            total += half * mp.fsum(w / mp.log(mid + half * x) for x, w in rule)
    return total


def li(x, tol=None):
    """Li(x) for real x >= 2 as an mpf.

    The refinement stops once consecutive levels differ by less than ``tol``
    (default 1e-30 * max(1, Li(x))), well inside 1e-12 * (1 + x/1e6).
    """
    x = mp.mpf(x)
    if x < 2:
        raise ValueError(f"Li(x) is defined here for x >= 2, got {x}")
    if x == 2:
        return mp.zero
    edges = [mp.mpf(2)]
    while edges[-1] * 2 < x:
        edges.append(edges[-1] * 2)
    edges.append(x)
    rule = gauss_legendre(GL_POINTS)
    prev = _panel_sum(edges, 0, rule)
    for level in range(1, _MAX_LEVEL + 1):
        cur = _panel_sum(edges, level, rule)
        bound = tol if tol is not None else mp.mpf("1e-30") * max(1, abs(cur))
        if abs(cur - prev) <= bound:
            return cur
        prev = cur
    raise ArithmeticError(f"Li quadrature did not settle at x={x}")


_GL_ERR_CONST = math.factorial(_TABLE_POINTS) ** 4 / (
    (2 * _TABLE_POINTS + 1) * math.factorial(2 * _TABLE_POINTS) ** 3
)


def _unit_truncation_bound(t: np.ndarray) -> np.ndarray:
    # Cauchy estimate for the 2n-th derivative of 1/log on a disc of radius
    # 0.9(t-1) about t, where |log z| >= log(0.1 t + 0.9).
    r = 0.9 * (t - 1.0)
    deriv = math.factorial(2 * _TABLE_POINTS) / r ** (2 * _TABLE_POINTS) / np.log(0.1 * t + 0.9)
    return _GL_ERR_CONST * deriv


def li_on_integers(lo: int, hi: int):
    """Li(x) for every integer x in [lo, hi] (lo >= 2).

    Returns (values, radius) float64 arrays; ``radius`` bounds the absolute
    error of each entry.
    """
    if lo < 2 or hi < lo:
        raise ValueError("need 2 <= lo <= hi")
    nodes, weights = np.polynomial.legendre.leggauss(_TABLE_POINTS)
    starts = np.arange(lo, hi, dtype=np.float64)
    acc = np.zeros_like(starts)
    for x, w in zip(nodes, weights):
        acc += w / np.log(starts + 0.5 + 0.5 * x)
    unit = 0.5 * acc
    # rounding in the node sums, plus quadrature truncation per unit interval
    unit_err = 4 * _TABLE_POINTS * U64 * unit + _unit_truncation_bound(starts)
    prefix = ExactPrefix(unit, unit_err)
    base = li(lo)
    base_f = float(base)
    base_err = abs(float(base - base_f))
    values = base_f + prefix.floats
    radius = prefix.radius + base_err + 2 * U64 * np.abs(values)
    return values, radius
