"""Error-tracked prefix sums.

Each nonnegative term is split into three integer limbs (scale 2^-72) and the
limbs are summed in int64, so the prefix sums of the *quantised* terms are
exact. The only error left is the per-term input error supplied by the caller
plus at most four roundings of 2^-73 per term; both go into a radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._mp import mp

U64 = float(np.finfo(np.float64).eps) / 2  # unit roundoff of float64
_QUANT = 2.0**-73
_S0, _S1, _S2 = 24, 32, 16  # limb widths; 24 + 32 + 16 = 72


@dataclass(frozen=True)
class TrackedReal:
    """A high-precision value with a rigorous absolute error radius."""

    value: object  # mpf
    radius: float

    def __float__(self) -> float:
        return float(self.value)

    def contains(self, x) -> bool:
        return abs(mp.mpf(x) - self.value) <= self.radius


def _add_small(l1, l2, small):
    # small parts go in as integers at scale 2^-72, carried into limbs 1 and 2
    q = np.rint(np.ldexp(np.asarray(small, dtype=np.float64), _S0 + _S1 + _S2)).astype(np.int64)
    l1 += q >> _S2
    l2 += q & ((1 << _S2) - 1)


def _limbs(values: np.ndarray, low=None):
    """Fixed-point limbs of values (+ low); all float64 steps below are exact."""
    v = np.asarray(values)
    head = v.astype(np.float64)
    if np.any(head < 0) or np.any(head >= 2.0**31):
        raise ValueError("limb quantisation expects terms in [0, 2^31)")
    s0 = head * 2.0**_S0
    f0 = np.floor(s0)
    s1 = (s0 - f0) * 2.0**_S1
    f1 = np.floor(s1)
    l0 = f0.astype(np.int64)
    l1 = f1.astype(np.int64)
    l2 = np.rint((s1 - f1) * 2.0**_S2).astype(np.int64)
    if v.dtype == np.longdouble:
        # v - head is exact and has at most 11 significant bits
        _add_small(l1, l2, (v - head).astype(np.float64))
    if low is not None:
        low = np.asarray(low)
        lh = low.astype(np.float64)
        _add_small(l1, l2, lh)
        if low.dtype == np.longdouble:
            _add_small(l1, l2, (low - lh).astype(np.float64))
    if len(l0) and int(l0.max()) * len(l0) >= 1 << 62:
        raise OverflowError("prefix sums would overflow int64")
    return l0, l1, l2


class ExactPrefix:
    """Prefix sums P[i] = sum(terms[:i]) with exact integer accumulation.

    ``term_err`` bounds |terms[i] + low[i] - true_term[i]| elementwise (float64);
    ``low`` is an optional array of corrections far below one ulp of ``terms``.
    """

    def __init__(self, terms: np.ndarray, term_err: np.ndarray | float, low=None):
        n = len(terms)
        l0, l1, l2 = _limbs(terms, low)
        self._c0 = np.zeros(n + 1, dtype=np.int64)
        self._c1 = np.zeros(n + 1, dtype=np.int64)
        self._c2 = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(l0, out=self._c0[1:])
        np.cumsum(l1, out=self._c1[1:])
        np.cumsum(l2, out=self._c2[1:])
        err = np.broadcast_to(np.asarray(term_err, dtype=np.float64), (n,)) + 4 * _QUANT
        rad = np.zeros(n + 1)
        np.cumsum(err, out=rad[1:])
        # float cumsum of tiny positive bounds; inflate to cover its own rounding
        rad *= 1.0 + (n + 1) * 2 * U64
        f = (
            np.ldexp(self._c0.astype(np.float64), -_S0)
            + np.ldexp(self._c1.astype(np.float64), -(_S0 + _S1))
            + np.ldexp(self._c2.astype(np.float64), -(_S0 + _S1 + _S2))
        )
        self.floats = f
        self.exact_radius = rad
        self.radius = rad + 3 * U64 * np.abs(f)

    def __len__(self) -> int:
        return len(self._c0) - 1

    def exact(self, count: int):
        """mpf equal to the quantised prefix sum of the first ``count`` terms."""
        num = (int(self._c0[count]) << (_S1 + _S2)) + (int(self._c1[count]) << _S2) + int(self._c2[count])
        return mp.ldexp(mp.mpf(num), -(_S0 + _S1 + _S2))

    def tracked(self, count: int) -> TrackedReal:
        return TrackedReal(self.exact(count), float(self.exact_radius[count]))
