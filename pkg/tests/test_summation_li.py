import math
import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from eulerpadic._mp import mp
from eulerpadic.li import li, li_on_integers
from eulerpadic.primes_ap import corrected_logs
from eulerpadic.sieve import simple_sieve
from eulerpadic.summation import ExactPrefix, TrackedReal


@settings(max_examples=30)
@given(st.lists(st.floats(0, 1e4, allow_nan=False), min_size=1, max_size=200))
def test_prefix_sums_exact_within_radius(values):
    arr = np.array(values)
    pre = ExactPrefix(arr, 0.0)
    exact = sum((Fraction(v) for v in values), Fraction(0))
    got = pre.tracked(len(values))
    assert abs(Fraction(str(got.value)) - exact) <= Fraction(got.radius) + Fraction(1, 10**30)
    assert abs(pre.floats[-1] - float(exact)) <= pre.radius[-1]


def test_prefix_rejects_out_of_range():
    with pytest.raises(ValueError):
        ExactPrefix(np.array([-1.0]), 0.0)


def test_tracked_real_contains():
    t = TrackedReal(mp.mpf(1), 1e-10)
    assert t.contains(1 + 5e-11) and not t.contains(1.001)


def ld_to_mpf(x):
    # a long double is exactly the sum of two float64 pieces
    head = float(x)
    return mp.mpf(head) + mp.mpf(float(x - np.longdouble(head)))


def test_corrected_logs_against_mpmath():
    primes = simple_sieve(10**6)[-2000:]
    hi, lo, err = corrected_logs(primes)
    worst = 0.0
    for p, h, l, e in zip(primes, hi, lo, err):
        true = mp.log(int(p))
        approx = ld_to_mpf(h) + ld_to_mpf(l)
        worst = max(worst, float(abs(true - approx) / e))
    assert worst <= 1.0


def test_log_sum_accuracy_per_million_terms():
    primes = simple_sieve(2 * 10**5)
    hi, lo, err = corrected_logs(primes)
    pre = ExactPrefix(hi, err, lo)
    true = mp.fsum(mp.log(int(p)) for p in primes)
    got = pre.tracked(len(primes))
    assert got.contains(true)
    assert got.radius <= 2.0**-40 * len(primes) / 1e6


@pytest.mark.parametrize("x", [3, 10, 1865, 10**6, 10**8 + 0.5])
def test_li_against_mpmath(x):
    ref = mp.li(x) - mp.li(2)
    assert abs(li(x) - ref) <= mp.mpf("1e-12") * (1 + x / 1e6)


def test_li_domain():
    with pytest.raises(ValueError):
        li(1.5)
    assert li(2) == 0


def test_li_on_integers_radius():
    vals, rad = li_on_integers(1865, 3000)
    for x in (1865, 1900, 2500, 3000):
        ref = float(mp.li(x) - mp.li(2))
        assert abs(vals[x - 1865] - ref) <= rad[x - 1865]
    assert rad.max() < 1e-9
