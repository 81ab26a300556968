import math
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from eulerpadic import bounds
from eulerpadic._mp import mp
from eulerpadic.padic import LinearFormInstance
from eulerpadic.primes_ap import ResidueClassSet


def test_c_constants_examples():
    assert bounds.c_constants((2,), [2, 3], 3).c2 == 1
    c = bounds.c_constants((1, 2), [2, 3], 3)
    assert c.c1 == c.c2 == 16
    assert bounds.DerivedConstants.from_dict(c.to_dict()) == c


def test_cUpper_rhs_value():
    assert abs(bounds.cUpper_log_rhs(1, 3) - mp.mpf("-16.297224577")) < 1e-8


def test_example_instance_minimal():
    inst = bounds.example_instance(1, 3)
    assert inst.alphas == (23923507,)
    consts = bounds.constants_for(inst)
    assert consts.c2 == Fraction(2, 23923507) and consts.cUpper_holds


def test_example_instance_budget():
    with pytest.raises(bounds.BudgetExceeded):
        bounds.example_instance(1, 5, budget=10**6)


@pytest.fixture(scope="module")
def desk():
    inst = bounds.example_instance(1, 3, lower=10**12)
    return inst, bounds.constants_for(inst)


def test_desk_constants(desk):
    inst, consts = desk
    assert inst.alphas == (1000000000039,)
    assert abs(consts.D - mp.mpf("10.6406493580714")) < 1e-12


@pytest.mark.parametrize("logH,n", [(10**6, 102788), (10**5, 10525), (200, 30)])
def test_N1_thresholds(desk, logH, n):
    inst, consts = desk
    assert bounds.n_threshold_N1(inst, consts, mp.mpf(logH)) == n


def test_N1_threshold_is_exact(desk):
    inst, consts = desk
    logH = mp.mpf(10**5)
    n = bounds.n_threshold_N1(inst, consts, logH)
    assert bounds.N1(n, inst, consts, logH) >= 0 > bounds.N1(n + 1, inst, consts, logH)


def test_minimal_instance_is_out_of_range():
    inst = bounds.example_instance(1, 3)
    consts = bounds.constants_for(inst)
    with pytest.raises(bounds.ThresholdOutOfRange):
        bounds.n_threshold_N1(inst, consts, mp.mpf(10**6))


def test_N2_threshold_with_high_precision(desk):
    inst, consts = desk
    logH = mp.mpf(10**5)
    n = bounds.n_threshold_N2(inst, consts.c1, 0.5, logH)
    assert n is not None and n > 2**200
    assert bounds.N2(n, inst, consts.c1, 0.5, logH) >= 0 > bounds.N2(n + 1, inst, consts.c1, 0.5, logH)


def test_find_threshold_edges():
    assert bounds.find_n_threshold(lambda a: 10 - a) == 10
    assert bounds.find_n_threshold(lambda a: 3 - a) == 3
    assert bounds.find_n_threshold(lambda a: -1) is None
    # an isolated positive point within the guard distance is found
    assert bounds.find_n_threshold(lambda a: 1 if a <= 100 or a == 120 else -1) == 120
    with pytest.raises(bounds.ThresholdOutOfRange):
        bounds.find_n_threshold(lambda a: 1, a_max=1 << 20)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10**9))
def test_find_threshold_linear(T):
    assert bounds.find_n_threshold(lambda a: T - a) == T


def test_hypothesis_report(desk):
    inst, consts = desk
    rep = bounds.check_H_hypotheses(inst, consts, mp.mpf(10**5), 0.5, 1866)
    assert rep["cUpper"].holds
    assert set(rep.flags) >= {"cUpper", "BoundH"}
    assert bounds.HypothesisReport.from_dict(rep.to_dict()).flags == rep.flags


def test_upper_bounds_are_labelled(desk):
    inst, consts = desk
    ubs = bounds.n_upper_bounds(inst, consts, mp.mpf(10**5), 0.5, n=10525)
    assert ubs and all(isinstance(u.name, str) for u in ubs)


def test_exponent_constants():
    assert abs(bounds.theorem3_tail(1) - mp.mpf("1.284")) < 1e-20
    assert abs(bounds.corollary_coefficient(1) - mp.mpf("0.7308")) < 1e-20
    with pytest.raises(ValueError):
        bounds.theorem5_exponent(1, 0.5, 10**6, branch=2)
    lo, hi = bounds.theorem5_window(2, 0.5, 1000)
    assert 0 < lo < hi


@settings(max_examples=200)
@given(st.floats(1, 1000), st.floats(1, 1000), st.floats(0, 50))
def test_xex_lemma(x, y, slack):
    logH = mp.mpf(x) * mp.exp(mp.mpf(y) / x) + x + slack
    premise, conclusion = bounds.xex_evaluate(logH, x, y)
    # at slack 0 the premise is an equality and may round either way
    assert conclusion and (premise or slack < 1e-9)


def test_xex_premise_failure():
    premise, _ = bounds.xex_evaluate(5, 10, 10)
    assert not premise
