import itertools
import pytest
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from eulerpadic import pade
from eulerpadic.padic import LinearFormInstance
from eulerpadic.primes_ap import ResidueClassSet

alpha_sets = st.lists(st.integers(-4, 4).filter(bool), min_size=1, max_size=3, unique=True).map(tuple)


def test_sigma_examples():
    assert pade.sigma(1, (1, 2)).coeffs == (2, -3, 1)
    assert pade.sigma(2, (3,)).coeffs == (9, -6, 1)


@settings(max_examples=50)
@given(st.integers(1, 5), alpha_sets)
def test_sigma_product_and_multinomial_agree(n, alphas):
    assert pade.sigma(n, alphas).coeffs == pade.sigma_oracle(n, alphas).coeffs


def test_polynomial_examples():
    assert pade.build_B0(1, 1, (1,)) == [-1, 2]
    assert pade.build_B0(1, 0, (1,)) == [-1, 1]
    assert pade.build_Bj(1, 1, (1,), 1) == [-1, 1]
    assert pade.build_Bj(1, 0, (1,), 1) == [-1]


def test_remainder_examples():
    assert pade.remainder_prefix(1, 1, (1,), 1, 6) == [0, 0, 0, -2, -12, -72]
    assert pade.remainder_prefix(1, 0, (1,), 1, 4) == [0, 0, -1, -4]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), alpha_sets, st.data())
def test_order_of_contact_property(n, alphas, data):
    mu = data.draw(st.integers(0, len(alphas)))
    j = data.draw(st.integers(1, len(alphas)))
    assert pade.verify_order(n, mu, alphas, j)
    assert pade.B0_at_one(n, mu, alphas) == sum(pade.build_B0(n, mu, alphas))
    assert pade.Bj_at_one(n, mu, alphas, j) == sum(pade.build_Bj(n, mu, alphas, j))


def test_T_and_mu_selection():
    res = ResidueClassSet.all_reduced(3)
    vals = [pade.T_value(1, 1, LinearFormInstance(1, 3, lam, (1,), res)) for lam in ((1, 0), (0, 1), (1, 1))]
    assert vals == [1, 0, 1]
    assert pade.select_mu(1, LinearFormInstance(1, 3, (0, 1), (1,), res)) == 0


def test_coefficient_bounds_example():
    b = pade.coefficient_bounds(1, 1, (1,), 2)
    assert b.B0 == 4 and b.Bj == (Fraction(8),) and b.S_padic == Fraction(1, 2)


@pytest.mark.parametrize("p", [2, 3])
def test_S_valuation_meets_bound(p):
    for n, mu in itertools.product(range(1, 5), range(2)):
        e = pade.coefficient_bounds(n, mu, (2, -1), p).S_exponent
        assert pade.S_valuation(n, mu, (2, -1), 1, p, e + 4) >= e


def test_pade_system_bundle():
    sysm = pade.PadeSystem.build(2, 1, (1, -2))
    order = pade.order_of_contact(2, 1, 2)
    assert order == 7 and len(sysm.B0) == 2 * 2 + 1
    for S in sysm.S_prefix:
        assert not any(S[:order]) and len(S) == order + 2
