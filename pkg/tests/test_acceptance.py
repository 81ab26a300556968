"""Acceptance suite: one PASS/FAIL line per criterion (see the terminal summary)."""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from eulerpadic import bounds, certifier, pade, primes_ap
from eulerpadic._mp import mp
from eulerpadic.padic import LinearFormInstance, eval_Fp, vp_factorial, vp_int
from eulerpadic.primes_ap import ResidueClassSet
from eulerpadic.sieve import simple_sieve

ALPHA_POOL = (1, -1, 2, -2, 3)


def pade_grid():
    for k in (1, 2, 3):
        for alphas in itertools.combinations(ALPHA_POOL, k):
            for n in range(1, 7):
                for mu in range(k + 1):
                    yield alphas, n, mu


def test_pade_order_on_grid(report):
    t0 = time.perf_counter()
    checks = failures = 0
    for alphas, n, mu in pade_grid():
        for j in range(1, len(alphas) + 1):
            checks += 1
            failures += not pade.verify_order(n, mu, alphas, j)
            # the fast B_j(1) agrees with the full polynomial
            failures += pade.Bj_at_one(n, mu, alphas, j) != sum(pade.build_Bj(n, mu, alphas, j))
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 60
    report(1, ok, f"{checks} order checks, {failures} failures, {dt:.1f}s")
    assert ok


def test_worked_remainder(report):
    B0 = pade.build_B0(1, 1, (1,))
    B1 = pade.build_Bj(1, 1, (1,), 1)
    S = pade.remainder_prefix(1, 1, (1,), 1, 4)
    ok = B0 == [-1, 2] and B1 == [-1, 1] and S == [0, 0, 0, -2]
    report(2, ok, f"B0={B0} B1={B1} S[:4]={S}")
    assert ok


def test_coefficient_bound_suites(report):
    t0 = time.perf_counter()
    checks = failures = 0
    ts = (Fraction(0), Fraction(1), Fraction(2), Fraction(7, 2))
    for alphas in {a for a, _, _ in pade_grid()}:
        for n in range(1, 7):
            for t in ts:
                checks += 1
                failures += pade.sigma_abs_sum(n, alphas, t) > pade.sigma_abs_bound(n, alphas, t)
    for alphas, n, mu in pade_grid():
        b = pade.coefficient_bounds(n, mu, alphas)
        checks += 1
        failures += abs(pade.B0_at_one(n, mu, alphas)) > b.B0
        for j in range(1, len(alphas) + 1):
            checks += 1
            failures += abs(pade.Bj_at_one(n, mu, alphas, j)) > b.Bj[j - 1]
        for p in (2, 3, 5, 7):
            e = pade.coefficient_bounds(n, mu, alphas, p).S_exponent
            for j in range(1, len(alphas) + 1):
                checks += 1
                # |S_j(1)|_p <= p^-e  <=>  S_j(1) = 0 mod p^e
                failures += e > 0 and pade.S_at_one_padic(n, mu, alphas, j, p, e) != 0
    dt = time.perf_counter() - t0
    report(3, failures == 0, f"{checks} exact bound checks, {failures} failures, {dt:.1f}s")
    assert failures == 0


@pytest.mark.slow
def test_sieve_range_estimates(report):
    t0 = time.perf_counter()
    table = primes_ap.SieveTable(10**7)
    n_checked = bad = 0
    worst_margin, worst_radius = math.inf, 0.0
    for m in range(3, 8):
        for s in primes_ap.scan_margins(table, m, x_hi=10**7):
            n_checked += s.n_checked
            bad += s.n_violations + s.n_uncertified
            worst_margin = min(worst_margin, s.min_margin)
            worst_radius = max(worst_radius, s.max_radius)
    dt = time.perf_counter() - t0
    ok = bad == 0 and worst_radius < 1e-6 and dt < 600
    report(4, ok, f"{n_checked} margins, min {worst_margin:.4f}, max radius {worst_radius:.2e}, {dt:.0f}s "
                  "(in-range only; full-strength claims not reproducible)")
    assert ok


def test_phi_exceptions_and_rosser_schoenfeld(report):
    exceptions = primes_ap.phi_lower_check(10**5)
    margin, argmin = primes_ap.rosser_schoenfeld_scan(10**5)
    ok = exceptions == [3, 4, 6, 8, 10, 12, 14, 18, 20, 24, 30, 36, 42, 60] and margin > 0
    report(5, ok, f"exceptions {exceptions}; min margin {mp.nstr(margin, 6)} at m={argmin}")
    assert ok


def test_padic_evaluation(report):
    base = eval_Fp(1, 2, 2).residue
    rng = random.Random(6)
    primes = [int(p) for p in simple_sieve(60)]
    trunc_fail = 0
    for _ in range(1000):
        p = rng.choice(primes)
        m1 = rng.randint(1, 6)
        m2 = rng.randint(m1 + 1, 10)
        t = rng.randint(-10**6, 10**6)
        trunc_fail += eval_Fp(t, p, m2).residue % p**m1 != eval_Fp(t, p, m1).residue
    leg_fail = 0
    for p in simple_sieve(100):
        p = int(p)
        brute = 0
        for n in range(1, 2001):
            brute += vp_int(n, p)
            leg_fail += vp_factorial(n, p) != brute
    ok = base == 2 and trunc_fail == 0 and leg_fail == 0
    report(6, ok, f"F_2(1) mod 4 = {base}; truncation mismatches {trunc_fail}/1000; Legendre mismatches {leg_fail}")
    assert ok


def test_certificate_search(report):
    inst = LinearFormInstance(1, 3, (0, 1), (1,), ResidueClassSet.all_reduced(3))
    t0 = time.perf_counter()
    cert = certifier.search_nonvanishing(inst, 50)
    rechecked = cert.recheck()
    dt = time.perf_counter() - t0
    ok = rechecked and cert.p <= 50 and dt < 5
    report(7, ok, f"certificate p={cert.p} M={cert.M} v={cert.valuation}, recheck {rechecked}, {dt:.3f}s")
    assert ok


def test_contradiction_turnover(report):
    inst = LinearFormInstance(1, 3, (0, 1), (1,), ResidueClassSet.all_reduced(3))
    runs = [certifier.contradiction_scan(inst, 200) for _ in range(2)]
    ns = [r.n if r else None for r in runs]
    ok = ns[0] is not None and ns[0] == ns[1] == 3 and runs[0].product < 1 and runs[0].product == runs[1].product
    report(8, ok, f"turnover n={ns[0]} (reruns {ns}), product {runs[0].product if runs[0] else None}")
    assert ok


# synthetic N functions: each is an array of values on [0, TOP] and -1 above
TOP = 10**6


def synthetic_battery():
    """(values, tail_start): N(a) = values[a] on [0, TOP], -1 above.

    tail_start is a coarse certificate that N < 0 on [tail_start, inf); it is
    a valid bound but deliberately not the threshold itself.
    """
    a = np.arange(TOP + 1, dtype=np.float64)
    rng = np.random.default_rng(9)
    out = []
    for T in (3, 4, 5, 17, 1000, 4096, 65537, 999_999, 10**6):
        out.append(T - a)
    out.append(np.sqrt(5000.0) - np.sqrt(a))
    out.append(12.0 - np.log(np.maximum(a, 1)))
    out.append((a - 5) * (70_000 - a))  # negative at the starting point
    out.append(-1 - a)  # nowhere nonnegative
    out.append(np.where(a == 2, 0.0, -1.0))  # only a_min
    for _ in range(10):
        # a plateau ending at T, with holes narrower than the guard
        T = int(rng.integers(1000, TOP))
        v = np.where(a <= T, 1.0, -1.0)
        for start in range(int(rng.integers(5, 200)), T - 100, int(rng.integers(150, 5000))):
            v[start:start + int(rng.integers(1, 60))] = -1.0
        out.append(v)
    for T in (50, 3000, 777_777):
        # isolated nonnegative points past the first sign change, each within the guard
        v = T - a
        for step in (13, 40, 63):
            T += step
            v[T] = 0.0
        out.append(v)
    battery = []
    for v in out:
        ans = exhaustive_threshold(v)
        slack = int(rng.integers(1, 10**5))
        battery.append((v, (ans or 1) + slack))
    return battery


def exhaustive_threshold(v):
    idx = np.nonzero(v[2:] >= 0)[0]
    return int(idx[-1]) + 2 if len(idx) else None


def test_threshold_search(report):
    battery = synthetic_battery()
    mismatches = 0
    for v, tail_start in battery:
        def N(x, v=v):
            return float(v[x]) if x <= TOP else -1.0

        found = bounds.find_n_threshold(N, tail_ok=lambda x, c=tail_start: x >= c)
        mismatches += found != exhaustive_threshold(v)
    ok = len(battery) >= 20 and mismatches == 0
    report(9, ok, f"{len(battery)} synthetic functions, {mismatches} mismatches")
    assert ok


def _poly_from_exponent(k, eps, logH, branch):
    c = bounds.THEOREM5_K2 if branch == 2 else bounds.THEOREM5_K1
    e = bounds.theorem5_exponent(k, eps, logH, branch)
    logH = mp.mpf(logH)
    return (e - (k / mp.mpf(eps) + 1)) * eps * mp.log(logH) / mp.log(mp.log(c[5] * logH))


def _recover_branch_constants(branch):
    # P(k, eps) = (A k^2 + B k)/eps + C k^2 + D k + E; separate the 1/eps part, then fit in k
    ks = (1, 2, 3) if branch == 1 else (2, 3, 4)
    diff = [(_poly_from_exponent(k, mp.mpf(1) / 2, 10**6, branch) - _poly_from_exponent(k, 1, 10**6, branch)) for k in ks]
    # diff(k) = A k^2 + B k
    M = mp.matrix([[k * k, k] for k in ks[:2]])
    A, B = mp.lu_solve(M, mp.matrix(diff[:2]))
    resid = abs(A * ks[2] ** 2 + B * ks[2] - diff[2])
    return A, B, resid


def test_hypothesis_scale_honesty(report):
    tail = bounds.theorem3_tail(1)
    coef = bounds.corollary_coefficient(1)
    A1, B1, r1 = _recover_branch_constants(1)
    A2, B2, r2 = _recover_branch_constants(2)
    tol = mp.mpf("1e-25")
    consts_ok = (
        abs(tail - mp.mpf("1.284")) < tol
        and abs(coef - mp.mpf("0.7308")) < tol
        and abs(A1 - mp.mpf("197.444")) < tol and abs(B1 - mp.mpf("210.438")) < tol
        and abs(A2 - mp.mpf("97.932")) < tol and abs(B2 - mp.mpf("104.377")) < tol
        and r1 < tol and r2 < tol
    )
    rng = random.Random(10)
    xex_fail = 0
    for _ in range(10**4):
        x = mp.mpf(rng.uniform(1, 1000))
        y = mp.mpf(rng.uniform(1, 1000))
        logH = x * mp.exp(y / x) + x
        _, conclusion = bounds.xex_evaluate(logH, x, y)
        xex_fail += not conclusion
    # the full-scale example instance is honestly reported as out of reach
    inst = bounds.example_instance(1, 3)
    rep = certifier.theorem3_pipeline(inst, mp.mpf(10) ** 70)
    ok = consts_ok and xex_fail == 0 and rep.status == "hypothesis-scale"
    report(10, ok, f"tail {mp.nstr(tail, 6)}, coef {mp.nstr(coef, 6)}, branches "
                   f"{mp.nstr(A1, 7)}/{mp.nstr(B1, 7)} {mp.nstr(A2, 7)}/{mp.nstr(B2, 7)}; "
                   f"xex failures {xex_fail}/10000; full-scale status '{rep.status}' (not reproducible)")
    assert ok
