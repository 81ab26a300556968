"""Exact Padé-type approximations to F(alpha_j t) with a common denominator B0.

For parameters (k, n, mu, alphas) with K = kn:

    B0(t)   = sum_i sigma_i (K+mu)!/(i+mu)! t^(K-i)
    B_j(t)  = (K+mu)! sum_{N<K+mu} t^N sum_{h<=min(K,N)} sigma_{K-h} (N-h)!/(K+mu-h)! alpha_j^(N-h)
    S_j(t)  = B0(t) F(alpha_j t) - B_j(t) = O(t^((k+1)n+mu))

where sigma_i are the coefficients of prod_j (alpha_j - x)^n. Everything is
exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .padic import LinearFormInstance, eval_Fp, vp_factorial, vp_int


def _poly_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_eval(c: list, t) -> int:
    acc = 0
    for x in reversed(c):
        acc = acc * t + x
    return acc


@dataclass(frozen=True)
class SigmaVector:
    n: int
    alphas: tuple
    coeffs: tuple

    def __post_init__(self):
        k = len(self.alphas)
        if len(self.coeffs) != k * self.n + 1:
            raise ValueError("sigma vector has the wrong length")
        if self.coeffs[0] != math.prod(a**self.n for a in self.alphas):
            raise ValueError("sigma_0 must be prod alpha_j^n")
        if self.coeffs[-1] != (-1) ** (k * self.n):
            raise ValueError("leading sigma must be (-1)^(kn)")

    def __getitem__(self, i):
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)


def _check_args(n, alphas):
    if n < 1:
        raise ValueError("n must be positive")
    if not alphas:
        raise ValueError("need at least one alpha")
    if any(a == 0 for a in alphas):
        raise ValueError("alphas must be nonzero")


@lru_cache(maxsize=512)
def _sigma_cached(n: int, alphas: tuple) -> SigmaVector:
    poly = [1]
    for a in alphas:
        factor = [math.comb(n, i) * a ** (n - i) * (-1) ** i for i in range(n + 1)]
        poly = _poly_mul(poly, factor)
    return SigmaVector(n, alphas, tuple(poly))


def sigma(n: int, alphas) -> SigmaVector:
    """Coefficients of prod_j (alpha_j - x)^n by repeated polynomial multiplication."""
    alphas = tuple(int(a) for a in alphas)
    _check_args(n, alphas)
    return _sigma_cached(n, alphas)


def sigma_oracle(n: int, alphas) -> SigmaVector:
    """The same coefficients from the multinomial sum

    sigma_i = (-1)^i sum_{i_1+...+i_k=i} prod_j binom(n, i_j) alpha_j^(n-i_j).
    """
    alphas = tuple(int(a) for a in alphas)
    _check_args(n, alphas)
    k = len(alphas)
    coeffs = [0] * (k * n + 1)
    for idx in itertools.product(range(n + 1), repeat=k):
        term = 1
        for ij, a in zip(idx, alphas):
            term *= math.comb(n, ij) * a ** (n - ij)
        coeffs[sum(idx)] += term
    return SigmaVector(n, alphas, tuple((-1) ** i * c for i, c in enumerate(coeffs)))


def build_B0(n: int, mu: int, alphas) -> list:
    """Coefficients (index = power of t) of B0, degree kn."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    s = sigma(n, alphas)
    K = len(s) - 1
    top = math.factorial(K + mu)
    out = [0] * (K + 1)
    for i, si in enumerate(s.coeffs):
        out[K - i] = si * (top // math.factorial(i + mu))
    return out


def build_Bj(n: int, mu: int, alphas, j: int) -> list:
    """Coefficients of B_j (1-based j), degree kn + mu - 1, from the double sum over rationals."""
    alphas = tuple(int(a) for a in alphas)
    if not 1 <= j <= len(alphas):
        raise ValueError(f"j must be in 1..{len(alphas)}")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    s = sigma(n, alphas)
    K = len(s) - 1
    a = alphas[j - 1]
    top = math.factorial(K + mu)
    out = []
    for N in range(K + mu):
        acc = Fraction(0)
        for h in range(min(K, N) + 1):
            acc += Fraction(s[K - h] * math.factorial(N - h), math.factorial(K + mu - h)) * a ** (N - h)
        c = acc * top
        if c.denominator != 1:
            raise ArithmeticError(f"non-integral B_{j} coefficient at t^{N}: {c}")
        out.append(int(c))
    return out


def B0_at_one(n: int, mu: int, alphas) -> int:
    s = sigma(n, alphas)
    K = len(s) - 1
    top = math.factorial(K + mu)
    return sum(si * (top // math.factorial(i + mu)) for i, si in enumerate(s.coeffs))


def Bj_at_one(n: int, mu: int, alphas, j: int) -> int:
    """B_j(1) in O(kn) big-integer operations.

    Swapping the sums gives sum_h sigma_{K-h} (K+mu)!/(K+mu-h)! E(K+mu-1-h),
    with E(r) = sum_{u<=r} u! alpha_j^u.
    """
    alphas = tuple(int(x) for x in alphas)
    s = sigma(n, alphas)
    K = len(s) - 1
    a = alphas[j - 1]
    L = K + mu
    # E[r] for r = 0..L-1
    E, term, acc = [], 1, 0
    for u in range(L):
        if u:
            term *= u * a
        acc += term
        E.append(acc)
    total, ff = 0, 1  # ff = (K+mu)!/(K+mu-h)!
    for h in range(min(K, L - 1) + 1):
        if h:
            ff *= L - h + 1
        total += s[K - h] * ff * E[L - 1 - h]
    return total


def B_at_one(n: int, mu: int, alphas, i: int) -> int:
    """B_{n,mu,i}(1) with i = 0 meaning B0."""
    return B0_at_one(n, mu, alphas) if i == 0 else Bj_at_one(n, mu, alphas, i)


def order_of_contact(n: int, mu: int, k: int) -> int:
    return (k + 1) * n + mu


def _convolution_prefix(n, mu, alphas, j, L):
    B0 = build_B0(n, mu, alphas)
    Bj = build_Bj(n, mu, alphas, j)
    a = alphas[j - 1]
    f = [1]
    for N in range(1, L):
        f.append(f[-1] * N * a)
    out = []
    for N in range(L):
        c = sum(B0[d] * f[N - d] for d in range(min(N, len(B0) - 1) + 1))
        if N < len(Bj):
            c -= Bj[N]
        out.append(c)
    return out


def _direct_prefix(n, mu, alphas, j, L):
    s = sigma(n, alphas)
    K = len(s) - 1
    k = len(alphas)
    a = alphas[j - 1]
    start = order_of_contact(n, mu, k)
    scale = math.factorial(K + mu) * math.factorial(n)
    out = [0] * min(L, start)
    for h in range(max(0, L - start)):
        inner = sum(si * math.comb(i + mu + n + h, i + mu) * a**i for i, si in enumerate(s.coeffs))
        out.append(scale * math.factorial(h) * math.comb(n + h, h) * a ** (n + h + mu) * inner)
    return out


def remainder_prefix(n: int, mu: int, alphas, j: int, L: int) -> list:
    """First L coefficients of S_j(t), computed two independent ways that must agree."""
    if L < 1:
        raise ValueError("L must be positive")
    alphas = tuple(int(a) for a in alphas)
    conv = _convolution_prefix(n, mu, alphas, j, L)
    direct = _direct_prefix(n, mu, alphas, j, L)
    if conv != direct:
        bad = next(i for i in range(L) if conv[i] != direct[i])
        raise ArithmeticError(f"remainder mismatch at t^{bad}: {conv[bad]} vs {direct[bad]}")
    return direct


def verify_order(n: int, mu: int, alphas, j: int) -> bool:
    """True iff B0(t)F(alpha_j t) - B_j(t) vanishes to order (k+1)n + mu."""
    alphas = tuple(int(a) for a in alphas)
    L = order_of_contact(n, mu, len(alphas))
    return all(c == 0 for c in _convolution_prefix(n, mu, alphas, j, L))


@dataclass(frozen=True)
class PadeSystem:
    k: int
    n: int
    mu: int
    alphas: tuple
    B0: tuple
    Bj: tuple
    S_prefix: tuple

    @classmethod
    def build(cls, n: int, mu: int, alphas, L: int | None = None) -> "PadeSystem":
        alphas = tuple(int(a) for a in alphas)
        k = len(alphas)
        L = order_of_contact(n, mu, k) + 2 if L is None else L
        return cls(
            k, n, mu, alphas,
            tuple(build_B0(n, mu, alphas)),
            tuple(tuple(build_Bj(n, mu, alphas, j)) for j in range(1, k + 1)),
            tuple(tuple(remainder_prefix(n, mu, alphas, j, L)) for j in range(1, k + 1)),
        )


def T_value(n: int, mu: int, inst: LinearFormInstance) -> int:
    """lambda_0 B0(1) + sum_j lambda_j B_j(1)."""
    if not 0 <= mu <= inst.k:
        raise ValueError(f"mu must be in 0..{inst.k}")
    total = inst.lambdas[0] * B0_at_one(n, mu, inst.alphas) if inst.lambdas[0] else 0
    for j, lam in enumerate(inst.lambdas[1:], start=1):
        if lam:
            total += lam * Bj_at_one(n, mu, inst.alphas, j)
    return total


def select_mu(n: int, inst: LinearFormInstance) -> int:
    """Smallest mu in 0..k with T(n+1, mu) != 0."""
    if n < 1:
        raise ValueError("n must be positive")
    for mu in range(inst.k + 1):
        if T_value(n + 1, mu, inst) != 0:
            return mu
    raise ValueError(f"mu-selection failed at n={n}: T(n+1, mu) = 0 for every mu in 0..{inst.k}")


def sigma_abs_bound(n: int, alphas, t) -> Fraction:
    """prod_i (|alpha_i| + t)^n, the majorant of sum_i |sigma_i| t^i."""
    return Fraction(math.prod((abs(a) + Fraction(t)) ** n for a in alphas))


def sigma_abs_sum(n: int, alphas, t) -> Fraction:
    t = Fraction(t)
    return sum((abs(c) * t**i for i, c in enumerate(sigma(n, alphas).coeffs)), Fraction(0))


@dataclass(frozen=True)
class CoefficientBounds:
    B0: int
    Bj: tuple  # one Fraction per j (a Fraction because |alpha_j|^(mu-1) may be 1/|alpha_j|)
    S_padic: Fraction | None  # upper bound for |S_j(1)|_p, the same for every j
    S_exponent: int | None  # that bound is p^(-S_exponent)


def coefficient_bounds(n: int, mu: int, alphas, p: int | None = None) -> CoefficientBounds:
    alphas = tuple(int(a) for a in alphas)
    k = len(alphas)
    K = k * n
    b0 = math.factorial(K) * math.comb(K + mu, mu) * math.prod((abs(a) + 1) ** n for a in alphas)
    bj = []
    for aj in alphas:
        base = math.factorial(K + mu) * (K + mu) * math.prod((abs(a) + abs(aj)) ** n for a in alphas)
        bj.append(Fraction(base) * Fraction(abs(aj)) ** (mu - 1))
    sp = se = None
    if p is not None:
        min_v = min(vp_int(a, p) for a in alphas)
        se = vp_factorial(K + mu, p) + vp_factorial(n, p) + (k + 1) * n * min_v
        sp = Fraction(1, p**se)
    return CoefficientBounds(b0, tuple(bj), sp, se)


def S_at_one_padic(n: int, mu: int, alphas, j: int, p: int, M: int) -> int:
    """S_j(1) = B0(1) F_p(alpha_j) - B_j(1) modulo p^M (an exact p-adic residue)."""
    alphas = tuple(int(a) for a in alphas)
    mod = p**M
    f = eval_Fp(alphas[j - 1], p, M).residue
    return (B0_at_one(n, mu, alphas) * f - Bj_at_one(n, mu, alphas, j)) % mod


def S_valuation(n: int, mu: int, alphas, j: int, p: int, M: int) -> int:
    """v_p(S_j(1)) if it is below M, else M (meaning at least M)."""
    r = S_at_one_padic(n, mu, alphas, j, p, M)
    return M if r == 0 else vp_int(r, p)
