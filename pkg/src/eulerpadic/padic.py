"""Exact p-adic arithmetic for Euler's factorial series F(t) = sum n! t^n.

Values are residues modulo p^M. Because v_p(n!) grows without bound, the
series has only finitely many terms that survive modulo p^M, so every value
returned here is the exact p-adic quantity reduced mod p^M.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .primes_ap import ResidueClassSet
from .sieve import is_prime


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def vp_int(n: int, p: int) -> int:
    """Exponent of p in the nonzero integer n."""
    if n == 0:
        raise ValueError("infinite valuation: v_p(0) is undefined")
    n = abs(n)
    v = 0
    # strip p^(2^i) blocks first so huge valuations cost O(log v) divisions
    powers = [p]
    while n % (powers[-1] ** 2) == 0:
        powers.append(powers[-1] ** 2)
    for i in range(len(powers) - 1, -1, -1):
        while n % powers[i] == 0:
            n //= powers[i]
            v += 1 << i
    return v


def vp_factorial(n: int, p: int) -> int:
    """v_p(n!) by Legendre's formula."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    v = 0
    while n:
        n //= p
        v += n
    return v


def factorial_tail_cutoff(p: int, M: int) -> int:
    """Smallest N with v_p(N!) >= M."""
    if M < 1:
        raise ValueError("M must be positive")
    # v_p(N!) <= N/(p-1) < M below M(p-1); v_p((Mp)!) >= M
    lo, hi = M * (p - 1), M * p
    while vp_factorial(hi, p) < M:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if vp_factorial(mid, p) >= M:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class PadicApprox:
    """An element of Z_p known modulo p^M.

    ``valuation == M`` means the residue is zero and the valuation is only
    known to be at least M.
    """

    p: int
    M: int
    residue: int
    valuation: int = -1

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        mod = self.p**self.M
        r = self.residue % mod
        object.__setattr__(self, "residue", r)
        v = self.M if r == 0 else vp_int(r, self.p)
        if self.valuation not in (-1, v):
            raise ValueError(f"valuation {self.valuation} inconsistent with residue (expected {v})")
        object.__setattr__(self, "valuation", v)

    @property
    def modulus(self) -> int:
        return self.p**self.M

    @property
    def is_determined(self) -> bool:
        return self.valuation < self.M

    def reduce(self, M: int) -> "PadicApprox":
        if M > self.M:
            raise ValueError("cannot raise precision by reduction")
        return PadicApprox(self.p, M, self.residue)

    def norm(self) -> Fraction:
        """|x|_p = p^(-v); only meaningful when determined."""
        if not self.is_determined:
            raise ValueError("valuation undetermined at this precision")
        return Fraction(1, self.p**self.valuation)

    def to_dict(self) -> dict:
        return {"p": self.p, "M": self.M, "residue": str(self.residue), "valuation": self.valuation}

    @classmethod
    def from_dict(cls, d: dict) -> "PadicApprox":
        return cls(int(d["p"]), int(d["M"]), int(d["residue"]), int(d["valuation"]))


@dataclass(frozen=True)
class LinearFormInstance:
    """lambda_0 + sum_j lambda_j F_p(alpha_j), with p ranging over a set of residue classes."""

    k: int
    m: int
    lambdas: tuple
    alphas: tuple
    residues: ResidueClassSet

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(int(x) for x in self.lambdas))
        object.__setattr__(self, "alphas", tuple(int(x) for x in self.alphas))
        if self.k < 1:
            raise ValueError("k must be positive")
        if len(self.alphas) != self.k:
            raise ValueError(f"expected {self.k} alphas, got {len(self.alphas)}")
        if len(self.lambdas) != self.k + 1:
            raise ValueError(f"expected {self.k + 1} lambdas, got {len(self.lambdas)}")
        if not any(self.lambdas):
            raise ValueError("all lambdas are zero")
        if any(a == 0 for a in self.alphas):
            raise ValueError("alphas must be nonzero")
        if self.m < 3:
            raise ValueError("modulus must be >= 3")
        if self.residues.m != self.m:
            raise ValueError(f"residue set is mod {self.residues.m}, instance mod {self.m}")

    def require_distinct(self) -> None:
        if len(set(self.alphas)) != self.k:
            raise ValueError("alphas must be pairwise distinct")

    @property
    def max_abs_alpha(self) -> int:
        return max(abs(a) for a in self.alphas)

    @property
    def max_abs_lambda(self) -> int:
        return max(abs(x) for x in self.lambdas)

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "m": self.m,
            "lambdas": [str(x) for x in self.lambdas],
            "alphas": [str(x) for x in self.alphas],
            "residues": sorted(self.residues.residues),
        }
        if self.residues.interval is not None:
            d["interval"] = list(self.residues.interval)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LinearFormInstance":
        for key in ("k", "m", "lambdas", "alphas", "residues"):
            if key not in d:
                raise ValueError(f"instance is missing field {key!r}")
        iv = d.get("interval")
        res = ResidueClassSet(int(d["m"]), frozenset(int(a) for a in d["residues"]), tuple(iv) if iv else None)
        return cls(int(d["k"]), int(d["m"]), tuple(int(x) for x in d["lambdas"]),
                   tuple(int(x) for x in d["alphas"]), res)


def eval_Fp(t: int, p: int, M: int) -> PadicApprox:
    """F_p(t) mod p^M from the terms n < factorial_tail_cutoff(p, M)."""
    _require_prime(p)
    mod = p**M
    N = factorial_tail_cutoff(p, M)
    t %= mod
    total, term = 0, 1
    for n in range(N):
        if n:
            term = term * n * t % mod
        total += term
    return PadicApprox(p, M, total % mod)


def eval_linear_form(inst: LinearFormInstance, p: int, M: int) -> PadicApprox:
    mod = p**M
    acc = inst.lambdas[0]
    for lam, a in zip(inst.lambdas[1:], inst.alphas):
        if lam:
            acc += lam * eval_Fp(a, p, M).residue
    return PadicApprox(p, M, acc % mod)


@dataclass(frozen=True)
class Certificate:
    """Proof that Lambda_p != 0: a nonzero residue mod p^M and its exact valuation."""

    instance: LinearFormInstance
    p: int
    M: int
    residue: int
    valuation: int
    lower_bound: Fraction
    search_window: tuple = field(default=None)

    def __post_init__(self):
        if self.residue % self.p**self.M == 0:
            raise ValueError("a certificate needs a nonzero residue")
        if not 0 <= self.valuation < self.M:
            raise ValueError("valuation must be below M")
        if self.lower_bound != Fraction(1, self.p**self.valuation):
            raise ValueError("lower bound must equal p^-valuation")

    def recheck(self, extra: int = 2) -> bool:
        """Re-evaluate at M + extra and confirm the same valuation."""
        return eval_linear_form(self.instance, self.p, self.M + extra).valuation == self.valuation

    def to_dict(self) -> dict:
        return {
            "instance": self.instance.to_dict(),
            "p": self.p,
            "M": self.M,
            "residue": str(self.residue),
            "valuation": self.valuation,
            "lower_bound_num": self.lower_bound.numerator,
            "lower_bound_den": str(self.lower_bound.denominator),
            "search_window": list(self.search_window) if self.search_window else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        win = d.get("search_window")
        return cls(
            LinearFormInstance.from_dict(d["instance"]),
            int(d["p"]),
            int(d["M"]),
            int(d["residue"]),
            int(d["valuation"]),
            Fraction(int(d["lower_bound_num"]), int(d["lower_bound_den"])),
            tuple(win) if win else None,
        )


def certify_nonzero(inst: LinearFormInstance, p: int, M_start: int = 1, M_max: int | None = None,
                    window=None) -> Certificate | None:
    """Certificate for Lambda_p != 0, doubling the precision from M_start up to M_max.

    Returns None when Lambda_p vanishes modulo p^M_max (undetermined, never "zero").
    """
    if M_start < 1:
        raise ValueError("M_start must be positive")
    M_max = 64 * M_start if M_max is None else M_max
    if M_max < M_start:
        raise ValueError("M_max must be >= M_start")
    _require_prime(p)
    M = M_start
    while True:
        val = eval_linear_form(inst, p, M)
        if val.is_determined:
            return Certificate(inst, p, M, val.residue, val.valuation, val.norm(), window)
        if M >= M_max:
            return None
        M = min(2 * M, M_max)
