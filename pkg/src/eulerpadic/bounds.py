"""Constants, thresholds and exponents of the explicit lower bounds.

Quantities that explode (H, m^phi(m), s e^s) are handled through their
logarithms in the package's 128-bit context; H itself is never formed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

from ._mp import log_fraction, mp, to_str
from .padic import LinearFormInstance, vp_int
from .primes_ap import ResidueClassSet, a_of_m, find_prime_in_ap_interval
from .sieve import euler_phi, prime_factors

C_SUM = mp.mpf("6.550")  # constant of the log p/(p-1) estimate
C_SUM_N = mp.mpf("6.55")  # the same constant as printed in N1 and N2
LP_A = mp.mpf("2.539")
LP_B = mp.mpf("5.440")
LOG_SQRT_2PI = mp.log(mp.sqrt(2 * mp.pi))
DEFAULT_BUDGET = 10**12


class BudgetExceeded(RuntimeError):
    pass


class ThresholdOutOfRange(ArithmeticError):
    """The negative tail of N could not be certified below a_max."""


def _s(x) -> str:
    return to_str(x) if isinstance(x, type(mp.mpf(0))) else str(x)


def _frac_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _parse_frac(s: str) -> Fraction:
    return Fraction(s)


def A_const(k: int, phi: int):
    """2.539 k phi + 5.724 k + 0.054."""
    return LP_A * k * phi + mp.mpf("5.724") * k + mp.mpf("0.054")


@dataclass(frozen=True)
class DerivedConstants:
    k: int
    m: int
    c1: Fraction
    c2: Fraction
    log_c2: object
    D: object
    cUpper_rhs: object  # log of the right-hand side of c2 < (k e^(1+6.550 phi) m^phi)^(-k)
    a_m: float
    primes_used: tuple = ()

    @property
    def cUpper_holds(self) -> bool:
        return self.log_c2 < self.cUpper_rhs

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "c1": _frac_str(self.c1),
            "c2": _frac_str(self.c2),
            "log_c2": to_str(self.log_c2),
            "D": to_str(self.D),
            "cUpper_rhs": to_str(self.cUpper_rhs),
            "a_m": self.a_m,
            "primes_used": list(self.primes_used),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DerivedConstants":
        return cls(
            int(d["k"]), int(d["m"]), _parse_frac(d["c1"]), _parse_frac(d["c2"]),
            mp.mpf(d["log_c2"]), mp.mpf(d["D"]), mp.mpf(d["cUpper_rhs"]), float(d["a_m"]),
            tuple(d.get("primes_used", ())),
        )


def cUpper_log_rhs(k: int, m: int):
    """-k(1 + 6.550 phi + phi log m + log k)."""
    phi = euler_phi(m)
    return -k * (1 + C_SUM * phi + phi * mp.log(m) + mp.log(k))


def D_value(log_c2, k: int, m: int):
    phi = euler_phi(m)
    return -(log_c2 + k * (mp.log(k) + (mp.log(m) + C_SUM) * phi + 1))


def c_constants(alphas, R, m: int | None = None) -> DerivedConstants:
    """c1 = 2^k max|alpha|^k and c2 = c1 prod_{p in R} (max_i |alpha_i|_p)^(k+1).

    ``R`` is an explicit iterable of primes or a ResidueClassSet with a finite
    interval. Only primes dividing every alpha_i change c2, so R is only
    probed at the prime divisors of gcd(alpha).
    """
    alphas = tuple(int(a) for a in alphas)
    k = len(alphas)
    if isinstance(R, ResidueClassSet):
        m = R.m if m is None else m
        if R.interval is None:
            raise ValueError("c2 needs a finite prime set: give the residue set an interval")
        member = R.__contains__
    else:
        prime_set = frozenset(int(p) for p in R)
        member = prime_set.__contains__
    if m is None:
        raise ValueError("modulus m is required with an explicit prime list")
    amax = max(abs(a) for a in alphas)
    c1 = Fraction(2**k * amax**k)
    g = 0
    for a in alphas:
        g = math.gcd(g, a)
    c2 = c1
    used = []
    for p in sorted(prime_factors(g)) if g > 1 else []:
        if member(p):
            v = min(vp_int(a, p) for a in alphas)
            c2 /= Fraction(p) ** (v * (k + 1))
            used.append(p)
    log_c2 = log_fraction(c2)
    return DerivedConstants(k, m, c1, c2, log_c2, D_value(log_c2, k, m), cUpper_log_rhs(k, m), a_of_m(m), tuple(used))


@dataclass
class HypothesisEntry:
    name: str
    lhs: str
    rhs: str
    holds: bool
    inputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class HypothesisReport:
    entries: list = field(default_factory=list)

    def add(self, name, lhs, rhs, holds, **inputs) -> None:
        self.entries.append(HypothesisEntry(name, _s(lhs), _s(rhs), bool(holds), {k: _s(v) for k, v in inputs.items()}))

    @property
    def flags(self) -> dict:
        return {e.name: e.holds for e in self.entries}

    @property
    def all_hold(self) -> bool:
        return all(e.holds for e in self.entries)

    def __getitem__(self, name) -> HypothesisEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"flags": self.flags, "entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "HypothesisReport":
        return cls([HypothesisEntry(**e) for e in d["entries"]])


def check_cUpper(consts: DerivedConstants, k: int, m: int, report: HypothesisReport | None = None) -> HypothesisReport:
    report = report or HypothesisReport()
    rhs = cUpper_log_rhs(k, m)
    report.add("cUpper", consts.log_c2, rhs, consts.log_c2 < rhs, c2=_frac_str(consts.c2), k=k, m=m)
    return report


def example_threshold(k: int, m: int):
    """(2 k^2 e^(1 + 6.550 phi) m^phi)^k as a 128-bit real."""
    phi = euler_phi(m)
    return (2 * k * k * mp.exp(1 + C_SUM * phi) * mp.mpf(m) ** phi) ** k


def example_instance(k: int, m: int, residues=None, lambdas=None, budget: int = DEFAULT_BUDGET,
                     lower=None) -> LinearFormInstance:
    """Instance with alpha_i = i p for the first prime p in the classes above the threshold.

    ``lower`` raises the starting point of the prime search (a larger p
    gives a larger D). Raises BudgetExceeded when the search would start
    beyond ``budget``.
    """
    if isinstance(residues, ResidueClassSet):
        R = residues
    elif residues is None:
        R = ResidueClassSet.all_reduced(m)
    else:
        R = ResidueClassSet(m, frozenset(residues))
    thr = example_threshold(k, m)
    start = int(mp.floor(thr)) + 1
    if lower is not None:
        start = max(start, int(lower))
    if start > budget:
        raise BudgetExceeded(f"budget exceeded: prime threshold {to_str(thr, 6)} is above the search budget {budget}")
    best, width = None, 1 << 16
    while best is None:
        hits = [find_prime_in_ap_interval(m, a, start, start + width) for a in sorted(R.residues)]
        hits = [h for h in hits if h is not None and h in R]
        best = min(hits) if hits else None
        width *= 4
        if start + width > 4 * budget:
            raise BudgetExceeded("budget exceeded while searching for a prime in the residue classes")
    lam = tuple(lambdas) if lambdas is not None else (1,) * (k + 1)
    return LinearFormInstance(k, m, lam, tuple(i * best for i in range(1, k + 1)), R)


def R_prime_endpoint(inst: LinearFormInstance) -> int:
    """k max{1865, m^phi, max|alpha| + 2}."""
    return inst.k * max(1865, inst.m ** euler_phi(inst.m), inst.max_abs_alpha + 2)


def R_prime(inst: LinearFormInstance) -> ResidueClassSet:
    return inst.residues.restrict(2, R_prime_endpoint(inst))


def R_double_prime_endpoint(inst: LinearFormInstance, consts: DerivedConstants, logH):
    """2k log H / D + 2k (the interval is half-open at this end)."""
    return 2 * inst.k * mp.mpf(logH) / consts.D + 2 * inst.k


def constants_for(inst: LinearFormInstance) -> DerivedConstants:
    """c1, c2, D over R' for the instance."""
    return c_constants(inst.alphas, R_prime(inst))


# ---------------------------------------------------------------------------
# N1 / N2 and the threshold search


def _prec_for(a) -> int:
    # keep integer resolution in a once a outgrows the 128-bit mantissa
    return max(mp.prec, int(a).bit_length() + 64)


def _adaptive(fn):
    def wrapped(a, *args, **kw):
        with mp.workprec(_prec_for(a)):
            return fn(a, *args, **kw)

    wrapped.__name__, wrapped.__doc__ = fn.__name__, fn.__doc__
    return wrapped


def _inst_parts(inst):
    k, m = inst.k, inst.m
    phi = euler_phi(m)
    return k, m, phi, mp.log(inst.max_abs_alpha)


@_adaptive
def N1(a, inst: LinearFormInstance, consts: DerivedConstants, logH):
    k, m, phi, log_amax = _inst_parts(inst)
    a = mp.mpf(a)
    la = mp.log(a)
    lm = mp.log(m)
    lk = mp.log(k)
    coef = (LP_A + LP_B / phi) * k * phi
    return (
        a * (consts.log_c2 + k * (lk + (lm + C_SUM_N) * phi + 1))
        + coef * a / la
        + mp.mpf("2.5") * la + mp.log(k + 1) + mp.mpf("2.5") * lk + logH + (k - 1) * log_amax
        + LOG_SQRT_2PI + 1 + k * ((lm + C_SUM_N) * phi + 2) + coef / la + mp.mpf(19) / (12 * a)
    )


@_adaptive
def N1_tail_ok(a, inst: LinearFormInstance, consts: DerivedConstants) -> bool:
    """N1' < 0 on [a, oo): the derivative is at most -D + coef/log a + 2.5/a, which decreases in a."""
    k, m, phi, _ = _inst_parts(inst)
    coef = (LP_A + LP_B / phi) * k * phi
    D_n = -(consts.log_c2 + k * (mp.log(k) + (mp.log(m) + C_SUM_N) * phi + 1))
    a = mp.mpf(a)
    return a > 1 and -D_n + coef / mp.log(a) + mp.mpf("2.5") / a < 0


def _N2_parts(inst, c1, epsilon):
    k, m, phi, log_amax = _inst_parts(inst)
    lm = mp.log(m)
    lk = mp.log(k)
    eps = mp.mpf(epsilon)
    lin = mp.log(c1.numerator) - mp.log(c1.denominator) - k + lk + 2 * (k + 1) * ((lm + C_SUM_N) * phi + 1)
    A2 = (LP_A + LP_B / phi) * 2 * phi * (k + 1)
    return k, phi, lk, log_amax, lm, eps, lin, A2


@_adaptive
def N2(a, inst: LinearFormInstance, c1: Fraction, epsilon, logH):
    k, phi, lk, log_amax, lm, eps, lin, A2 = _N2_parts(inst, c1, epsilon)
    a = mp.mpf(a)
    la = mp.log(a)
    lla = mp.log(la)
    return (
        -eps * a * la + (k + 1) * a * lla + a * lin
        + A2 * a / la + 2 * la**2 / lla + (k + mp.mpf("3.5")) * la + lk * la / lla + k * lla
        + mp.log(k + 1) + mp.mpf("2.5") * lk + (k - 1) * log_amax + 2 * ((lm + C_SUM_N) * phi + 1) * k
        + LOG_SQRT_2PI + 1 + logH + (LP_A + LP_B / phi) * 2 * phi * k / la + la / (a * lla) + mp.mpf(29) / (12 * a)
    )


@_adaptive
def N2_tail_ok(a, inst: LinearFormInstance, c1: Fraction, epsilon) -> bool:
    """N2' < 0 on [a, oo).

    g(a) below bounds N2'(a) termwise; once log a > (k+1)/eps (and a >= 16) g is
    decreasing, so g(a) < 0 there certifies the whole tail.
    """
    k, phi, lk, _, _, eps, lin, A2 = _N2_parts(inst, c1, epsilon)
    a = mp.mpf(a)
    if a < 16:
        return False
    la = mp.log(a)
    lla = mp.log(la)
    if la <= (k + 1) / eps:
        return False
    g = (
        -eps * (la + 1) + (k + 1) * (lla + 1 / la) + lin + A2 / la
        + 4 * la / (a * lla) + (k + mp.mpf("3.5")) / a + lk / (a * lla) + k / (a * la)
    )
    return g < 0


def find_n_threshold(N: Callable, start: int = 4, guard: int = 64, tail_ok: Callable | None = None,
                     a_min: int = 2, a_max: int = 1 << 4096) -> int | None:
    """max{a : N(a) >= 0}.

    Doubles from ``start`` until N < 0 and ``tail_ok`` certifies the tail,
    binary-searches the last sign change below that point, then scans
    ``guard`` steps past the answer and repeats if N turns nonnegative again.
    If N < 0 everywhere sampled, scans downward from ``start``; returns None
    when no a >= a_min has N(a) >= 0.
    """
    tail_ok = tail_ok or (lambda a: True)
    last_ok = start if N(start) >= 0 else None
    hi = start
    while True:
        if N(hi) >= 0:
            last_ok = hi
        elif tail_ok(hi):
            break
        if hi > a_max:
            raise ThresholdOutOfRange(f"no certified negative tail below a_max = {a_max}")
        hi *= 2
    if last_ok is None:
        for a in range(start - 1, a_min - 1, -1):
            if N(a) >= 0:
                return a
        return None
    lo, tail = last_ok, hi
    while True:
        # invariant: N(lo) >= 0 > N(hi), and N < 0 from tail onwards
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if N(mid) >= 0:
                lo = mid
            else:
                hi = mid
        again = next((a for a in range(min(lo + 1 + guard, tail - 1), lo + 1, -1) if N(a) >= 0), None)
        if again is None:
            return lo
        lo, hi = again, tail


def n_threshold_N1(inst, consts, logH) -> int | None:
    return find_n_threshold(lambda a: N1(a, inst, consts, logH), tail_ok=lambda a: N1_tail_ok(a, inst, consts))


def n_threshold_N2(inst, c1, epsilon, logH) -> int | None:
    return find_n_threshold(lambda a: N2(a, inst, c1, epsilon, logH), tail_ok=lambda a: N2_tail_ok(a, inst, c1, epsilon))


# ---------------------------------------------------------------------------
# hypotheses on H, upper bounds for n, exponents


def check_H_hypotheses(inst: LinearFormInstance, consts: DerivedConstants, logH, epsilon=None, s=None) -> HypothesisReport:
    report = check_cUpper(consts, inst.k, inst.m)
    k, m = inst.k, inst.m
    phi = euler_phi(m)
    logH = mp.mpf(logH)
    m_phi = mp.mpf(m) ** phi
    if consts.D > 0:
        lhs = logH / consts.D
        A = A_const(k, phi)
        branches = {
            "1866": mp.mpf(1866),
            "m^phi+1": m_phi + 1,
            "max|alpha|+1": mp.mpf(inst.max_abs_alpha + 1),
            "exp(2A/D)+1": mp.exp(2 * A / consts.D) + 1,
        }
        rhs = max(branches.values())
        binding = max(branches, key=lambda b: branches[b])
        report.add("BoundH", lhs, rhs, lhs >= rhs, binding=binding, D=consts.D)
    else:
        report.add("BoundH", "n/a", "D > 0", False, D=consts.D)
    if epsilon is not None and s is not None:
        eps = mp.mpf(epsilon)
        s = mp.mpf(s)
        lhs = mp.log(logH / eps)
        rhs = s + mp.log(s)
        report.add("HassumptionEpsilon", lhs, rhs, lhs >= rhs, s=s, epsilon=eps)
        branches = {
            "1866": mp.mpf(1866),
            "m^phi+1": m_phi + 1,
            "c1+1": mp.mpf(consts.c1.numerator) / consts.c1.denominator + 1,
            "eps-branch": ((mp.mpf("15.195") * k + mp.mpf("16.195")) / eps) ** mp.mpf("1.5") + 1,
        }
        rhs = max(branches.values())
        binding = max(branches, key=lambda b: branches[b])
        report.add("LowerBoundsForS", s, rhs, s >= rhs, binding=binding)
    return report


@dataclass
class UpperBound:
    name: str
    value: object
    holds: bool | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "value": _s(self.value), "holds": self.holds}


def n_upper_bounds(inst: LinearFormInstance, consts: DerivedConstants, logH, epsilon=None, n: int | None = None) -> list:
    """Closed-form upper bounds for the threshold n; ``holds`` filled in when n is given."""
    k, phi = inst.k, euler_phi(inst.m)
    logH = mp.mpf(logH)
    out = []
    if consts.D > 0:
        b = 2 * logH / consts.D
        out.append(UpperBound("n < 2logH/D", b, None if n is None else n < b))
        if n is not None and n >= 2:
            b2 = (A_const(k, phi) * n / mp.log(n) + logH) / consts.D
            out.append(UpperBound("n < (A n/log n + logH)/D", b2, n < b2))
    if epsilon is not None:
        eps = mp.mpf(epsilon)
        L = mp.log(logH / eps)
        variants = [("k>=1", mp.mpf("12.994"), mp.mpf("0.072"))]
        if k >= 2:
            variants.append(("k>=2", mp.mpf("6.445"), mp.mpf("0.020")))
        for tag, ca, cb in variants:
            b = ca * logH / (eps * L)
            out.append(UpperBound(f"n < {ca}logH/(eps log(logH/eps)) [{tag}]", b, None if n is None else n < b))
            b = cb * logH
            out.append(UpperBound(f"n < {cb}logH [{tag}]", b, None if n is None else n < b))
        if n is not None and n >= 3:
            lhs = n * mp.log(n)
            rhs = (mp.mpf("15.195") * k + mp.mpf("16.195")) / eps * n * mp.log(mp.log(n)) + logH / eps
            out.append(UpperBound("n log n < (15.195k+16.195)/eps n loglog n + logH/eps", rhs, lhs < rhs))
    return out


def xex_evaluate(logH, x, y) -> tuple[bool, bool]:
    """(premise, conclusion) for: log H >= x e^(y/x) + x  implies  y/(2 loglog H) <= x <= log H / 2.

    The premise is compared in log space: log(log H - x) >= log x + y/x.
    """
    logH, x, y = mp.mpf(logH), mp.mpf(x), mp.mpf(y)
    premise = logH > x and mp.log(logH - x) >= mp.log(x) + y / x
    conclusion = logH > 1 and y / (2 * mp.log(logH)) <= x <= logH / 2
    return bool(premise), bool(conclusion)


def xex_bounds_check(logH, x, y) -> bool:
    premise, conclusion = xex_evaluate(logH, x, y)
    return premise and conclusion


THEOREM3_TAIL = (mp.mpf("0.015"), mp.mpf("0.235"), mp.mpf("1.034"))
COROLLARY_COEF = (mp.mpf("0.0008"), mp.mpf("0.055"), mp.mpf("0.675"))
THEOREM5_K1 = (mp.mpf("197.444"), mp.mpf("210.438"), mp.mpf("1.726"), mp.mpf("-0.529"), mp.mpf("12.995"), mp.mpf("0.072"))
THEOREM5_K2 = (mp.mpf("97.932"), mp.mpf("104.377"), mp.mpf("0.856"), mp.mpf("-0.262"), mp.mpf("6.446"), mp.mpf("0.02"))


def theorem3_tail(k: int):
    a, b, c = THEOREM3_TAIL
    return a * k * k + b * k + c


def corollary_coefficient(k: int):
    a, b, c = COROLLARY_COEF
    return a * k * k + b * k + c


def theorem3_exponent(k: int, m: int, D, logH):
    phi = euler_phi(m)
    D = mp.mpf(D)
    llH = mp.log(mp.mpf(logH))
    return (
        2 * k * llH / D
        + (-2 * k * mp.log(D) + 2 * k * k + 3 * k * mp.log(2) - 2 * k) / D
        + 4 * k * A_const(k, phi) / D**2
        + theorem3_tail(k)
    )


def corollary_exponent(k: int, logH):
    return corollary_coefficient(k) * mp.log(mp.mpf(logH)) ** 2


def theorem5_exponent(k: int, epsilon, logH, branch: int | None = None):
    """Exponent of H in the bounded-exponent bound; branch 1 (k >= 1) or 2 (k >= 2)."""
    branch = branch or (2 if k >= 2 else 1)
    if branch == 2 and k < 2:
        raise ValueError("the second branch needs k >= 2")
    c = THEOREM5_K2 if branch == 2 else THEOREM5_K1
    eps = mp.mpf(epsilon)
    logH = mp.mpf(logH)
    inner = c[5] * logH
    if inner <= mp.e:
        raise ValueError("log log of the scaled log H must be positive")
    poly = c[0] * k * k / eps + c[1] * k / eps + c[2] * k * k + c[3] * k + c[4]
    return (k / eps + 1) + poly * mp.log(mp.log(inner)) / (eps * mp.log(logH))


def theorem5_window(k: int, epsilon, logH):
    """(log(logH/(eps log(logH/eps))), k(12.994 logH/(eps log(logH/eps)) + 2)), open at both ends."""
    eps = mp.mpf(epsilon)
    logH = mp.mpf(logH)
    q = logH / (eps * mp.log(logH / eps))
    return mp.log(q), k * (mp.mpf("12.994") * q + 2)


@dataclass
class Exponents:
    theorem3: object = None
    theorem3_tail: object = None
    corollary: object = None
    corollary_coefficient: object = None
    theorem5: object = None
    theorem5_branch: int | None = None
    theorem5_k1: object = None

    def to_dict(self) -> dict:
        return {k: (_s(v) if v is not None and not isinstance(v, int) else v) for k, v in asdict(self).items()}


def lower_bound_exponents(inst: LinearFormInstance, consts: DerivedConstants, logH, epsilon=None) -> Exponents:
    k = inst.k
    out = Exponents(theorem3_tail=theorem3_tail(k), corollary_coefficient=corollary_coefficient(k))
    if consts.D > 0:
        out.theorem3 = theorem3_exponent(k, inst.m, consts.D, logH)
    if mp.mpf(logH) > mp.e:
        out.corollary = corollary_exponent(k, logH)
    if epsilon is not None and mp.mpf("0.02") * mp.mpf(logH) > mp.e:
        out.theorem5_branch = 2 if k >= 2 else 1
        out.theorem5 = theorem5_exponent(k, epsilon, logH)
        out.theorem5_k1 = theorem5_exponent(k, epsilon, logH, branch=1)
    return out
