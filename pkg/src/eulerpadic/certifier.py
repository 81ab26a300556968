"""End-to-end pipelines: nonvanishing certificates, the contradiction product,
and the pipeline reports that tie the other modules together."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from ._mp import log_fraction, mp, to_str
from .bounds import (
    BudgetExceeded,
    DerivedConstants,
    HypothesisReport,
    ThresholdOutOfRange,
    c_constants,
    check_cUpper,
    check_H_hypotheses,
    constants_for,
    lower_bound_exponents,
    n_threshold_N1,
    n_threshold_N2,
    n_upper_bounds,
    R_double_prime_endpoint,
    theorem5_window,
)
from .padic import Certificate, LinearFormInstance, certify_nonzero, eval_linear_form, vp_factorial, vp_int
from .pade import B0_at_one, B_at_one, S_at_one_padic, select_mu, T_value
from .primes_ap import find_prime_in_ap_interval
from .sieve import euler_phi, primes_in_range

DESK_PRIME_BUDGET = 10**7
MU_SELECTION_CAP = 400  # exact B(1) values beyond this n are not worth forming


class NoCertificateFound(RuntimeError):
    """Every prime up to the limit left Lambda_p undetermined (this is not a proof of vanishing)."""

    def __init__(self, limit: int, levels: dict):
        self.limit = limit
        self.levels = levels
        super().__init__(f"no certificate for primes up to {limit}; undetermined at {levels}")


def _window_primes(inst: LinearFormInstance, lo, hi, open_lo=False, open_hi=False) -> list[int]:
    lo_i = math.floor(lo) + 1 if open_lo or lo != math.floor(lo) else int(lo)
    hi_i = math.ceil(hi) - 1 if open_hi or hi != math.ceil(hi) else int(hi)
    if hi_i < max(2, lo_i):
        return []
    return [int(p) for p in primes_in_range(max(2, lo_i), hi_i) if int(p) in inst.residues]


def search_nonvanishing(inst: LinearFormInstance, prime_limit: int, M_start: int = 1, M_max: int | None = None,
                        lo: int = 2, primes: list | None = None, workers: int = 1) -> Certificate:
    """First prime (ascending) in the instance's classes with a certificate Lambda_p != 0."""
    if prime_limit > DESK_PRIME_BUDGET * 100:
        raise BudgetExceeded(f"prime limit {prime_limit} is beyond the search budget")
    cands = primes if primes is not None else _window_primes(inst, lo, prime_limit)
    window = (cands[0], cands[-1]) if cands else (lo, prime_limit)
    levels = {}
    batch = max(1, workers) * 4
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for i in range(0, len(cands), batch):
            chunk = cands[i:i + batch]
            results = list(pool.map(lambda p: certify_nonzero(inst, p, M_start, M_max, window), chunk))
            for p, cert in zip(chunk, results):
                if cert is not None:
                    return cert
                levels[p] = 64 * M_start if M_max is None else M_max
    raise NoCertificateFound(prime_limit, levels)


# ---------------------------------------------------------------------------
# the contradiction product


@dataclass
class ContradictionReport:
    n: int
    mu: int
    T: int
    lambda_max: int
    B_abs: list  # |B_{n+1,mu,i}(1)| for i = 0..k
    window: tuple
    primes: list
    S_exponents: dict  # p -> e with |S_{n+1,mu,i}(1)|_p <= p^-e for every i
    S_bound: Fraction  # prod_p p^-e
    log_S_bound: object
    product: Fraction
    log_product: object
    product_lt_one: bool
    exact_S: list | None = None  # per i: exact prod_p |S_i(1)|_p (upper bound if a residue vanished)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mu": self.mu,
            "T": str(self.T),
            "lambda_max": str(self.lambda_max),
            "B_abs": [str(b) for b in self.B_abs],
            "window": list(self.window),
            "primes": self.primes,
            "S_exponents": {str(p): e for p, e in self.S_exponents.items()},
            "S_bound": f"{self.S_bound.numerator}/{self.S_bound.denominator}",
            "log_S_bound": to_str(self.log_S_bound),
            "product": f"{self.product.numerator}/{self.product.denominator}",
            "log_product": to_str(self.log_product),
            "product_lt_one": self.product_lt_one,
            "exact_S": None if self.exact_S is None else [f"{q.numerator}/{q.denominator}" for q in self.exact_S],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ContradictionReport":
        return cls(
            int(d["n"]), int(d["mu"]), int(d["T"]), int(d["lambda_max"]), [int(b) for b in d["B_abs"]],
            tuple(d["window"]), list(d["primes"]), {int(p): int(e) for p, e in d["S_exponents"].items()},
            Fraction(d["S_bound"]), mp.mpf(d["log_S_bound"]), Fraction(d["product"]), mp.mpf(d["log_product"]),
            bool(d["product_lt_one"]),
            None if d.get("exact_S") is None else [Fraction(q) for q in d["exact_S"]],
        )


def s_bound_exponent(inst: LinearFormInstance, n: int, mu: int, p: int) -> int:
    """e with |(kn+mu)! n!|_p (max_j |alpha_j|_p)^((k+1)n) = p^-e."""
    k = inst.k
    v_alpha = min(vp_int(a, p) for a in inst.alphas)
    return vp_factorial(k * n + mu, p) + vp_factorial(n, p) + (k + 1) * n * v_alpha


def exact_S_norm_product(inst: LinearFormInstance, n: int, mu: int, j: int, primes, extra: int = 8) -> Fraction:
    """prod_p |S_{n,mu,j}(1)|_p, evaluated mod p^(bound exponent + extra).

    A residue that vanishes at that precision contributes its modulus as an
    upper bound, so the result is always >= the true product.
    """
    out = Fraction(1)
    for p in primes:
        M = s_bound_exponent(inst, n, mu, p) + extra
        r = S_at_one_padic(n, mu, inst.alphas, j, p, M)
        v = M if r == 0 else vp_int(r, p)
        out /= p**v
    return out


def contradiction_product(inst: LinearFormInstance, n: int, mu: int | None = None, prime_window=None,
                          exact_S: bool = False) -> ContradictionReport:
    """(k+1) max|lambda| max_i |B_{n+1,mu,i}(1)| prod_{p in window} |S_{n+1,mu,i}(1)|_p.

    The S-norms enter through their bound |(k n' + mu)! n'!|_p (max|alpha|_p)^((k+1)n')
    with n' = n + 1, computed exactly with Legendre's formula.
    """
    k = inst.k
    if mu is None:
        mu = select_mu(n, inst)
    n1 = n + 1
    lo, hi = prime_window if prime_window is not None else (2, k * (n + 2))
    primes = _window_primes(inst, lo, hi)
    B_abs = [abs(B_at_one(n1, mu, inst.alphas, i)) for i in range(k + 1)]
    exps = {p: s_bound_exponent(inst, n1, mu, p) for p in primes}
    denom = math.prod(p**e for p, e in exps.items())
    S_bound = Fraction(1, denom)
    lead = (k + 1) * inst.max_abs_lambda * max(B_abs)
    product = lead * S_bound
    log_S = -mp.fsum(e * mp.log(p) for p, e in exps.items())
    log_product = log_fraction(product) if product > 0 else mp.ninf
    ex = None
    if exact_S:
        ex = [exact_S_norm_product(inst, n1, mu, j, primes) for j in range(1, k + 1)]
    return ContradictionReport(
        n, mu, T_value(n1, mu, inst), inst.max_abs_lambda, B_abs, (lo, hi), primes, exps, S_bound, log_S,
        product, log_product, product < 1, ex,
    )


def contradiction_scan(inst: LinearFormInstance, n_max: int = 200, n_min: int = 1) -> ContradictionReport | None:
    """First n in [n_min, n_max] whose contradiction product is below one."""
    for n in range(n_min, n_max + 1):
        rep = contradiction_product(inst, n)
        if rep.product_lt_one:
            return rep
    return None


def tn_enough_witnesses(inst: LinearFormInstance, n1: int, mu: int, primes, M: int | None = None) -> list[int]:
    """Primes p with |B_{n1,mu,0}(1) Lambda_p|_p > |sum_j lambda_j S_{n1,mu,j}(1)|_p.

    Both sides are computed mod p^M; a prime counts only when the left
    valuation is determined and strictly smaller than the right one.
    """
    out = []
    b0 = B0_at_one(n1, mu, inst.alphas)
    for p in primes:
        Mp = M or (s_bound_exponent(inst, n1, mu, p) + 8)
        mod = p**Mp
        lam = eval_linear_form(inst, p, Mp).residue
        left = b0 * lam % mod
        right = sum(l * S_at_one_padic(n1, mu, inst.alphas, j, p, Mp) for j, l in enumerate(inst.lambdas[1:], 1)) % mod
        vl = Mp if left == 0 else vp_int(left, p)
        vr = Mp if right == 0 else vp_int(right, p)
        if vl < Mp and vl < vr:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# pipeline reports


@dataclass
class PipelineReport:
    kind: str
    instance: LinearFormInstance
    status: str
    hypotheses: HypothesisReport
    constants: DerivedConstants | None = None
    n: int | None = None
    mu: int | None = None
    certificate: Certificate | None = None
    window: list = field(default_factory=list)
    margins: dict = field(default_factory=dict)
    exponents: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "instance": self.instance.to_dict(),
            "status": self.status,
            "hypotheses": self.hypotheses.to_dict(),
            "constants": None if self.constants is None else self.constants.to_dict(),
            "n": None if self.n is None else str(self.n),
            "mu": self.mu,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "window": [str(w) for w in self.window],
            "margins": dict(self.margins),
            "exponents": dict(self.exponents),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineReport":
        return cls(
            d["kind"],
            LinearFormInstance.from_dict(d["instance"]),
            d["status"],
            HypothesisReport.from_dict(d["hypotheses"]),
            None if d.get("constants") is None else DerivedConstants.from_dict(d["constants"]),
            None if d.get("n") is None else int(d["n"]),
            d.get("mu"),
            None if d.get("certificate") is None else Certificate.from_dict(d["certificate"]),
            list(d.get("window", [])),
            dict(d.get("margins", {})),
            dict(d.get("exponents", {})),
            list(d.get("notes", [])),
        )


def _certificate_margin(cert: Certificate, exponent, logH) -> str:
    """exponent log H - v log p: positive means p^-v > H^-exponent."""
    return to_str(mp.mpf(exponent) * mp.mpf(logH) - cert.valuation * mp.log(cert.p))


def theorem2_report(inst: LinearFormInstance, prime_limit: int = 1000, M_start: int = 1) -> PipelineReport:
    R = inst.residues.restrict(2, math.inf)
    consts = c_constants(inst.alphas, R)
    hyp = check_cUpper(consts, inst.k, inst.m)
    rep = PipelineReport("theorem2", inst, "ok", hyp, consts)
    try:
        rep.certificate = search_nonvanishing(inst, prime_limit, M_start)
        rep.window = [2, prime_limit]
    except NoCertificateFound as exc:
        rep.status = "no-certificate"
        rep.notes.append(str(exc))
    if not hyp.all_hold:
        rep.notes.append("hypothesis cUpper fails; any certificate found still proves Lambda_p != 0")
    return rep


def _select_mu_or_note(rep: PipelineReport, inst: LinearFormInstance, n: int) -> None:
    if n <= MU_SELECTION_CAP:
        rep.mu = select_mu(n, inst)
        rep.margins["T(n+1,mu)_nonzero"] = str(T_value(n + 1, rep.mu, inst) != 0)
    else:
        rep.notes.append(f"mu selection skipped: n = {n} is hypothesis-scale")


def theorem3_pipeline(inst: LinearFormInstance, logH, relaxed: bool = True, prime_budget: int = DESK_PRIME_BUDGET,
                      M_start: int = 1) -> PipelineReport:
    """R', constants, H-hypotheses, n from N1, mu, exponent, then a certificate inside R''."""
    inst.require_distinct()
    logH = mp.mpf(logH)
    consts = constants_for(inst)
    hyp = check_H_hypotheses(inst, consts, logH)
    rep = PipelineReport("theorem3", inst, "ok", hyp, consts)
    if consts.D <= 0:
        rep.status = "inadmissible"
        rep.notes.append("D <= 0: the constant ledger gives no threshold")
        return rep
    if not hyp.all_hold:
        if not relaxed:
            rep.status = "hypotheses-fail"
            return rep
        rep.notes.append("desk-relaxed: hypotheses reported, not enforced")
    try:
        rep.n = n_threshold_N1(inst, consts, logH)
    except ThresholdOutOfRange as exc:
        rep.status = "hypothesis-scale"
        rep.notes.append(f"hypothesis-scale, components verified individually: {exc}")
        return rep
    if rep.n is None:
        rep.status = "inadmissible"
        rep.notes.append("N1 < 0 everywhere: no threshold n")
        return rep
    for ub in n_upper_bounds(inst, consts, logH, n=rep.n):
        rep.margins[f"bound[{ub.name}]"] = str(ub.holds)
    _select_mu_or_note(rep, inst, rep.n)
    ex = lower_bound_exponents(inst, consts, logH)
    rep.exponents = ex.to_dict()
    hi = R_double_prime_endpoint(inst, consts, logH)
    rep.window = [2, to_str(hi)]
    if hi > prime_budget:
        rep.status = "hypothesis-scale"
        rep.notes.append("hypothesis-scale, components verified individually: window beyond the prime budget")
        return rep
    primes = _window_primes(inst, 2, hi, open_hi=True)
    try:
        cert = search_nonvanishing(inst, int(hi), M_start, primes=primes)
    except NoCertificateFound as exc:
        rep.status = "no-certificate"
        rep.notes.append(str(exc))
        return rep
    rep.certificate = cert
    rep.margins["theorem3"] = _certificate_margin(cert, ex.theorem3, logH)
    if ex.corollary is not None:
        rep.margins["corollary"] = _certificate_margin(cert, ex.corollary, logH)
    return rep


def theorem5_pipeline(inst: LinearFormInstance, logH, epsilon, s, relaxed: bool = True,
                      prime_budget: int = DESK_PRIME_BUDGET, M_start: int = 1) -> PipelineReport:
    """As theorem3_pipeline with N2, the epsilon hypotheses and the (log, linear) prime window."""
    inst.require_distinct()
    logH = mp.mpf(logH)
    eps = mp.mpf(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    consts = constants_for(inst)
    hyp = check_H_hypotheses(inst, consts, logH, eps, s)
    phi = euler_phi(inst.m)
    need = (inst.k + eps) * phi / (inst.k + 1)
    have = len(inst.residues.residues)
    hyp.add("ResidueClassCount", have, need, have >= need)
    # the c2 and D conditions belong to the N1 pipeline only
    hyp.entries = [e for e in hyp.entries if e.name not in ("BoundH", "cUpper")]
    rep = PipelineReport("theorem5", inst, "ok", hyp, consts)
    if not hyp.all_hold:
        if not relaxed:
            rep.status = "hypotheses-fail"
            return rep
        rep.notes.append("desk-relaxed: hypotheses reported, not enforced")
    try:
        rep.n = n_threshold_N2(inst, consts.c1, eps, logH)
    except ThresholdOutOfRange as exc:
        rep.notes.append(f"n not located: {exc}")
    if rep.n is not None:
        for ub in n_upper_bounds(inst, consts, logH, epsilon=eps, n=rep.n):
            rep.margins[f"bound[{ub.name}]"] = str(ub.holds)
        _select_mu_or_note(rep, inst, rep.n)
    ex = lower_bound_exponents(inst, consts, logH, eps)
    rep.exponents = ex.to_dict()
    lo, hi = theorem5_window(inst.k, eps, logH)
    rep.window = [to_str(lo), to_str(hi)]
    if hi > prime_budget:
        rep.status = "hypothesis-scale"
        rep.notes.append("hypothesis-scale, components verified individually: window beyond the prime budget")
        return rep
    primes = _window_primes(inst, lo, hi, open_lo=True, open_hi=True)
    # an independent look for a prime of R in the window
    x2 = int(mp.floor(hi))
    witness = None
    for a in sorted(inst.residues.residues):
        p = find_prime_in_ap_interval(inst.m, a, int(mp.floor(lo)) + 1, x2)
        if p is not None and p < hi and (witness is None or p < witness):
            witness = p
    rep.margins["window_nonempty"] = str(bool(primes))
    rep.margins["window_prime_crosscheck"] = str((witness is None) == (not primes) and (not primes or witness == primes[0]))
    if not primes:
        rep.status = "no-certificate"
        rep.notes.append("no prime of R in the window")
        return rep
    try:
        cert = search_nonvanishing(inst, x2, M_start, primes=primes)
    except NoCertificateFound as exc:
        rep.status = "no-certificate"
        rep.notes.append(str(exc))
        return rep
    rep.certificate = cert
    if ex.theorem5 is not None:
        rep.margins["theorem5"] = _certificate_margin(cert, ex.theorem5, logH)
    return rep
