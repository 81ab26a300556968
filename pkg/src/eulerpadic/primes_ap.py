"""Primes in arithmetic progressions and the explicit GRH-conditional estimates.

Everything here is a numeric check inside a sieved range: pi, theta, psi and
the log p/(p-1) sums are computed exactly (counts) or with a rigorous error
radius (log sums), then compared with the explicit right-hand sides. A margin
``rhs - lhs`` together with its radius decides each row:

* certified  -- margin - radius >= 0
* violation  -- margin + radius < 0   (a genuine finding; reported, not raised)
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from ._mp import mp
from .li import li, li_on_integers
from .sieve import euler_phi, is_prime, primes_in_range, segmented_primes, totients_upto
from .summation import U64, ExactPrefix, TrackedReal

DEFAULT_SIEVE_LIMIT = 10**8
CACHE_ENV = "EULERPADIC_SIEVE_CACHE"
SCAN_CHUNK = 1 << 22

# constants of the estimates being checked
PI_LOGX_COEF = 1 / (8 * math.pi)
PI_CONST = 0.341
THETA_SMALL_M = 0.129
THETA_LARGE_M = 0.399
THETA_STRONG = 0.092
SUMLOG_CONST = 6.550
LOGPROD_A = 2.539
LOGPROD_B = 5.440
HYP_X = 1865

CHECKS = ("pi", "theta11", "theta12", "sumlog")

# Long-double exp is assumed accurate to this many ulps (glibc's x87 expl
# is documented at 1); the test-suite confirms the resulting log bound
# against mpmath.
EXP_ULPS = 1.0
_LD_EPS = float(np.finfo(np.longdouble).eps)


def corrected_logs(primes: np.ndarray):
    """log p as an unevaluated sum hi + lo, with an absolute error bound.

    hi is the long-double log; lo = p*exp(-hi) - 1 is one Newton step that
    recovers the bits hi lost. Error: the exp and the product rounding on
    lo (|p exp(-hi)| ~ 1), plus lo^2/2 from log(1 + lo) ~ lo.
    """
    p = primes.astype(np.longdouble)
    hi = np.log(p)
    lo = p * np.exp(-hi) - 1
    err = (EXP_ULPS + 1.0) * _LD_EPS * (1 + np.abs(lo.astype(np.float64))) + lo.astype(np.float64) ** 2
    return hi, lo, err


@dataclass(frozen=True)
class ResidueClassSet:
    """A union of reduced residue classes modulo m, optionally cut to [lo, hi]."""

    m: int
    residues: frozenset
    interval: tuple | None = None

    def __post_init__(self):
        if self.m < 3:
            raise ValueError(f"modulus must be >= 3, got {self.m}")
        res = frozenset(int(a) % self.m for a in self.residues)
        if not res:
            raise ValueError("residue set is empty")
        bad = sorted(a for a in res if math.gcd(a, self.m) != 1)
        if bad:
            raise ValueError(f"residues {bad} are not coprime to {self.m}")
        object.__setattr__(self, "residues", res)
        if self.interval is not None:
            lo, hi = self.interval
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")

    @classmethod
    def all_reduced(cls, m: int) -> "ResidueClassSet":
        return cls(m, frozenset(a for a in range(1, m) if math.gcd(a, m) == 1))

    @property
    def phi(self) -> int:
        return euler_phi(self.m)

    def __contains__(self, p: int) -> bool:
        if p % self.m not in self.residues:
            return False
        if self.interval is not None:
            lo, hi = self.interval
            return lo <= p <= hi
        return True

    def restrict(self, lo, hi) -> "ResidueClassSet":
        if self.interval is not None:
            lo, hi = max(lo, self.interval[0]), min(hi, self.interval[1])
        return ResidueClassSet(self.m, self.residues, (lo, hi))

    def primes_upto(self, hi: int, lo: int = 2) -> np.ndarray:
        if self.interval is not None:
            lo = max(lo, math.ceil(self.interval[0]))
            hi = min(hi, math.floor(self.interval[1]))
        ps = primes_in_range(lo, hi)
        return ps[np.isin(ps % self.m, sorted(self.residues))]

    def to_dict(self) -> dict:
        d = {"m": self.m, "residues": sorted(self.residues)}
        if self.interval is not None:
            d["interval"] = list(self.interval)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ResidueClassSet":
        iv = d.get("interval")
        return cls(int(d["m"]), frozenset(d["residues"]), tuple(iv) if iv else None)


class ClassData:
    """Primes in one class a mod m with exact prefix sums of log p and log p/(p-1)."""

    def __init__(self, primes: np.ndarray, logs=None):
        self.primes = primes
        hi, lo, err = logs if logs is not None else corrected_logs(primes)
        self.log_prefix = ExactPrefix(hi, err, low=lo)
        d = (primes - 1).astype(np.longdouble)
        q = hi / d
        # division rounding (half an ulp of q, doubled for slack) plus the log error scaled by 1/(p-1)
        q_err = np.spacing(q).astype(np.float64) + err / d.astype(np.float64)
        self.sumlog_prefix = ExactPrefix(q, q_err, low=lo / d)

    def count(self, x) -> int:
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))


class SieveTable:
    """All primes up to ``limit`` with per-class views built on demand."""

    def __init__(self, limit: int, cache_dir: str | os.PathLike | None = None):
        if limit < 2:
            raise ValueError("sieve limit must be >= 2")
        self.limit = int(limit)
        cache_dir = cache_dir or os.environ.get(CACHE_ENV)
        path = Path(cache_dir) / f"primes_{self.limit}.npy" if cache_dir else None
        if path is not None and path.exists():
            self.primes = np.load(path)
        else:
            self.primes = np.concatenate(list(segmented_primes(2, self.limit)))
            if path is not None:
                path.parent.mkdir(parents=True, exist_ok=True)
                np.save(path, self.primes)
        self._classes: dict[int, dict[int, ClassData]] = {}
        self._logs = None

    def classes(self, m: int) -> dict[int, ClassData]:
        if m not in self._classes:
            if self._logs is None:
                self._logs = corrected_logs(self.primes)
            res = self.primes % m
            out = {}
            for a in range(1, m):
                if math.gcd(a, m) == 1:
                    sel = res == a
                    out[a] = ClassData(self.primes[sel], tuple(arr[sel] for arr in self._logs))
            self._classes[m] = out
        return self._classes[m]

    def _check(self, x) -> None:
        if x > self.limit:
            raise ValueError(f"x={x} exceeds sieve limit {self.limit}")

    def pi(self, x) -> int:
        self._check(x)
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))


_TABLES: dict[int, SieveTable] = {}


def get_table(limit: int) -> SieveTable:
    """Shared table covering ``limit``; grows geometrically, never shrinks."""
    for lim, tab in _TABLES.items():
        if lim >= limit:
            return tab
    size = max(1 << 16, 1 << (int(limit) - 1).bit_length())
    _TABLES.clear()
    _TABLES[size] = SieveTable(size)
    return _TABLES[size]


def _class_data(x, m, a, table):
    if math.gcd(a, m) != 1:
        raise ValueError(f"gcd({a}, {m}) != 1")
    table = table or get_table(max(2, math.floor(x)))
    table._check(x)
    return table.classes(m)[a % m]


def pi_ap(x, m: int, a: int, table: SieveTable | None = None) -> int:
    """pi(x; m, a): number of primes p <= x with p = a (mod m)."""
    if x < 2:
        return 0
    return _class_data(x, m, a, table).count(x)


def theta_ap(x, m: int, a: int, table: SieveTable | None = None) -> TrackedReal:
    """theta(x; m, a) = sum of log p over p <= x, p = a (mod m)."""
    if x < 2:
        return TrackedReal(mp.zero, 0.0)
    cd = _class_data(x, m, a, table)
    return cd.log_prefix.tracked(cd.count(x))


def psi_ap(x, m: int, a: int, table: SieveTable | None = None) -> TrackedReal:
    """psi(x; m, a): log p summed over prime powers p^k <= x with p^k = a (mod m)."""
    base = theta_ap(x, m, a, table)
    x = math.floor(x)
    extra = []
    for p in primes_in_range(2, math.isqrt(x)):
        p = int(p)
        pk = p * p
        while pk <= x:
            if pk % m == a % m:
                extra.append(mp.log(p))
            pk *= p
    tail = mp.fsum(extra)
    return TrackedReal(base.value + tail, base.radius + len(extra) * 2.0**-120)


def a_of_m(m: int) -> float:
    """Two-branch coefficient of the theta estimate valid for x >= max(sqrt(1865), m)."""
    if m < 3:
        raise ValueError("a(m) is defined for m >= 3")
    return THETA_SMALL_M if m <= 432 else THETA_LARGE_M


def strong_threshold(m: int) -> int:
    """max(m^phi(m), 1865): start of the range for the pi / theta(0.092) / sumlog estimates."""
    return max(m ** euler_phi(m), HYP_X)


def weak_threshold(m: int) -> int:
    """Smallest integer x with x >= max(sqrt(1865), m)."""
    return max(math.isqrt(HYP_X - 1) + 1, m)


@dataclass
class MarginRecord:
    check: str
    x: float
    m: int
    a: int
    lhs: float
    rhs: float
    margin: float
    margin_radius: float
    hypothesis_ok: bool

    @property
    def certified(self) -> bool:
        return self.hypothesis_ok and self.margin - self.margin_radius >= 0

    @property
    def violated(self) -> bool:
        return self.hypothesis_ok and self.margin + self.margin_radius < 0

    def to_dict(self) -> dict:
        return asdict(self)


CSV_COLUMNS = ("x", "m", "a", "lhs", "rhs", "margin", "margin_radius", "hypothesis_ok", "check")


def _record(check, x, m, a, lhs, rhs, radius, ok) -> MarginRecord:
    lhs, rhs = float(lhs), float(rhs)
    return MarginRecord(check, x, m, a, lhs, rhs, rhs - lhs, float(radius), bool(ok))


def pi_bound_rhs(x, m: int):
    x = mp.mpf(x)
    phi = euler_phi(m)
    s = mp.sqrt(x)
    return s * mp.log(x) / (8 * mp.pi) + s * (mp.log(m) / (2 * mp.pi) + mp.mpf(3) / phi + mp.mpf("0.341"))


def check_pi_bound(x, m: int, a: int, table=None, force: bool = False) -> MarginRecord:
    """|pi(x;m,a) - Li(x)/phi(m)| against sqrt(x) log x/(8 pi) + sqrt(x)(log m/(2 pi) + 3/phi + 0.341)."""
    ok = x >= strong_threshold(m)
    if not ok and not force:
        return _record("pi", x, m, a, math.nan, math.nan, 0.0, False)
    cnt = pi_ap(x, m, a, table)
    lhs = abs(cnt - li(x) / euler_phi(m))
    rhs = pi_bound_rhs(x, m)
    return _record("pi", x, m, a, lhs, rhs, 1e-25 * (1 + x), ok)


def check_theta_bounds(x, m: int, a: int, table=None, force: bool = False) -> list[MarginRecord]:
    """Both theta estimates: a(m) sqrt(x) log^2 x and the sharper 0.092 sqrt(x) log^2 x.

    Each record's ``hypothesis_ok`` says whether x is in that estimate's range;
    out-of-range rows carry NaN sides unless ``force`` is set.
    """
    phi = euler_phi(m)
    out = []
    th = None
    for check, coef, ok in (
        ("theta11", a_of_m(m), x >= weak_threshold(m)),
        ("theta12", THETA_STRONG, x >= strong_threshold(m)),
    ):
        if not ok and not force:
            out.append(_record(check, x, m, a, math.nan, math.nan, 0.0, False))
            continue
        th = th or theta_ap(x, m, a, table)
        lhs = abs(th.value - mp.mpf(x) / phi)
        rhs = mp.mpf(coef) * mp.sqrt(x) * mp.log(x) ** 2
        out.append(_record(check, x, m, a, lhs, rhs, th.radius + 1e-25 * (1 + x), ok))
    return out


def sum_logp_over_pm1(x, m: int, a: int, table=None, force: bool = False):
    """(sum of log p/(p-1) over p <= x in the class, margin record vs 6.550 + log m)."""
    if x < 2:
        s = TrackedReal(mp.zero, 0.0)
    else:
        cd = _class_data(x, m, a, table)
        s = cd.sumlog_prefix.tracked(cd.count(x))
    ok = x >= strong_threshold(m)
    if not ok and not force:
        return s, _record("sumlog", x, m, a, math.nan, math.nan, 0.0, False)
    lhs = abs(-s.value + mp.log(x) / euler_phi(m))
    rhs = mp.mpf("6.550") + mp.log(m)
    return s, _record("sumlog", x, m, a, lhs, rhs, s.radius + 1e-25, ok)


def vp_factorial_array(n: int, primes: np.ndarray) -> np.ndarray:
    """Legendre's formula vectorised over primes (no factorial is formed)."""
    v = np.zeros(len(primes), dtype=np.int64)
    q = np.full(len(primes), n, dtype=np.int64)
    p = primes.astype(np.int64)
    while True:
        q //= p
        if not q.any():
            return v
        v += q


def log_prod_factorial_norm(n: int, m: int, a: int, x, table=None, force: bool = False):
    """log prod_{p <= x, p = a (mod m)} |n!|_p, computed as -sum v_p(n!) log p.

    Only primes p <= min(x, n) contribute, since |n!|_p = 1 for p > n. Returns
    (value, margin record against the bound valid for n >= x >= max(m^phi(m), 1865)).
    """
    if n < 1:
        raise ValueError("n must be positive")
    cut = math.floor(min(x, n))
    value = mp.zero
    if cut >= 2:
        ps = primes_in_range(2, cut)
        ps = ps[ps % m == a % m]
        v = vp_factorial_array(n, ps)
        value = -mp.fsum(int(e) * mp.log(int(p)) for e, p in zip(v, ps))
    ok = n >= x >= strong_threshold(m)
    if not ok and not force:
        return value, _record("logprod", x, m, a, math.nan, math.nan, 0.0, False)
    phi = euler_phi(m)
    xm, nm = mp.mpf(x), mp.mpf(n)
    lhs = abs(value + nm * mp.log(xm) / phi)
    rhs = (
        (mp.mpf("6.550") + mp.log(m)) * nm
        + xm * mp.log(nm) / (phi * mp.log(xm))
        + xm / phi
        + (mp.mpf("2.539") + mp.mpf("5.440") / phi) * nm / mp.log(nm)
    )
    return value, _record("logprod", x, m, a, lhs, rhs, 1e-25 * (1 + n), ok)


def phi_lower_check(m_max: int) -> list[int]:
    """All 3 <= m <= m_max with phi(m) <= m^0.7 (compared exactly as phi^10 <= m^7)."""
    phi = totients_upto(m_max)
    return [m for m in range(3, m_max + 1) if int(phi[m]) ** 10 <= m**7]


def rosser_schoenfeld_check(m: int):
    """Margin of m/phi(m) < e^gamma log log m + 2.50637/log log m (128-bit)."""
    if m < 3:
        raise ValueError("m >= 3 required")
    ll = mp.log(mp.log(m))
    return mp.exp(mp.euler) * ll + mp.mpf("2.50637") / ll - mp.mpf(m) / euler_phi(m)


def rosser_schoenfeld_scan(m_max: int):
    """(min margin, argmin) over 3 <= m <= m_max; float64 screen, 128-bit recheck."""
    phi = totients_upto(m_max).astype(np.float64)
    ms = np.arange(3, m_max + 1, dtype=np.float64)
    ll = np.log(np.log(ms))
    margins = math.exp(0.5772156649015329) * ll + 2.50637 / ll - ms / phi[3:]
    order = np.argsort(margins)[:20]
    exact = [(rosser_schoenfeld_check(int(ms[i])), int(ms[i])) for i in order]
    return min(exact)


def find_prime_in_ap_interval(m: int, a: int, lo, hi, table: SieveTable | None = None):
    """Smallest prime p = a (mod m) with lo <= p <= hi, or None."""
    if math.gcd(a, m) != 1:
        # only a prime dividing m can sit in a non-reduced class
        hits = [p for p in range(2, m + 1) if m % p == 0 and is_prime(p) and p % m == a % m and lo <= p <= hi]
        return hits[0] if hits else None
    lo, hi = max(2, math.ceil(lo)), math.floor(hi)
    if hi < lo:
        return None
    if table is not None and hi <= table.limit:
        ps = table.classes(m)[a % m].primes
        i = int(np.searchsorted(ps, lo, side="left"))
        return int(ps[i]) if i < len(ps) and ps[i] <= hi else None
    if math.isqrt(hi) <= 10**7:
        for chunk in segmented_primes(lo, hi, window=1 << 20):
            hit = chunk[chunk % m == a % m]
            if len(hit):
                return int(hit[0])
        return None
    c = lo + (a - lo) % m
    while c <= hi:
        if is_prime(c):
            return c
        c += m
    return None


# ---------------------------------------------------------------------------
# vectorised scans over every integer x


@dataclass
class ScanSummary:
    check: str
    m: int
    a: int
    x_first: int | None = None
    x_last: int | None = None
    n_checked: int = 0
    n_uncertified: int = 0
    n_violations: int = 0
    min_margin: float = math.inf
    argmin_x: int | None = None
    max_radius: float = 0.0
    first_violation: int | None = None
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.n_uncertified == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d


def _start_of(check: str, m: int) -> int:
    return weak_threshold(m) if check == "theta11" else strong_threshold(m)


def _chunk_margins(check, m, a, cd, xs, xf, sq, lg, li_vals, li_rad):
    phi = euler_phi(m)
    idx = np.searchsorted(cd.primes, xs, side="right")
    if check == "pi":
        cnt = idx.astype(np.float64)
        lf = li_vals / phi
        lhs = np.abs(cnt - lf)
        rhs = sq * lg * PI_LOGX_COEF + sq * (math.log(m) / (2 * math.pi) + 3 / phi + PI_CONST)
        rad = li_rad / phi + 16 * U64 * (cnt + lf + rhs)
    elif check in ("theta11", "theta12"):
        th = cd.log_prefix.floats[idx]
        coef = a_of_m(m) if check == "theta11" else THETA_STRONG
        lhs = np.abs(th - xf / phi)
        rhs = coef * sq * lg * lg
        rad = cd.log_prefix.radius[idx] + 16 * U64 * (th + xf / phi + rhs)
    elif check == "sumlog":
        s = cd.sumlog_prefix.floats[idx]
        lhs = np.abs(lg / phi - s)
        rhs = np.full_like(lhs, SUMLOG_CONST + math.log(m))
        rad = cd.sumlog_prefix.radius[idx] + 16 * U64 * (s + lg / phi + rhs)
    else:
        raise ValueError(f"unknown check {check!r}")
    return lhs, rhs, rad


def scan_margins(
    table: SieveTable,
    m: int,
    classes=None,
    x_hi: int | None = None,
    x_lo: int = 2,
    checks=CHECKS,
    grid_step: int | None = None,
    workers: int = 1,
    chunk: int = SCAN_CHUNK,
) -> list[ScanSummary]:
    """Evaluate each check at every integer x in its hypothesis range within [x_lo, x_hi].

    ``grid_step`` additionally collects MarginRecord rows every that many x
    (measured from each check's start); violating rows are always collected.
    """
    x_hi = table.limit if x_hi is None else min(x_hi, table.limit)
    cds = table.classes(m)
    classes = sorted(cds) if classes is None else sorted(a % m for a in classes)
    for a in classes:
        if a not in cds:
            raise ValueError(f"{a} is not a reduced residue mod {m}")
    summaries = {(c, a): ScanSummary(c, m, a) for c in checks for a in classes}
    starts = {c: max(x_lo, _start_of(c, m)) for c in checks}
    active = [c for c in checks if starts[c] <= x_hi]
    if not active:
        return list(summaries.values())
    begin = min(starts[c] for c in active)
    need_li = "pi" in active

    def work(args):
        check, a, xs, xf, sq, lg, li_vals, li_rad = args
        s = summaries[(check, a)]
        sel = xs >= starts[check]
        if not sel.any():
            return
        xs, xf, sq, lg = xs[sel], xf[sel], sq[sel], lg[sel]
        lv = li_vals[sel] if li_vals is not None else None
        lr = li_rad[sel] if li_rad is not None else None
        lhs, rhs, rad = _chunk_margins(check, m, a, cds[a], xs, xf, sq, lg, lv, lr)
        margin = rhs - lhs
        if s.x_first is None:
            s.x_first = int(xs[0])
        s.x_last = int(xs[-1])
        s.n_checked += len(xs)
        unc = margin - rad < 0
        vio = margin + rad < 0
        s.n_uncertified += int(unc.sum())
        s.n_violations += int(vio.sum())
        i = int(np.argmin(margin))
        if margin[i] < s.min_margin:
            s.min_margin, s.argmin_x = float(margin[i]), int(xs[i])
        s.max_radius = max(s.max_radius, float(rad.max()))
        if vio.any() and s.first_violation is None:
            s.first_violation = int(xs[np.argmax(vio)])
        keep = vio.copy()
        if grid_step:
            keep |= (xs - starts[check]) % grid_step == 0
        for j in np.flatnonzero(keep):
            s.rows.append(
                MarginRecord(check, int(xs[j]), m, a, float(lhs[j]), float(rhs[j]),
                             float(margin[j]), float(rad[j]), True)
            )

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for c0 in range(begin, x_hi + 1, chunk):
            c1 = min(c0 + chunk - 1, x_hi)
            xs = np.arange(c0, c1 + 1, dtype=np.int64)
            xf = xs.astype(np.float64)
            sq, lg = np.sqrt(xf), np.log(xf)
            li_vals = li_rad = None
            if need_li and c1 >= starts["pi"]:
                li_vals, li_rad = li_on_integers(c0, c1)
            jobs = [(c, a, xs, xf, sq, lg, li_vals, li_rad) for c in active for a in classes]
            list(pool.map(work, jobs))
    return list(summaries.values())
