"""Prime generation and primality testing.

Segmented Eratosthenes over numpy windows, Miller-Rabin with deterministic
bases below 3.3e24 (strong Lucas added above that, i.e. BPSW), and Pollard rho
for the occasional factorisation of an alpha-gcd.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator

import numpy as np

WINDOW = 1 << 22
SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981


def simple_sieve(n: int) -> np.ndarray:
    """All primes <= n as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    flags[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if flags[p]:
            flags[p * p :: 2 * p] = False
    return np.flatnonzero(flags).astype(np.int64)


def segmented_primes(lo: int, hi: int, window: int = WINDOW) -> Iterator[np.ndarray]:
    """Yield primes in [lo, hi] window by window, ascending."""
    lo = max(lo, 2)
    if hi < lo:
        return
    base = simple_sieve(math.isqrt(hi))
    start = lo
    while start <= hi:
        stop = min(start + window, hi + 1)
        flags = np.ones(stop - start, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= stop:
                break
            first = max(p * p, -(-start // p) * p)
            flags[first - start :: p] = False
        if start <= 1 < stop:
            flags[: 2 - start] = False
        yield np.flatnonzero(flags).astype(np.int64) + start
        start = stop


def primes_in_range(lo: int, hi: int) -> np.ndarray:
    chunks = list(segmented_primes(lo, hi))
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(chunks)


def _strong_probable_prime(n: int, a: int) -> bool:
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _strong_lucas(n: int) -> bool:
    # Selfridge parameters: first D in 5, -7, 9, -11, ... with (D/n) = -1
    D = 5
    while True:
        j = _jacobi(D, n)
        if j == -1:
            break
        if j == 0 and abs(D) != n:
            return False
        D = -D - 2 if D > 0 else -D + 2
        if D == 13 and math.isqrt(n) ** 2 == n:
            return False
    P, Q = 1, (1 - D) // 4
    d, s = n + 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1

    def half(x):
        return (x + n) // 2 % n if x % 2 else x // 2 % n

    U, V, Qk = 1, P, Q % n
    for bit in bin(d)[3:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = half(P * U + V), half(D * U + P * V)
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if V == 0:
            return True
    return False


def is_prime(n: int) -> bool:
    """Primality test; deterministic for n < 3.3e24, BPSW above."""
    if n < 2:
        return False
    for p in SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 41 * 41:
        return True
    if not all(_strong_probable_prime(n, a) for a in SMALL_PRIMES):
        return False
    if n < _MR_DETERMINISTIC_LIMIT:
        return True
    return _strong_lucas(n)


def _pollard_rho(n: int) -> int:
    if n % 2 == 0:
        return 2
    for c in range(1, 200):
        x = y = 2
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d
    raise ArithmeticError(f"pollard rho failed on {n}")


def prime_factors(n: int) -> set[int]:
    """Distinct prime divisors of |n| (n != 0)."""
    n = abs(n)
    if n == 0:
        raise ValueError("zero has no finite factorisation")
    out: set[int] = set()
    for p in range(2, 1000):
        if n % p == 0 and is_prime(p):
            out.add(p)
            while n % p == 0:
                n //= p
    stack = [n] if n > 1 else []
    while stack:
        x = stack.pop()
        if is_prime(x):
            out.add(x)
            continue
        d = _pollard_rho(x)
        stack.extend((d, x // d))
    return out


@lru_cache(maxsize=64)
def euler_phi(m: int) -> int:
    if m < 1:
        raise ValueError("phi defined for positive integers")
    result = m
    for p in prime_factors(m) if m > 1 else ():
        result -= result // p
    return result


def totients_upto(n: int) -> np.ndarray:
    """phi(0..n) by a multiplicative sieve."""
    phi = np.arange(n + 1, dtype=np.int64)
    for p in simple_sieve(n):
        phi[p::p] -= phi[p::p] // p
    return phi
