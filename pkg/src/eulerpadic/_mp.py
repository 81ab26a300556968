"""Private mpmath context so library precision never leaks into callers."""

from fractions import Fraction

from mpmath import MPContext

# 128-bit mantissa; every log-space quantity in the package goes through here.
WORKING_PREC = 128

mp = MPContext()
mp.prec = WORKING_PREC


def mpf(x):
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / x.denominator
    return mp.mpf(x)


def log_fraction(q: Fraction):
    """Natural log of a positive rational, from its exact numerator/denominator."""
    if q <= 0:
        raise ValueError("log of non-positive rational")
    return mp.log(q.numerator) - mp.log(q.denominator)


def to_str(x, digits: int = 40) -> str:
    return mp.nstr(x, digits)
