"""Exact p-adic machinery for Euler's factorial series F(t) = sum n! t^n.

Padé approximations, explicit estimates for primes in progressions, the
constant ledger of the lower bounds, and nonvanishing certificates.
"""

from .padic import (
    Certificate,
    LinearFormInstance,
    PadicApprox,
    certify_nonzero,
    eval_Fp,
    eval_linear_form,
    factorial_tail_cutoff,
    vp_factorial,
    vp_int,
)
from .primes_ap import ResidueClassSet, SieveTable
from .sieve import euler_phi, is_prime

__all__ = [
    "Certificate",
    "LinearFormInstance",
    "PadicApprox",
    "ResidueClassSet",
    "SieveTable",
    "certify_nonzero",
    "euler_phi",
    "eval_Fp",
    "eval_linear_form",
    "factorial_tail_cutoff",
    "is_prime",
    "vp_factorial",
    "vp_int",
]
__version__ = "0.1.0"
