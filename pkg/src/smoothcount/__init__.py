"""Count and estimate Psi(x, y), the number of y-smooth integers up to x."""
from .api import METHODS, estimate, exact_estimate, primes_upto
from .dickman import RhoTable, build_rho, estimate_dickman, rho
from .ennola import EnnolaTable, estimate_ennola, precompute_dtable
from .errors import (BudgetExceeded, CorruptTable, InsufficientPrecision, NeedsPrecompute,
                     NoConvergence, OutOfRange, ResourceError, SmoothCountError,
                     UnsupportedVersion)
from .estimate import Estimate
from .exact_count import psi_bruteforce, psi_exact
from .primes import PrimeTable
from .saddlepoint import estimate_ht, estimate_htalpha, estimate_htfast
from .selector import SelectorPolicy, recommend
from .store import load_dtable, load_rho, save_dtable, save_rho

__version__ = "0.1.0"

__all__ = [
    "METHODS", "estimate", "exact_estimate", "primes_upto",
    "RhoTable", "build_rho", "estimate_dickman", "rho",
    "EnnolaTable", "estimate_ennola", "precompute_dtable",
    "BudgetExceeded", "CorruptTable", "InsufficientPrecision", "NeedsPrecompute",
    "NoConvergence", "OutOfRange", "ResourceError", "SmoothCountError", "UnsupportedVersion",
    "Estimate", "psi_bruteforce", "psi_exact", "PrimeTable",
    "estimate_ht", "estimate_htalpha", "estimate_htfast",
    "SelectorPolicy", "recommend",
    "load_dtable", "load_rho", "save_dtable", "save_rho",
]
