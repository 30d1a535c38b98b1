"""Exact computations for the Virasoro algebra, its vacuum vertex algebra,
sphere correlators of the stress tensor, and the annulus and one-loop
integrals behind the central extension."""

from .exact_arith import CPoly, Rat, TruncLaurent, as_rat
from .vacuum_module import StateVector
from .virasoro_pbw import PBWVector, VirElement, straighten, vir_bracket

__all__ = [
    "CPoly",
    "PBWVector",
    "Rat",
    "StateVector",
    "TruncLaurent",
    "VirElement",
    "as_rat",
    "straighten",
    "vir_bracket",
]

__version__ = "0.1.0"
