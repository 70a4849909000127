"""Diophantine exponents of vectors and measures, computed through the diagonal flow on lattices."""

__version__ = "0.1.0"

from .core import (DomainError, DyadicReal, TargetVector, gamma_of_v, gamma_sharp, parse_rational,
                   quantize, v_of_gamma)
from .correspondence import PrecisionError, trajectory
from .lattice import LatticeBasis, first_minimum, lll_reduce, shortest_vector
from .oracle import BudgetError, best_approximations

__all__ = [
    "DomainError", "DyadicReal", "TargetVector", "gamma_of_v", "gamma_sharp", "parse_rational",
    "quantize", "v_of_gamma", "PrecisionError", "trajectory", "LatticeBasis", "first_minimum",
    "lll_reduce", "shortest_vector", "BudgetError", "best_approximations", "__version__",
]
