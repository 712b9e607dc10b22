"""Evaluation backends: exhaustive enumeration and bit-blasted projected counting."""

from .circuit import Circuit, CircuitBuilder, bitblast
from .cnf import CnfFormula, to_cnf
from .counting import (count_program, cross_check, enumeration_count, enumeration_pairs,
                       projected_count, projected_models)
from .sat import Solver, solve_cnf

__all__ = [
    "Circuit", "CircuitBuilder", "CnfFormula", "Solver", "bitblast", "count_program",
    "cross_check", "enumeration_count", "enumeration_pairs", "projected_count",
    "projected_models", "solve_cnf", "to_cnf",
]
