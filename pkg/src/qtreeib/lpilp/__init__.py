"""Integer-program view of tree selection: model, exact enumeration, LP relaxations, TU checks."""

from .ilp import (
    IlpModel,
    LpSolution,
    build_ilp,
    export_model,
    hierarchy_matrix,
    lp_dual_beta,
    lp_dual_function,
    solve_ilp_bruteforce,
    solve_lp_relaxation,
    solve_lp_soft,
)
from .unimodular import incidence_witness, tu_check

__all__ = [
    "IlpModel",
    "LpSolution",
    "build_ilp",
    "export_model",
    "hierarchy_matrix",
    "incidence_witness",
    "lp_dual_beta",
    "lp_dual_function",
    "solve_ilp_bruteforce",
    "solve_lp_relaxation",
    "solve_lp_soft",
    "tu_check",
]
