"""Lagrangian dual of the hard-constrained tree problem.

The primal asks for the cheapest tree (in I_X) that keeps at least D bits of
relevant information. Relaxing that constraint with a multiplier β gives a
concave piecewise-linear dual whose kinks are exactly the tree phase
transitions, so the dual optimum can be read off the transition table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .envmodel import Environment
from .infotheory import InfoIncrements, compute_increments, masks_information, tree_information
from .phasetrans import PhaseTransitionSet, tree_phase_transitions
from .qsearch import compute_q, qtree_masks, qtree_search
from .quadtree import MAX_ENUMERATION_DEPTH, TreeSelection, tree_matrix

D_CLAMP_TOL = 1e-12
STRONG_TOL = 1e-9
# slack on the relevance constraint when comparing floating-point sums
FEAS_TOL = 1e-12


class InfeasibleConstraintError(ValueError):
    """D exceeds I(X;Y): no tree can keep that much relevant information."""


def check_D(D: float, total_y: float) -> float:
    D = float(D)
    if not math.isfinite(D) or D < 0:
        raise ValueError(f"D must be a non-negative number, got {D!r}")
    if D > total_y:
        if D - total_y <= D_CLAMP_TOL:
            return total_y
        raise InfeasibleConstraintError(f"D={D!r} exceeds I(X;Y)={total_y!r}")
    return D


@dataclass(frozen=True)
class DualSolution:
    beta_star: float
    d_star: float
    j_star: int
    D: float
    gap: float | None = None


def dual_function(inc: InfoIncrements, beta: float, D: float) -> float:
    D = check_D(D, inc.total_y)
    return compute_q(inc, beta).root + float(beta) * D


def lagrangian(sel: TreeSelection, inc: InfoIncrements, beta: float, D: float) -> float:
    ix, iy = tree_information(sel, inc)
    return ix + float(beta) * (float(D) - iy)


def solve_dual(pts: PhaseTransitionSet, D: float, total_y: float | None = None) -> DualSolution:
    """Maximize the dual by the subgradient case split over the transition table.

    ``j_star`` indexes ``pts.betas`` (0-based); the reported line is the one of
    the tree just below ``beta_star``.
    """
    if total_y is None:
        total_y = pts.cum_y[-1] if pts.cum_y else 0.0
    D = check_D(D, total_y)
    n = len(pts.betas)
    if n == 0:
        # constant dual: every β ≥ 0 is optimal and d = 0
        return DualSolution(0.0, 0.0, 0, D)
    cy, cx = pts.cum_y, pts.cum_x
    if D < cy[0]:
        j = 0
    elif D >= cy[-1]:
        # one line before the last kink; it meets the last line at betas[-1]
        j = n - 1
    else:
        j = max(i + 1 for i in range(n) if D - cy[i] >= 0)
    beta_star = float(pts.betas[j])
    if j == 0:
        d_star = beta_star * D
    else:
        d_star = cx[j - 1] + beta_star * (D - cy[j - 1])
    return DualSolution(beta_star, float(d_star), j, D)


def maximize_dual_bisection(inc: InfoIncrements, D: float, rtol: float = 1e-13) -> tuple[float, float]:
    """Dual optimum from Q-tree searches alone, without the transition table.

    The Everett tree at β has I_Y(T_β) non-decreasing in β and D − I_Y(T_β) is
    a supergradient of the dual there, so the maximizer is where I_Y(T_β)
    first reaches D. Returns (β, d(β)).
    """
    D = check_D(D, inc.total_y)

    def reaches(beta):
        return masks_information(qtree_masks(inc, beta), inc)[1] >= D - FEAS_TOL

    if reaches(0.0):
        return 0.0, 0.0
    hi = 1.0
    while not reaches(hi):
        hi *= 2.0
        if hi > 1e300:
            raise InfeasibleConstraintError(f"no Everett tree reaches D={D!r}")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return hi, dual_function(inc, hi, D)


def strong_duality_holds(pts: PhaseTransitionSet, D: float) -> bool:
    D = float(D)
    if D == 0:
        return True
    return any(abs(D - y) <= STRONG_TOL for y in pts.cum_y)


def everett_pair(inc: InfoIncrements, beta: float) -> tuple[TreeSelection, float]:
    sel = qtree_search(inc, beta)
    return sel, tree_information(sel, inc)[1]


def primal_value_bruteforce(inc: InfoIncrements, D: float) -> tuple[TreeSelection, float]:
    """Exact v(D) = min I_X over trees with I_Y ≥ D, by enumeration (ell ≤ 3).

    Ties go to the lexicographically smallest sorted expanded list.
    """
    if inc.ell > MAX_ENUMERATION_DEPTH:
        raise ValueError(f"enumeration is limited to ell <= {MAX_ENUMERATION_DEPTH}")
    D = check_D(D, inc.total_y)
    Z = tree_matrix(inc.ell)
    dx, dy = inc.vectors()
    ix = Z @ dx
    iy = Z @ dy
    feasible = iy >= D - FEAS_TOL
    if not feasible.any():
        raise InfeasibleConstraintError(f"no tree reaches D={D!r}")
    v = float(ix[feasible].min())
    # candidates within rounding of the minimum, then the deterministic tie-break
    rows = np.flatnonzero(feasible & (ix <= v + 1e-12))
    sels = [TreeSelection.from_z(inc.ell, Z[r]) for r in rows]
    best = min(sels, key=lambda s: s.sorted_expanded())
    return best, v


def duality_gap(env: Environment, D: float, inc: InfoIncrements | None = None, pts=None) -> tuple[float, float, float]:
    """(v, d_star, gap); v and gap are NaN beyond the enumeration depth."""
    inc = compute_increments(env) if inc is None else inc
    pts = tree_phase_transitions(inc) if pts is None else pts
    D = check_D(D, inc.total_y)
    if not pts.betas and D > 0:
        raise InfeasibleConstraintError("no finite phase transition: I(X;Y) is zero")
    d_star = solve_dual(pts, D, inc.total_y).d_star
    if inc.ell > MAX_ENUMERATION_DEPTH:
        return math.nan, d_star, math.nan
    v = primal_value_bruteforce(inc, D)[1]
    return v, d_star, v - d_star


def recover_primal_feasible(
    inc: InfoIncrements, pts: PhaseTransitionSet, D: float, epsilon: float | None = None
) -> tuple[TreeSelection, float]:
    """A feasible tree from the soft problem near β*, with a bound on its suboptimality.

    The tree at β* itself is tried first; it is feasible whenever D sits on a
    transition's cumulative (including D = 0). Otherwise the search runs at
    β* + ε, just past the breakpoint. The bound is β(I_Y(T) − D).
    """
    D = check_D(D, inc.total_y)
    if not pts.betas:
        if D > 0:
            raise InfeasibleConstraintError("no finite phase transition: I(X;Y) is zero")
        return TreeSelection.root(inc.ell), 0.0
    sol = solve_dual(pts, D, inc.total_y)
    beta = sol.beta_star
    sel = qtree_search(inc, beta)
    iy = tree_information(sel, inc)[1]
    if iy < D - FEAS_TOL:
        eps = max(1e-9, 1e-9 * beta) if epsilon is None else float(epsilon)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        beta = beta + eps
        sel = qtree_search(inc, beta)
        iy = tree_information(sel, inc)[1]
        if iy < D - FEAS_TOL:
            raise RuntimeError(f"epsilon={eps!r} did not cross the phase transition at {sol.beta_star!r}")
    return sel, max(beta * (iy - D), 0.0)
