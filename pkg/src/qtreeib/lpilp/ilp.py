"""The tree-selection integer program, its exact enumeration, and its LP relaxations.

Variables are the expansion indicators z_t of interior nodes in lexicographic
path order. A hierarchy row z_child − z_parent ≤ 0 is generated for every
parent whose children are themselves interior, i.e. parents of depth ≤ ell−2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..dualsolver import FEAS_TOL, InfeasibleConstraintError
from ..infotheory import InfoIncrements
from ..quadtree import MAX_ENUMERATION_DEPTH, TreeSelection, interior_index, interior_nodes, tree_matrix
from .simplex import solve_lp

INTEGRALITY_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class IlpModel:
    ell: int
    num_vars: int
    hierarchy_rows: tuple  # (child_index, parent_index)
    delta_x_vec: np.ndarray
    delta_y_vec: np.ndarray
    D: float

    @property
    def nodes(self) -> tuple[str, ...]:
        return interior_nodes(self.ell)


@dataclass(frozen=True, eq=False)
class LpSolution:
    z: np.ndarray
    objective: float
    dual_beta: float
    status: str
    iterations: int = 0

    def is_integral(self, tol: float = INTEGRALITY_TOL) -> bool:
        return bool(np.all(np.minimum(np.abs(self.z), np.abs(self.z - 1.0)) <= tol))


def build_ilp(inc: InfoIncrements, D: float) -> IlpModel:
    nodes = interior_nodes(inc.ell)
    idx = interior_index(inc.ell)
    rows = tuple(
        (idx[t + d], idx[t]) for t in nodes if len(t) <= inc.ell - 2 for d in "0123"
    )
    dx, dy = inc.vectors()
    dx.setflags(write=False)
    dy.setflags(write=False)
    return IlpModel(inc.ell, len(nodes), rows, dx, dy, float(D))


def hierarchy_matrix(model: IlpModel, sparse: bool = False):
    """The matrix A of the rows A z ≤ 0: +1 at the child, −1 at the parent."""
    k = len(model.hierarchy_rows)
    if k:
        child, par = np.array(model.hierarchy_rows).T
    else:
        child = par = np.zeros(0, dtype=np.int64)
    r = np.arange(k)
    A = sp.csr_matrix(
        (np.concatenate([np.ones(k), -np.ones(k)]), (np.concatenate([r, r]), np.concatenate([child, par]))),
        shape=(k, model.num_vars),
    )
    return A if sparse else A.toarray().astype(np.int64)


def solve_ilp_bruteforce(model: IlpModel) -> tuple[TreeSelection, float]:
    """Exact v(D) by enumerating every valid 0/1 z; ties go to the lexicographically
    smallest sorted expanded list."""
    if model.ell > MAX_ENUMERATION_DEPTH:
        raise ValueError(f"enumeration is limited to ell <= {MAX_ENUMERATION_DEPTH}")
    Z = tree_matrix(model.ell)
    ix = Z @ model.delta_x_vec
    iy = Z @ model.delta_y_vec
    feasible = iy >= model.D - FEAS_TOL
    if not feasible.any():
        raise InfeasibleConstraintError(f"no tree reaches D={model.D!r}")
    v = float(ix[feasible].min())
    rows = np.flatnonzero(feasible & (ix <= v + 1e-12))
    best = min((TreeSelection.from_z(model.ell, Z[r]) for r in rows), key=TreeSelection.sorted_expanded)
    return best, v


def solve_lp_relaxation(model: IlpModel, pricing: str = "bland") -> LpSolution:
    """min z'Δ_X  s.t.  z'Δ_Y ≥ D, A z ≤ 0, 0 ≤ z ≤ 1, with the multiplier of the D row."""
    A = hierarchy_matrix(model, sparse=True)
    rows = sp.vstack([A, sp.csr_matrix(model.delta_y_vec.reshape(1, -1))]).tocsr()
    senses = ["<"] * A.shape[0] + [">"]
    b = np.concatenate([np.zeros(A.shape[0]), [model.D]])
    # a hair of slack so that D = I(X;Y) survives summation-order rounding
    total = float(model.delta_y_vec.sum())
    if total < model.D <= total + FEAS_TOL:
        b[-1] = total
    # the full tree is feasible whenever D <= I(X;Y), so start there
    full = np.ones(model.num_vars, dtype=bool)
    res = solve_lp(model.delta_x_vec, rows, senses, b, np.ones(model.num_vars), pricing=pricing, start_at_upper=full)
    if res.status != "optimal":
        return LpSolution(res.x, res.objective, np.nan, res.status, res.iterations)
    z = np.clip(res.x, 0.0, 1.0) + 0.0
    return LpSolution(z, res.objective, max(0.0, float(res.duals[-1])), "optimal", res.iterations)


def solve_lp_soft(model: IlpModel, beta: float, pricing: str = "bland") -> LpSolution:
    """min z'(Δ_X − βΔ_Y)  s.t.  A z ≤ 0, 0 ≤ z ≤ 1.  ``dual_beta`` echoes β."""
    beta = float(beta)
    if not beta >= 0:
        raise ValueError("beta must be non-negative")
    A = hierarchy_matrix(model, sparse=True)
    c = model.delta_x_vec - beta * model.delta_y_vec
    res = solve_lp(c, A, ["<"] * A.shape[0], np.zeros(A.shape[0]), np.ones(model.num_vars), pricing=pricing)
    return LpSolution(np.clip(res.x, 0.0, 1.0) + 0.0, res.objective, beta, res.status, res.iterations)


def lp_dual_beta(model: IlpModel, pricing: str = "bland") -> float:
    sol = solve_lp_relaxation(model, pricing=pricing)
    if sol.status != "optimal":
        raise InfeasibleConstraintError(f"LP relaxation is {sol.status} at D={model.D!r}")
    return sol.dual_beta


def lp_dual_function(model: IlpModel, beta: float) -> float:
    """d̄(β) = β·D + min over the box-and-hierarchy polytope of z'(Δ_X − βΔ_Y)."""
    return solve_lp_soft(model, beta).objective + float(beta) * model.D


def export_model(model: IlpModel) -> str:
    """Free-form MPS text of the LP relaxation, for external cross-checks."""
    names = [f"z{i}" for i in range(model.num_vars)]
    out = ["NAME          QTREEIB", "ROWS", " N  COST", " G  RELEV"]
    out += [f" L  H{k}" for k in range(len(model.hierarchy_rows))]
    coeffs: list[list[tuple[str, float]]] = [[] for _ in range(model.num_vars)]
    for i in range(model.num_vars):
        coeffs[i].append(("COST", float(model.delta_x_vec[i])))
        coeffs[i].append(("RELEV", float(model.delta_y_vec[i])))
    for k, (ch, par) in enumerate(model.hierarchy_rows):
        coeffs[ch].append((f"H{k}", 1.0))
        coeffs[par].append((f"H{k}", -1.0))
    out.append("COLUMNS")
    for i, name in enumerate(names):
        for row, v in coeffs[i]:
            out.append(f"    {name}  {row}  {v:.17g}")
    out.append("RHS")
    out.append(f"    RHS  RELEV  {model.D:.17g}")
    out.append("BOUNDS")
    out += [f" UP BND  {name}  1" for name in names]
    out.append("ENDATA")
    return "\n".join(out) + "\n"
