"""Two-phase revised simplex for  min c'x  s.t. rows (<=, >=, =), 0 <= x <= u.

Upper bounds are handled implicitly (nonbasic variables sit at either bound and
may flip without a basis change), so ``z <= 1`` never becomes a row. The basis
inverse is kept as a sparse LU factorization plus a short product-form eta file
and refactored periodically. Pricing defaults to Bland's rule, which rules out
cycling on the heavily degenerate hierarchy rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

PIVOT_TOL = 1e-10
COST_TOL = 1e-10
PHASE1_TOL = 1e-9
REFACTOR_EVERY = 32


@dataclass(frozen=True)
class SimplexResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray
    objective: float
    duals: np.ndarray  # d objective / d b_i for the original rows
    iterations: int


class _Basis:
    """Factorized basis with product-form updates."""

    def __init__(self, A: sp.csc_matrix, cols: np.ndarray):
        self.A = A
        self.m = A.shape[0]
        self.refactor(cols)

    def refactor(self, cols):
        self.cols = np.asarray(cols, dtype=np.int64)
        self.etas: list[tuple[int, np.ndarray]] = []
        if self.m:
            B = self.A[:, self.cols].tocsc()
            self.lu = splu(B, permc_spec="COLAMD")

    def ftran(self, v: np.ndarray) -> np.ndarray:
        if not self.m:
            return np.zeros(0)
        x = self.lu.solve(np.asarray(v, dtype=float))
        for r, pivot, idx, vals in self.etas:
            xr = x[r] / pivot
            x[idx] -= vals * xr
            x[r] = xr
        return x

    def btran(self, c: np.ndarray) -> np.ndarray:
        if not self.m:
            return np.zeros(0)
        c = np.array(c, dtype=float)
        for r, pivot, idx, vals in reversed(self.etas):
            # row vector times the eta matrix only changes entry r
            c[r] = (c[r] - c[idx] @ vals) / pivot
        return self.lu.solve(c, trans="T")

    def replace(self, r: int, j: int, alpha: np.ndarray):
        self.cols = self.cols.copy()
        self.cols[r] = j
        idx = np.flatnonzero(alpha)
        idx = idx[idx != r]
        self.etas.append((r, float(alpha[r]), idx, alpha[idx].copy()))
        if len(self.etas) >= REFACTOR_EVERY:
            self.refactor(self.cols)


def solve_lp(
    c, A, senses, b, upper, pricing: str = "bland", start_at_upper=None, max_iter: int | None = None
) -> SimplexResult:
    """Solve  min c'x  subject to  A x (senses) b,  0 <= x <= upper.

    ``senses`` holds one of ``"<"``, ``">"``, ``"="`` per row; ``upper`` may
    contain ``np.inf``. ``start_at_upper`` optionally marks structural
    variables that start nonbasic at their (finite) upper bound; rows whose
    slack is then non-negative need no artificial variable.
    """
    c = np.asarray(c, dtype=float)
    A = sp.csr_matrix(A, dtype=float)
    b = np.asarray(b, dtype=float)
    upper = np.asarray(upper, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or upper.shape != (n,) or b.shape != (m,) or len(senses) != m:
        raise ValueError("inconsistent LP dimensions")
    if pricing not in ("bland", "dantzig"):
        raise ValueError(f"unknown pricing rule {pricing!r}")

    # row equilibration and sign normalization (b >= 0)
    row_max = np.zeros(m)
    if m and n:
        row_max = np.asarray(abs(A).max(axis=1).todense()).ravel()
    scale = np.where(row_max > 0, row_max, 1.0)
    x0 = np.zeros(n)
    if start_at_upper is not None:
        start_at_upper = np.asarray(start_at_upper, dtype=bool)
        if np.any(~np.isfinite(upper[start_at_upper])):
            raise ValueError("cannot start at an infinite upper bound")
        x0[start_at_upper] = upper[start_at_upper]
    # residual the basic variables must absorb at the starting point
    resid = b - A @ x0
    # rows are flipped so that the residual is >= 0; a ">" row with zero
    # residual is flipped too so its slack can start basic
    ge = np.array([s == ">" for s in senses], dtype=bool)
    sign = np.where((resid < 0) | ((resid == 0) & ge), -1.0, 1.0)
    f = sign / scale
    A_s = sp.diags(f) @ A
    b_s = b * f
    cost_scale = float(np.max(np.abs(c))) if c.size and np.any(c) else 1.0
    c_s = c / cost_scale

    slack_rows, slack_sign = [], []
    for i, s in enumerate(senses):
        if s == "<":
            slack_rows.append(i)
            slack_sign.append(sign[i])
        elif s == ">":
            slack_rows.append(i)
            slack_sign.append(-sign[i])
        elif s != "=":
            raise ValueError(f"unknown row sense {s!r}")
    n_slack = len(slack_rows)
    S = sp.csr_matrix((slack_sign, (slack_rows, np.arange(n_slack))), shape=(m, n_slack))

    basic_of_row = np.full(m, -1, dtype=np.int64)
    for k, (i, sg) in enumerate(zip(slack_rows, slack_sign)):
        if sg > 0:
            basic_of_row[i] = n + k
    art_rows = np.flatnonzero(basic_of_row < 0)
    n_art = len(art_rows)
    R = sp.csr_matrix((np.ones(n_art), (art_rows, np.arange(n_art))), shape=(m, n_art))
    basic_of_row[art_rows] = n + n_slack + np.arange(n_art)

    A_full = sp.hstack([A_s, S, R]).tocsc()
    A_full.sort_indices()
    AT = A_full.T.tocsr()
    indptr, indices, data = A_full.indptr, A_full.indices, A_full.data

    def column(j):
        col = np.zeros(m)
        lo, hi = indptr[j], indptr[j + 1]
        col[indices[lo:hi]] = data[lo:hi]
        return col
    N = n + n_slack + n_art
    u = np.concatenate([upper, np.full(n_slack, np.inf), np.full(n_art, np.inf)])
    if np.any(u < 0):
        raise ValueError("upper bounds must be non-negative")

    at_upper = np.zeros(N, dtype=bool)
    if start_at_upper is not None:
        at_upper[:n] = start_at_upper
    basis = _Basis(A_full, basic_of_row)
    is_basic = np.zeros(N, dtype=bool)
    is_basic[basic_of_row] = True
    limit = max_iter if max_iter is not None else 50 * (m + N) + 1000
    it = 0

    def basic_values():
        xn = np.where(at_upper & ~is_basic, u, 0.0)
        xn[~np.isfinite(xn)] = 0.0
        return basis.ftran(b_s - A_full @ xn)

    def run(cost) -> str:
        nonlocal it
        xb = basic_values()
        fresh = False
        while it < limit:
            if not fresh:
                y = basis.btran(cost[basis.cols])
                d = cost - AT @ y
            fresh = False
            movable = ~is_basic & (u > 0)
            improving = movable & (((~at_upper) & (d < -COST_TOL)) | (at_upper & (d > COST_TOL)))
            cand = np.flatnonzero(improving)
            if cand.size == 0:
                return "optimal"
            j = int(cand[0]) if pricing == "bland" else int(cand[np.argmax(np.abs(d[cand]))])
            sigma = -1.0 if at_upper[j] else 1.0
            alpha = basis.ftran(column(j))
            delta = -sigma * alpha
            ub = u[basis.cols]
            t = np.full(m, np.inf)
            dec = delta < -PIVOT_TOL
            t[dec] = np.maximum(xb[dec], 0.0) / -delta[dec]
            inc = (delta > PIVOT_TOL) & np.isfinite(ub)
            t[inc] = np.maximum(ub[inc] - xb[inc], 0.0) / delta[inc]
            t_min = t.min() if m else np.inf
            if u[j] <= t_min:
                if not np.isfinite(u[j]):
                    return "unbounded"
                xb += delta * u[j]
                at_upper[j] = not at_upper[j]
                it += 1
                # same basis, so the reduced costs are still valid
                fresh = True
                continue
            # Bland: among tied rows leave the lowest-indexed variable
            tied = np.flatnonzero(t <= t_min + 1e-12 * max(1.0, t_min))
            r = int(tied[np.argmin(basis.cols[tied])])
            leaving = int(basis.cols[r])
            xb += delta * t_min
            at_upper[leaving] = bool(inc[r])
            is_basic[leaving] = False
            entering_value = u[j] - t_min if at_upper[j] else t_min
            at_upper[j] = False
            is_basic[j] = True
            basis.replace(r, j, alpha)
            xb[r] = entering_value
            it += 1
            if not basis.etas:
                xb = basic_values()
        return "iteration_limit"

    def primal():
        x = np.where(at_upper, u, 0.0)
        x[~np.isfinite(x)] = 0.0
        x[basis.cols] = basic_values()
        return x

    if n_art:
        cost1 = np.zeros(N)
        cost1[n + n_slack :] = 1.0
        status = run(cost1)
        if status != "optimal":
            return SimplexResult(status, np.full(n, np.nan), np.nan, np.full(m, np.nan), it)
        x = primal()
        if x[n + n_slack :].sum() > PHASE1_TOL:
            return SimplexResult("infeasible", np.full(n, np.nan), np.nan, np.full(m, np.nan), it)
        # artificials are pinned at zero for phase 2
        u[n + n_slack :] = 0.0
        at_upper[n + n_slack :] = False

    cost2 = np.concatenate([c_s, np.zeros(n_slack + n_art)])
    status = run(cost2)
    if status != "optimal":
        return SimplexResult(status, np.full(n, np.nan), np.nan, np.full(m, np.nan), it)
    x = primal()[:n]
    y = basis.btran(cost2[basis.cols]) * cost_scale * f
    return SimplexResult("optimal", x, float(c @ x), y, it)
