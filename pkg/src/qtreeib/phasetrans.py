"""Critical trade-off values of the Q-function and the tree phase transitions.

For a node t the function g_t(β) = ΔX(t) − βΔY(t) + Σ_children Q(c;β) is
continuous, concave and non-increasing, so Q(t;β) = min(g_t(β), 0) stays zero
up to a single crossing β^Q(t). Each child's Q is piecewise linear with kinks at
the child's surviving transitions, so the crossing is found by scanning the
intervals between those kinks bottom-up. A node record keeps the kinks of
Q(t;·) above β^Q(t) together with the information each one switches on.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .infotheory import InfoIncrements, masks_information
from .qsearch import qtree_masks
from .quadtree import level_paths

MERGE_RTOL = 1e-9


@dataclass(frozen=True)
class NodePTRecord:
    """Kinks of Q(t;·): ``local_betas[0] == beta_q_cr`` and entry j switches on
    (local_x[j], local_y[j]) of extra tree information for β > local_betas[j]."""

    beta_q_cr: float
    local_betas: tuple = ()
    local_x: tuple = ()
    local_y: tuple = ()
    origins: tuple = field(default=(), compare=False)

    def q_value(self, beta: float) -> float:
        """Q(t;β) rebuilt from the record."""
        k = bisect.bisect_left(self.local_betas, beta)
        return float(sum(x - beta * y for x, y in zip(self.local_x[:k], self.local_y[:k])))


@dataclass(frozen=True)
class PhaseTransitionSet:
    betas: tuple
    cum_x: tuple
    cum_y: tuple

    def __len__(self):
        return len(self.betas)

    def to_csv(self) -> str:
        lines = ["index,beta,cum_x,cum_y\n"]
        for i, (b, x, y) in enumerate(zip(self.betas, self.cum_x, self.cum_y), 1):
            lines.append(f"{i},{b:.9g},{x:.9g},{y:.9g}\n")
        return "".join(lines)


def _same_beta(a: float, b: float) -> bool:
    return abs(a - b) <= MERGE_RTOL * max(abs(a), abs(b))


def _node_record(t: str, dx: float, dy: float, child_records) -> NodePTRecord:
    # entries: (beta, origin, x, y); origin only breaks ties deterministically
    cands = sorted(
        (b, o, x, y)
        for rec in child_records
        for b, o, x, y in zip(rec.local_betas, rec.origins, rec.local_x, rec.local_y)
    )
    sx, sy = dx, dy
    lo = 0.0
    crossing = math.inf
    for i in range(len(cands) + 1):
        hi = cands[i][0] if i < len(cands) else math.inf
        if sy > 0 and sx / sy <= hi:
            crossing = max(sx / sy, lo)
            break
        if i < len(cands):
            sx += cands[i][2]
            sy += cands[i][3]
            lo = hi
    if math.isinf(crossing):
        return NodePTRecord(math.inf)

    head_x, head_y = dx, dy
    cut = crossing * (1.0 + MERGE_RTOL)
    rest = []
    for c in cands:
        if c[0] <= cut:
            head_x += c[2]
            head_y += c[3]
        else:
            rest.append(c)
    betas, origins, xs, ys = [crossing], [t], [head_x], [head_y]
    for b, o, x, y in rest:
        if _same_beta(b, betas[-1]):
            xs[-1] += x
            ys[-1] += y
        else:
            betas.append(b)
            origins.append(o)
            xs.append(x)
            ys.append(y)
    return NodePTRecord(crossing, tuple(betas), tuple(xs), tuple(ys), tuple(origins))


def node_records(inc: InfoIncrements) -> dict[str, NodePTRecord]:
    """Records for every interior node, computed bottom-up."""
    records: dict[str, NodePTRecord] = {}
    paths = level_paths(inc.ell)
    for k in range(inc.ell - 1, -1, -1):
        dx_k, dy_k = inc.dx[k], inc.dy[k]
        for (r, c), t in np.ndenumerate(paths[k]):
            kids = [records[t + d] for d in "0123"] if k + 1 < inc.ell else []
            records[t] = _node_record(t, float(dx_k[r, c]), float(dy_k[r, c]), kids)
    return records


def _pts_from_record(rec: NodePTRecord) -> PhaseTransitionSet:
    return PhaseTransitionSet(
        tuple(float(b) for b in rec.local_betas),
        tuple(float(v) for v in np.cumsum(rec.local_x)),
        tuple(float(v) for v in np.cumsum(rec.local_y)),
    )


def tree_phase_transitions(inc: InfoIncrements) -> PhaseTransitionSet:
    if inc.ell == 0:
        return PhaseTransitionSet((), (), ())
    return _pts_from_record(node_records(inc)[""])


def beta_q_critical(inc: InfoIncrements, t: str, records: dict | None = None) -> float:
    if len(t) >= inc.ell:
        return math.inf
    if records is None:
        records = node_records(inc)
    return records[t].beta_q_cr


# ---------------------------------------------------------------------------
# independent oracle: locate selection changes of Q-tree search by bisection


def _signature(inc: InfoIncrements, beta: float) -> bytes:
    return b"".join(np.packbits(m).tobytes() for m in qtree_masks(inc, beta))


def default_grid(inc: InfoIncrements, num: int = 1001) -> np.ndarray:
    """Uniform grid from 0 to a β at which Q-tree search keeps all of I(X;Y)."""
    upper = 1.0
    total = inc.total_y
    while masks_information(qtree_masks(inc, upper), inc)[1] < total - 1e-12 and upper < 1e15:
        upper *= 2.0
    return np.linspace(0.0, 2.0 * upper, num)


def sweep_transition_oracle(inc: InfoIncrements, grid=None, width: float = 1e-9) -> list[tuple[float, float]]:
    """Brackets (lo, hi], each narrower than ``width``, where the Q-tree selection changes."""
    grid = default_grid(inc) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly ascending")
    out: list[tuple[float, float]] = []

    def refine(lo, s_lo, hi, s_hi):
        if s_lo == s_hi:
            return
        if hi - lo <= width:
            out.append((float(lo), float(hi)))
            return
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            out.append((float(lo), float(hi)))
            return
        s_mid = _signature(inc, mid)
        refine(lo, s_lo, mid, s_mid)
        refine(mid, s_mid, hi, s_hi)

    sigs = [_signature(inc, b) for b in grid]
    for i in range(len(grid) - 1):
        refine(grid[i], sigs[i], grid[i + 1], sigs[i + 1])
    return out


# ---------------------------------------------------------------------------


def dual_value_from_pts(pts: PhaseTransitionSet, D: float, beta: float) -> float:
    """Dual function from the transitions: the tree just below β fixes the line."""
    beta = float(beta)
    if beta < 0:
        raise ValueError("beta must be non-negative")
    i = bisect.bisect_left(pts.betas, beta)
    if i == 0:
        return beta * D
    return pts.cum_x[i - 1] + beta * (D - pts.cum_y[i - 1])


def node_critical_table(inc: InfoIncrements) -> list[tuple[str, float]]:
    """(path, β^Q) for every interior node in lexicographic order."""
    recs = node_records(inc)
    return sorted((t, r.beta_q_cr) for t, r in recs.items())
