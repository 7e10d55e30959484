"""Entropy, divergences and the per-node information increments of a quadtree.

All quantities are in bits, with the convention 0 log 0 = 0.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr

from .envmodel import Environment
from .quadtree import (
    InvalidSelectionError,
    TreeSelection,
    interior_nodes,
    level_paths,
    position,
    validate_selection,
)

LN2 = math.log(2.0)
SUM_TOL = 1e-9
# per-node divergences below this (in bits, before weighting) are rounding noise
JS_SNAP = 1e-13


def _as_distribution(p, name="dist") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if np.any(p < 0):
        raise ValueError(f"{name} has a negative entry")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"{name} sums to {p.sum()!r}, not 1")
    return p


def entropy(dist) -> float:
    p = _as_distribution(dist)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def kl_divergence(p, q) -> float:
    """D_KL(p || q); returns ``math.inf`` when p is not absolutely continuous w.r.t. q."""
    p = _as_distribution(p, "p")
    q = _as_distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("length mismatch")
    return float(np.sum(rel_entr(p, q)) / LN2)


def js_divergence(dists, weights) -> float:
    w = _as_distribution(weights, "weights")
    ps = np.asarray(dists, dtype=float)
    if ps.ndim != 2 or ps.shape[0] != w.size:
        raise ValueError("need one distribution per weight")
    for p in ps:
        _as_distribution(p)
    mix = w @ ps
    # rows with zero weight contribute nothing even where they escape the mixture support
    terms = [wi * np.sum(rel_entr(p, mix)) for wi, p in zip(w, ps) if wi > 0]
    return max(float(sum(terms)) / LN2, 0.0)


# ---------------------------------------------------------------------------
# per-node increments


class LevelMap(Mapping):
    """Read-only mapping from node path to a value stored in per-depth grids."""

    def __init__(self, levels, ell):
        self._levels = levels
        self._ell = ell

    def __getitem__(self, t):
        if not isinstance(t, str) or len(t) >= len(self._levels):
            raise KeyError(t)
        r, c = position(t)
        return float(self._levels[len(t)][r, c])

    def __iter__(self):
        for k in range(len(self._levels)):
            yield from level_paths(self._ell)[k].ravel()

    def __len__(self):
        return sum(a.size for a in self._levels)


def _quadrants(a: np.ndarray) -> list[np.ndarray]:
    return [a[0::2, 0::2], a[0::2, 1::2], a[1::2, 0::2], a[1::2, 1::2]]


def _block_sum(a: np.ndarray) -> np.ndarray:
    q = _quadrants(a)
    return ((q[0] + q[1]) + q[2]) + q[3]


@dataclass(frozen=True, eq=False)
class InfoIncrements:
    """Node distributions and information increments, stored per depth.

    ``prob[k]``, ``relevance[k]`` have shape (2^k, 2^k) for k = 0..ell;
    ``dx[k]``, ``dy[k]`` are defined for interior depths k = 0..ell-1.
    """

    ell: int
    prob: tuple
    relevance: tuple
    dx: tuple
    dy: tuple

    @property
    def delta_x(self) -> Mapping:
        return LevelMap(self.dx, self.ell)

    @property
    def delta_y(self) -> Mapping:
        return LevelMap(self.dy, self.ell)

    @property
    def node_prob(self) -> Mapping:
        return LevelMap(self.prob, self.ell)

    @property
    def node_relevance(self) -> Mapping:
        return LevelMap(self.relevance, self.ell)

    @property
    def total_x(self) -> float:
        return float(sum(a.sum() for a in self.dx))

    @property
    def total_y(self) -> float:
        return float(sum(a.sum() for a in self.dy))

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """(Δ_X, Δ_Y) aligned with :func:`quadtree.interior_nodes` order."""
        nodes = interior_nodes(self.ell)
        dx = np.empty(len(nodes))
        dy = np.empty(len(nodes))
        for i, t in enumerate(nodes):
            r, c = position(t)
            dx[i] = self.dx[len(t)][r, c]
            dy[i] = self.dy[len(t)][r, c]
        return dx, dy

    def to_csv(self) -> str:
        lines = ["node_path,prob,delta_x,delta_y\n"]
        rows = []
        for k in range(self.ell + 1):
            paths = level_paths(self.ell)[k]
            for (r, c), t in np.ndenumerate(paths):
                dx = self.dx[k][r, c] if k < self.ell else 0.0
                dy = self.dy[k][r, c] if k < self.ell else 0.0
                rows.append((t, self.prob[k][r, c], dx, dy))
        rows.sort(key=lambda row: row[0])
        for t, p, dx, dy in rows:
            lines.append(f"{t},{p:.9g},{dx:.9g},{dy:.9g}\n")
        return "".join(lines)


def compute_increments(env: Environment) -> InfoIncrements:
    """Bottom-up pass computing p(t), p(Y=1|t), ΔI_X(t) = p(t)H(Π), ΔI_Y(t) = p(t)JS_Π."""
    ell = env.ell
    p_all = [None] * (ell + 1)
    p_one = [None] * (ell + 1)
    p_zero = [None] * (ell + 1)
    p_all[ell] = env.prior_grid().copy()
    p_one[ell] = p_all[ell] * env.relevance_grid()
    p_zero[ell] = p_all[ell] * (1.0 - env.relevance_grid())
    for k in range(ell - 1, -1, -1):
        p_all[k] = _block_sum(p_all[k + 1])
        p_one[k] = _block_sum(p_one[k + 1])
        p_zero[k] = _block_sum(p_zero[k + 1])

    rel = []
    for k in range(ell + 1):
        r = np.zeros_like(p_all[k])
        np.divide(p_one[k], p_all[k], out=r, where=p_all[k] > 0)
        rel.append(np.clip(r, 0.0, 1.0))

    dx, dy = [], []
    for k in range(ell):
        parent = p_all[k]
        pos = parent > 0
        safe = np.where(pos, parent, 1.0)
        r1 = np.where(pos, p_one[k] / safe, 0.0)
        r0 = np.where(pos, p_zero[k] / safe, 0.0)
        hx = np.zeros_like(parent)
        hy = np.zeros_like(parent)
        for c_all, c_one, c_zero in zip(_quadrants(p_all[k + 1]), _quadrants(p_one[k + 1]), _quadrants(p_zero[k + 1])):
            # p(s') log(p(s')/p(s)) and p(s') KL(p(y|s') || p(y|s)) written on joint masses
            hx += rel_entr(c_all, np.where(pos, parent, 0.0))
            hy += rel_entr(c_one, c_all * r1) + rel_entr(c_zero, c_all * r0)
        dx_k = np.maximum(np.where(pos, -hx / LN2, 0.0), 0.0)
        dy_k = np.maximum(np.where(pos, hy / LN2, 0.0), 0.0)
        # identical child conditionals must give an exact zero, otherwise dx/dy
        # produces spurious huge critical betas
        dy_k[dy_k <= JS_SNAP * safe] = 0.0
        dx.append(dx_k)
        dy.append(np.minimum(dy_k, dx_k))

    for arr in p_all + rel + dx + dy:
        arr.setflags(write=False)
    return InfoIncrements(ell, tuple(p_all), tuple(rel), tuple(dx), tuple(dy))


def tree_information(sel: TreeSelection, inc: InfoIncrements) -> tuple[float, float]:
    """(I_X, I_Y) of a selection as sums of increments over its expanded nodes."""
    if not validate_selection(sel, inc.ell):
        raise InvalidSelectionError(f"invalid selection for ell={inc.ell}")
    ix = iy = 0.0
    for t in sorted(sel.expanded):
        r, c = position(t)
        ix += inc.dx[len(t)][r, c]
        iy += inc.dy[len(t)][r, c]
    return float(ix), float(iy)


def masks_information(masks, inc: InfoIncrements) -> tuple[float, float]:
    """(I_X, I_Y) for a selection given as per-depth boolean masks."""
    ix = sum(float(inc.dx[k][m].sum()) for k, m in enumerate(masks))
    iy = sum(float(inc.dy[k][m].sum()) for k, m in enumerate(masks))
    return ix, iy
