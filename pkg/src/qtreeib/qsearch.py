"""Q-function recursion, Q-tree search, the one-step greedy baseline and the soft objective."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .infotheory import InfoIncrements, LevelMap, masks_information, tree_information
from .quadtree import TreeSelection, level_paths, position

# |Q| at or below this is treated as zero: the node stays a leaf
TAU = 1e-12


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta >= 0:
        raise ValueError(f"beta must be non-negative, got {beta!r}")
    return beta


def _child_sum(a: np.ndarray) -> np.ndarray:
    return ((a[0::2, 0::2] + a[0::2, 1::2]) + a[1::2, 0::2]) + a[1::2, 1::2]


def _expand(mask: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(mask, 2, axis=0), 2, axis=1)


@dataclass(frozen=True, eq=False)
class QTable:
    beta: float
    levels: tuple  # levels[k] has shape (2^k, 2^k), k = 0..ell

    @property
    def ell(self) -> int:
        return len(self.levels) - 1

    @property
    def q(self) -> Mapping:
        return LevelMap(self.levels, self.ell)

    @property
    def root(self) -> float:
        return float(self.levels[0][0, 0])


def compute_q(inc: InfoIncrements, beta: float) -> QTable:
    beta = _check_beta(beta)
    levels = [None] * (inc.ell + 1)
    levels[inc.ell] = np.zeros((2**inc.ell, 2**inc.ell))
    for k in range(inc.ell - 1, -1, -1):
        levels[k] = np.minimum(inc.dx[k] - beta * inc.dy[k] + _child_sum(levels[k + 1]), 0.0)
    return QTable(beta, tuple(levels))


def _masks_from_rule(inc: InfoIncrements, expandable) -> list[np.ndarray]:
    masks = []
    reach = np.ones((1, 1), dtype=bool)
    for k in range(inc.ell):
        m = reach & expandable[k]
        masks.append(m)
        reach = _expand(m)
    return masks


def qtree_masks(inc: InfoIncrements, beta: float) -> list[np.ndarray]:
    table = compute_q(inc, beta)
    return _masks_from_rule(inc, [table.levels[k] < -TAU for k in range(inc.ell)])


def greedy_masks(inc: InfoIncrements, beta: float) -> list[np.ndarray]:
    beta = _check_beta(beta)
    return _masks_from_rule(inc, [inc.dx[k] - beta * inc.dy[k] < -TAU for k in range(inc.ell)])


def selection_from_masks(ell: int, masks) -> TreeSelection:
    paths = level_paths(ell)
    expanded = []
    for k, m in enumerate(masks):
        expanded.extend(paths[k][m].tolist())
    return TreeSelection(ell, frozenset(expanded))


def masks_from_selection(sel: TreeSelection) -> list[np.ndarray]:
    masks = [np.zeros((2**k, 2**k), dtype=bool) for k in range(sel.ell)]
    for t in sel.expanded:
        r, c = position(t)
        masks[len(t)][r, c] = True
    return masks


def qtree_search(inc: InfoIncrements, beta: float) -> TreeSelection:
    """Minimal optimal tree of the soft problem: expand top-down while Q(t;β) < -τ."""
    return selection_from_masks(inc.ell, qtree_masks(inc, beta))


def greedy_search(inc: InfoIncrements, beta: float) -> TreeSelection:
    return selection_from_masks(inc.ell, greedy_masks(inc, beta))


def objective(sel: TreeSelection, inc: InfoIncrements, beta: float) -> float:
    ix, iy = tree_information(sel, inc)
    return ix - float(beta) * iy


def critical_beta_one_step(inc: InfoIncrements, t: str) -> float:
    if len(t) >= inc.ell:
        return math.inf
    r, c = position(t)
    dy = float(inc.dy[len(t)][r, c])
    if dy <= 0:
        return math.inf
    return float(inc.dx[len(t)][r, c]) / dy


def sweep(inc: InfoIncrements, betas) -> list[tuple[float, float, float, float, int]]:
    """Rows (beta, I_X, I_Y, objective, num_leaves) of Q-tree search, beta ascending."""
    rows = []
    for beta in sorted(float(b) for b in betas):
        masks = qtree_masks(inc, beta)
        ix, iy = masks_information(masks, inc)
        n_expanded = int(sum(m.sum() for m in masks))
        rows.append((beta, ix, iy, ix - beta * iy, 1 + 3 * n_expanded))
    return rows
