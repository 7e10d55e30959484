"""Quadtree node addressing, multi-resolution tree selections and enumeration.

A node is identified by its base-4 path from the root, as a string: ``""`` is
the root, ``"13"`` is the SE child of the NE child of the root. Child order is
0=NW, 1=NE, 2=SW, 3=SE, so a path digit ``d`` contributes row bit ``d // 2``
and column bit ``d % 2``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

MAX_ENUMERATION_DEPTH = 3

ROOT = ""


class InvalidSelectionError(ValueError):
    pass


def depth(t: str) -> int:
    return len(t)


def parent(t: str) -> str:
    if not t:
        raise ValueError("the root has no parent")
    return t[:-1]


def children(t: str, ell: int) -> list[str]:
    if len(t) >= ell:
        raise ValueError(f"node {t!r} is a leaf of the depth-{ell} tree")
    return [t + d for d in "0123"]


def position(t: str) -> tuple[int, int]:
    """Row and column of ``t`` within the grid of its own depth."""
    row = col = 0
    for ch in t:
        d = ord(ch) - 48
        row = (row << 1) | (d >> 1)
        col = (col << 1) | (d & 1)
    return row, col


def node_at(k: int, row: int, col: int) -> str:
    digits = []
    for bit in range(k - 1, -1, -1):
        digits.append(str(2 * ((row >> bit) & 1) + ((col >> bit) & 1)))
    return "".join(digits)


def cell_block(t: str, ell: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Half-open (row range, column range) of the finest cells aggregated to ``t``."""
    row, col = position(t)
    size = 1 << (ell - len(t))
    return (row * size, (row + 1) * size), (col * size, (col + 1) * size)


@lru_cache(maxsize=None)
def level_paths(ell: int) -> tuple[np.ndarray, ...]:
    """Per depth k, a (2^k, 2^k) object array of node paths."""
    levels = [np.array([[""]], dtype=object)]
    for _ in range(ell):
        prev = levels[-1]
        n = prev.shape[0]
        cur = np.empty((2 * n, 2 * n), dtype=object)
        for d in range(4):
            cur[d >> 1 :: 2, d & 1 :: 2] = prev + str(d)
        levels.append(cur)
    return tuple(levels)


@lru_cache(maxsize=None)
def interior_nodes(ell: int) -> tuple[str, ...]:
    """Nodes of depth < ell in lexicographic (pre-order) path order."""
    return tuple(sorted(p for k in range(ell) for p in level_paths(ell)[k].ravel()))


@lru_cache(maxsize=None)
def interior_index(ell: int) -> dict[str, int]:
    return {p: i for i, p in enumerate(interior_nodes(ell))}


@dataclass(frozen=True)
class TreeSelection:
    """A multi-resolution tree given by its set of expanded interior nodes."""

    ell: int
    expanded: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "expanded", frozenset(self.expanded))

    @classmethod
    def root(cls, ell: int) -> "TreeSelection":
        return cls(ell, frozenset())

    @classmethod
    def full(cls, ell: int) -> "TreeSelection":
        return cls(ell, frozenset(interior_nodes(ell)))

    @classmethod
    def from_z(cls, ell: int, z) -> "TreeSelection":
        nodes = interior_nodes(ell)
        return cls(ell, frozenset(nodes[i] for i, v in enumerate(z) if v > 0.5))

    def z(self) -> np.ndarray:
        idx = interior_index(self.ell)
        out = np.zeros(len(idx))
        for t in self.expanded:
            out[idx[t]] = 1.0
        return out

    def sorted_expanded(self) -> list[str]:
        return sorted(self.expanded)

    def num_leaves(self) -> int:
        return 1 + 3 * len(self.expanded)

    def to_json(self) -> str:
        return json.dumps({"ell": self.ell, "expanded": self.sorted_expanded()}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "TreeSelection":
        obj = json.loads(text)
        return cls(int(obj["ell"]), frozenset(obj["expanded"]))


def validate_selection(sel: TreeSelection, ell: int) -> bool:
    if sel.ell != ell:
        return False
    for t in sel.expanded:
        if not isinstance(t, str) or len(t) >= ell or any(ch not in "0123" for ch in t):
            return False
        if t and t[:-1] not in sel.expanded:
            return False
    return True


def leaves_of(sel: TreeSelection, ell: int) -> list[str]:
    if not validate_selection(sel, ell):
        raise InvalidSelectionError(f"invalid selection for ell={ell}: {sel.sorted_expanded()}")
    if not sel.expanded:
        return [ROOT]
    out = []
    for t in sel.expanded:
        out.extend(c for c in children(t, ell) if c not in sel.expanded)
    return sorted(out)


def enumerate_all_trees(ell: int) -> Iterator[TreeSelection]:
    """Yield every valid selection of the depth-``ell`` quadtree exactly once."""
    if ell > MAX_ENUMERATION_DEPTH:
        raise ValueError(f"enumeration is limited to ell <= {MAX_ENUMERATION_DEPTH}")
    for expanded in _subtree_options(ROOT, ell):
        yield TreeSelection(ell, frozenset(expanded))


def _subtree_options(t: str, ell: int) -> list[tuple[str, ...]]:
    if len(t) >= ell:
        return [()]
    opts = [()]
    kids = [_subtree_options(c, ell) for c in children(t, ell)]
    for a in kids[0]:
        for b in kids[1]:
            for c in kids[2]:
                for d in kids[3]:
                    opts.append((t,) + a + b + c + d)
    return opts


def tree_count(ell: int) -> int:
    g = 1
    for _ in range(ell):
        g = 1 + g**4
    return g


@lru_cache(maxsize=None)
def tree_matrix(ell: int) -> np.ndarray:
    """0/1 matrix with one row per valid tree, columns in ``interior_nodes`` order.

    Rows follow the order of :func:`enumerate_all_trees`.
    """
    if ell > MAX_ENUMERATION_DEPTH:
        raise ValueError(f"enumeration is limited to ell <= {MAX_ENUMERATION_DEPTH}")
    idx = interior_index(ell)
    opts = _subtree_options(ROOT, ell)
    out = np.zeros((len(opts), len(idx)), dtype=np.uint8)
    for r, expanded in enumerate(opts):
        out[r, [idx[t] for t in expanded]] = 1
    out.setflags(write=False)
    return out
