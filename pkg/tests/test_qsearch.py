import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtreeib.infotheory import compute_increments, tree_information
from qtreeib.envmodel import Environment
from qtreeib.qsearch import (
    compute_q,
    critical_beta_one_step,
    greedy_search,
    objective,
    qtree_search,
    sweep,
)
from qtreeib.quadtree import TreeSelection, interior_nodes, level_paths

from .conftest import random_inc
from .oracles import E4_BETA_CR, E4_FULL_OBJ_3, E4_Q_ROOT_3, min_objective, q_recursive


def test_e4_q_values(e4_inc):
    assert compute_q(e4_inc, 2).root == 0.0
    assert compute_q(e4_inc, 3).root == pytest.approx(E4_Q_ROOT_3, abs=1e-15)
    table = compute_q(e4_inc, 3)
    assert all(table.q[t] == 0.0 for t in "0123")


def test_q_at_zero_beta_is_zero_everywhere():
    inc = random_inc(3, 5)
    assert all(np.all(a == 0) for a in compute_q(inc, 0).levels)


def test_negative_beta_rejected(e4_inc):
    with pytest.raises(ValueError):
        compute_q(e4_inc, -0.1)
    with pytest.raises(ValueError):
        qtree_search(e4_inc, -1)


def test_e4_searches(e4_inc):
    assert qtree_search(e4_inc, 2).expanded == frozenset()
    assert qtree_search(e4_inc, 3).expanded == frozenset({""})
    assert qtree_search(e4_inc, 0).expanded == frozenset()
    assert greedy_search(e4_inc, 3).expanded == frozenset({""})
    assert greedy_search(e4_inc, 0).expanded == frozenset()


def test_e4_objective(e4_inc):
    assert objective(TreeSelection(2), e4_inc, 3) == 0.0
    assert objective(TreeSelection(2, {""}), e4_inc, 3) == pytest.approx(E4_Q_ROOT_3, abs=1e-15)
    assert objective(TreeSelection.full(2), e4_inc, 3) == pytest.approx(E4_FULL_OBJ_3, abs=1e-14)


def test_one_step_critical_beta(e4_inc):
    assert critical_beta_one_step(e4_inc, "") == pytest.approx(E4_BETA_CR, rel=1e-15)
    assert critical_beta_one_step(e4_inc, "1") == math.inf
    assert critical_beta_one_step(e4_inc, "12") == math.inf


def test_tie_at_breakpoint_keeps_the_smaller_tree(e4_inc):
    # exactly at the transition Q(root) is zero up to rounding, so nothing expands
    assert qtree_search(e4_inc, 2 / e4_inc.delta_y[""]).expanded == frozenset()
    assert qtree_search(e4_inc, E4_BETA_CR * (1 + 1e-9)).expanded == frozenset({""})


def test_vectorized_q_matches_recursion():
    for seed in range(5):
        inc = random_inc(3, seed, nonuniform=True)
        for beta in (0.5, 3.0, 17.0, 80.0):
            table = compute_q(inc, beta)
            for t in interior_nodes(3):
                assert table.q[t] == pytest.approx(q_recursive(inc, beta, t), abs=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 200))
def test_root_value_is_the_optimum_at_depth_2(seed, beta):
    inc = random_inc(2, seed)
    q = compute_q(inc, beta).root
    assert q == pytest.approx(min_objective(inc, beta), abs=1e-9)
    assert objective(qtree_search(inc, beta), inc, beta) == pytest.approx(q, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(0, 100), st.floats(0, 100))
def test_q_table_invariants(ell, seed, b1, b2):
    inc = random_inc(ell, seed)
    lo, hi = sorted((b1, b2))
    t_lo, t_hi = compute_q(inc, lo), compute_q(inc, hi)
    assert np.all(t_hi.levels[ell] == 0)
    for a, b in zip(t_lo.levels, t_hi.levels):
        assert np.all(a <= 0) and np.all(b <= 0)
        assert np.all(b <= a + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(0, 100))
def test_greedy_is_contained_in_qtree(ell, seed, beta):
    inc = random_inc(ell, seed)
    assert greedy_search(inc, beta).expanded <= qtree_search(inc, beta).expanded


def _lookahead_environment():
    """Root split is worthless alone; splitting its NW child pays off.

    Relevance is uniform over each depth-1 quadrant's average, so the root's
    children all look alike, but the NW quadrant is internally a checkerboard.
    """
    rel = np.full((4, 4), 0.5)
    rel[0, 0] = rel[1, 1] = 1.0
    rel[0, 1] = rel[1, 0] = 0.0
    return Environment.uniform(rel)


def test_greedy_misses_lookahead_split():
    inc = compute_increments(_lookahead_environment())
    assert inc.delta_y[""] == 0.0 and inc.delta_y["0"] > 0
    # the NW split must also pay for the root split, 4x its own information cost
    beta = 10 * critical_beta_one_step(inc, "0")
    g = greedy_search(inc, beta)
    q = qtree_search(inc, beta)
    assert g.expanded < q.expanded
    assert q.expanded == {"", "0"}
    assert objective(q, inc, beta) < objective(g, inc, beta)


def test_greedy_strictly_smaller_found_by_random_search():
    """Random depth-2 environments where greedy is a strict subtree of Q-tree search."""
    found = 0
    rng = np.random.default_rng(11)
    for _ in range(400):
        inc = random_inc(2, int(rng.integers(2**32)))
        beta = float(rng.uniform(1, 60))
        g, q = greedy_search(inc, beta), qtree_search(inc, beta)
        assert g.expanded <= q.expanded
        found += g.expanded < q.expanded
    assert found > 0


def test_sweep_rows(e4_inc):
    rows = sweep(e4_inc, [3, 0, 2])
    assert [r[0] for r in rows] == [0, 2, 3]
    assert rows[0][1:] == (0.0, 0.0, 0.0, 1)
    b, ix, iy, obj, leaves = rows[2]
    assert (ix, iy, leaves) == (2.0, pytest.approx(e4_inc.total_y), 4)
    assert obj == pytest.approx(E4_Q_ROOT_3, abs=1e-15)


def test_qtable_mapping_covers_all_nodes(e4_inc):
    q = compute_q(e4_inc, 3).q
    assert len(q) == 1 + 4 + 16
    assert set(q) == {t for lvl in level_paths(2) for t in lvl.ravel()}
    assert tree_information(qtree_search(e4_inc, 3), e4_inc)[0] == 2.0
