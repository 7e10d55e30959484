import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtreeib.dualsolver import (
    DualSolution,
    InfeasibleConstraintError,
    check_D,
    dual_function,
    duality_gap,
    everett_pair,
    lagrangian,
    maximize_dual_bisection,
    primal_value_bruteforce,
    recover_primal_feasible,
    solve_dual,
    strong_duality_holds,
)
from qtreeib.envmodel import Environment, random_environment
from qtreeib.infotheory import compute_increments, tree_information
from qtreeib.phasetrans import PhaseTransitionSet, tree_phase_transitions
from qtreeib.quadtree import TreeSelection, enumerate_all_trees

from .conftest import e4_environment, random_inc
from .oracles import (
    E4_BETA_CR,
    E4_D_STAR_HALF,
    E4_DUAL_3_HALF,
    E4_GAP_HALF,
    E4_H,
    min_lagrangian_slow,
    primal_value,
    tree_values,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def e4_pts(e4_inc):
    return tree_phase_transitions(e4_inc)


# --- examples ---------------------------------------------------------------


def test_dual_function_examples(e4_inc):
    assert dual_function(e4_inc, 2, 0.5) == pytest.approx(1.0, abs=1e-15)
    assert dual_function(e4_inc, 3, 0.5) == pytest.approx(E4_DUAL_3_HALF, abs=1e-14)
    assert dual_function(e4_inc, 0, 0.3) == 0.0


def test_lagrangian_examples(e4_inc):
    root = TreeSelection.root(2)
    assert lagrangian(root, e4_inc, 3, 0.5) == 1.5
    assert lagrangian(TreeSelection(2, {""}), e4_inc, 3, 0.5) == pytest.approx(E4_DUAL_3_HALF, abs=1e-14)
    assert min_lagrangian_slow(e4_inc, 3, 0.5) == pytest.approx(E4_DUAL_3_HALF, abs=1e-14)
    assert len(list(enumerate_all_trees(2))) == 17


def test_solve_dual_examples(e4_inc, e4_pts):
    sol = solve_dual(e4_pts, 0.5)
    assert (sol.j_star, sol.D) == (0, 0.5)
    assert sol.beta_star == pytest.approx(E4_BETA_CR, rel=1e-14)
    assert sol.d_star == pytest.approx(E4_D_STAR_HALF, rel=1e-14)

    full = solve_dual(e4_pts, e4_inc.total_y)
    assert full.beta_star == pytest.approx(E4_BETA_CR, rel=1e-14)
    assert full.d_star == pytest.approx(2.0, abs=1e-14)
    assert solve_dual(e4_pts, 0).d_star == 0.0


def test_solve_dual_without_transitions():
    assert solve_dual(PhaseTransitionSet((), (), ()), 0) == DualSolution(0.0, 0.0, 0, 0.0)
    with pytest.raises(InfeasibleConstraintError):
        solve_dual(PhaseTransitionSet((), (), ()), 0.1)


def test_duality_gap_examples(e4):
    v, d, g = duality_gap(e4, 0.5)
    assert v == 2.0
    assert d == pytest.approx(E4_D_STAR_HALF, rel=1e-14)
    assert g == pytest.approx(E4_GAP_HALF, rel=1e-13)
    inc = compute_increments(e4)
    assert duality_gap(e4, inc.total_y)[2] == pytest.approx(0.0, abs=1e-14)
    assert duality_gap(e4, 0) == (0.0, 0.0, 0.0)


def test_rounded_D_misses_the_table(e4_inc, e4_pts):
    # six decimals of I(X;Y) fall 1.2e-7 short of it, outside the strong-duality tolerance
    assert E4_H - 0.811278 == pytest.approx(1.24459e-7, rel=1e-4)
    assert not strong_duality_holds(e4_pts, 0.811278)
    assert strong_duality_holds(e4_pts, E4_H)


def test_strong_duality_examples(e4_inc, e4_pts):
    assert strong_duality_holds(e4_pts, e4_inc.total_y)
    assert not strong_duality_holds(e4_pts, 0.5)
    assert strong_duality_holds(e4_pts, 0)


def test_everett_pair_examples(e4_inc):
    sel, d = everett_pair(e4_inc, 3)
    assert sel.expanded == {""} and d == pytest.approx(E4_H, rel=1e-14)
    assert primal_value_bruteforce(e4_inc, d)[1] == 2.0
    sel, d = everett_pair(e4_inc, 0)
    assert sel.expanded == frozenset() and d == 0.0


def test_recovery_example(e4_inc, e4_pts):
    sel, bound = recover_primal_feasible(e4_inc, e4_pts, 0.5, epsilon=1e-9)
    assert sel.expanded == {""}
    assert bound == pytest.approx((E4_BETA_CR + 1e-9) * (E4_H - 0.5), rel=1e-12)
    assert bound == pytest.approx(E4_GAP_HALF, rel=1e-8)
    assert recover_primal_feasible(e4_inc, e4_pts, 0) == (TreeSelection.root(2), 0.0)


# --- errors -----------------------------------------------------------------


def test_D_validation(e4_inc):
    total = e4_inc.total_y
    assert check_D(total + 5e-13, total) == total
    with pytest.raises(InfeasibleConstraintError):
        check_D(total + 1e-6, total)
    for bad in (-0.1, math.nan, math.inf):
        with pytest.raises(ValueError):
            check_D(bad, total)
    with pytest.raises(InfeasibleConstraintError):
        dual_function(e4_inc, 1.0, 0.9)
    with pytest.raises(InfeasibleConstraintError):
        duality_gap(e4_environment(), 0.9)


def test_constant_relevance_with_positive_D():
    env = Environment.uniform(np.full((4, 4), 0.5))
    with pytest.raises(InfeasibleConstraintError):
        duality_gap(env, 0.1)
    inc = compute_increments(env)
    assert recover_primal_feasible(inc, tree_phase_transitions(inc), 0) == (TreeSelection.root(2), 0.0)


def test_recovery_rejects_bad_epsilon():
    inc = random_inc(2, 3)
    pts = tree_phase_transitions(inc)
    D = 0.5 * (pts.cum_y[0] if len(pts) == 1 else pts.cum_y[0] + pts.cum_y[1])
    with pytest.raises(ValueError):
        recover_primal_feasible(inc, pts, D, epsilon=-1.0)


def test_gap_beyond_enumeration_depth_reports_nan():
    env = Environment.uniform(np.random.default_rng(0).random((16, 16)))
    v, d, g = duality_gap(env, 0.01)
    assert math.isnan(v) and math.isnan(g) and d > 0


# --- properties -------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), seeds, st.floats(0, 1), st.floats(0, 200))
def test_weak_duality(ell, seed, frac, beta):
    inc = random_inc(ell, seed)
    D = frac * inc.total_y
    _, ix, iy = tree_values(inc)
    d = dual_function(inc, beta, D)
    assert np.all(d <= ix[iy >= D - 1e-12] + 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), seeds, st.floats(0, 1), st.lists(st.floats(0, 300), min_size=3, max_size=3, unique=True))
def test_concavity(ell, seed, frac, bs):
    inc = random_inc(ell, seed)
    D = frac * inc.total_y
    b1, b2, b3 = sorted(bs)
    d1, d2, d3 = (dual_function(inc, b, D) for b in (b1, b2, b3))
    lam = (b2 - b1) / (b3 - b1)
    assert d2 >= (1 - lam) * d1 + lam * d3 - 1e-9


@pytest.mark.parametrize("seed", range(4))
def test_table_optimum_is_the_global_max(seed):
    inc = random_inc(3, seed, nonuniform=seed % 2 == 1)
    pts = tree_phase_transitions(inc)
    grid = np.linspace(0, max(pts.betas) + 1, 10_000)
    for frac in (0.0, 0.1, 0.37, 0.8, 1.0):
        D = frac * inc.total_y
        sol = solve_dual(pts, D)
        assert sol.beta_star in pts.betas
        assert sol.d_star == pytest.approx(dual_function(inc, sol.beta_star, D), abs=1e-10)
        d_grid = np.array([dual_function(inc, b, D) for b in grid[::50]])
        assert np.all(sol.d_star >= d_grid - 1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), seeds, st.floats(0, 1))
def test_bisection_route_agrees_with_table_route(ell, seed, frac):
    inc = random_inc(ell, seed)
    D = frac * inc.total_y
    pts = tree_phase_transitions(inc)
    sol = solve_dual(pts, D)
    _, d = maximize_dual_bisection(inc, D)
    assert d == pytest.approx(sol.d_star, rel=1e-9, abs=1e-11)


@pytest.mark.parametrize("seed", range(6))
def test_strong_duality_iff_zero_gap(seed):
    ell = 2 + seed % 2
    env = random_environment(ell, np.random.default_rng(100 + seed))
    env_inc = compute_increments(env)
    pts = tree_phase_transitions(env_inc)
    Ds = np.concatenate([np.linspace(0, env_inc.total_y, 50), pts.cum_y])
    for D in Ds:
        v, d, g = duality_gap(env, min(D, env_inc.total_y), inc=env_inc, pts=pts)
        assert g >= -1e-9
        assert (g <= 1e-9) == strong_duality_holds(pts, D)
        assert v == pytest.approx(primal_value(env_inc, D), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seeds, st.lists(st.floats(0, 200), min_size=10, max_size=10))
def test_everett_pairs_attain_the_primal(seed, betas):
    inc = random_inc(2, seed)
    for beta in betas:
        sel, d_beta = everett_pair(inc, beta)
        ix = tree_information(sel, inc)[0]
        assert primal_value(inc, d_beta) == pytest.approx(ix, abs=1e-12)
        assert dual_function(inc, beta, d_beta) == pytest.approx(ix, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds, st.booleans())
def test_recovery_is_feasible_and_bounded(seed, nonuniform):
    inc = random_inc(3, seed, nonuniform)
    pts = tree_phase_transitions(inc)
    for D in np.linspace(0, inc.total_y, 20):
        sel, bound = recover_primal_feasible(inc, pts, D)
        ix, iy = tree_information(sel, inc)
        assert iy >= D - 1e-12
        sub = ix - primal_value(inc, D)
        assert -1e-12 <= sub <= bound + 1e-9


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_optimality_conditions_under_strong_duality(seed):
    inc = random_inc(2, seed)
    pts = tree_phase_transitions(inc)
    for D in (0.0, *pts.cum_y):
        assert strong_duality_holds(pts, D)
        sol = solve_dual(pts, D)
        sel, _ = recover_primal_feasible(inc, pts, D)
        ix, iy = tree_information(sel, inc)
        beta = sol.beta_star
        assert beta >= 0 and iy >= D - 1e-12
        assert abs(beta * (D - iy)) <= 1e-9
        assert lagrangian(sel, inc, beta, D) == pytest.approx(min_lagrangian_slow(inc, beta, D), abs=1e-9)


def test_primal_bruteforce_tie_break():
    inc = compute_increments(Environment.uniform(np.full((4, 4), 0.5)))
    sel, v = primal_value_bruteforce(inc, 0.0)
    assert sel == TreeSelection.root(2) and v == 0.0
