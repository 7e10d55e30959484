"""Command-line front end.

Exit codes: 0 success, 2 unreadable or malformed input, 3 bad usage,
4 domain error (infeasible D, degenerate environment, tree/depth mismatch).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .dualsolver import (
    InfeasibleConstraintError,
    dual_function,
    duality_gap,
    recover_primal_feasible,
    solve_dual,
    strong_duality_holds,
)
from .envmodel import EnvironmentFormatError, load_environment
from .infotheory import compute_increments, tree_information
from .lpilp import build_ilp, export_model, hierarchy_matrix, incidence_witness, solve_ilp_bruteforce, solve_lp_relaxation
from .phasetrans import dual_value_from_pts, tree_phase_transitions
from .qsearch import greedy_search, qtree_search, sweep
from .quadtree import MAX_ENUMERATION_DEPTH, InvalidSelectionError, TreeSelection, cell_block, leaves_of

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_DOMAIN = 0, 2, 3, 4


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def num(x) -> str:
    return f"{float(x):.9g}"


def _jnum(x):
    x = float(x)
    return float(num(x)) if math.isfinite(x) else None


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def _load(args):
    try:
        env = load_environment(args.env, format=args.format, prior_path=args.prior)
    except (OSError, EnvironmentFormatError, UnicodeDecodeError) as exc:
        raise OSError(str(exc)) from exc
    return env, compute_increments(env)


def _nonneg(name, value):
    if value is None:
        raise UsageError(f"--{name} is required")
    if not (math.isfinite(value) and value >= 0):
        raise UsageError(f"--{name} must be a non-negative number")
    return value


def _resolve_D(args, total_y):
    if args.D is not None and args.D_ratio is not None:
        raise UsageError("give either --D or --D-ratio, not both")
    if args.D_ratio is not None:
        r = _nonneg("D-ratio", args.D_ratio)
        if r > 1:
            raise DomainError(f"--D-ratio {r} exceeds 1")
        return r * total_y
    return _nonneg("D", args.D)


def cmd_search(args):
    beta = _nonneg("beta", args.beta)
    _, inc = _load(args)
    sel = greedy_search(inc, beta) if args.greedy else qtree_search(inc, beta)
    ix, iy = tree_information(sel, inc)
    _emit(sel.to_json() + "\n", args.output)
    sys.stderr.write(f"I_X={num(ix)} I_Y={num(iy)} objective={num(ix - beta * iy)}\n")


def cmd_sweep(args):
    lo = _nonneg("beta-min", args.beta_min)
    hi = _nonneg("beta-max", args.beta_max)
    if hi < lo or args.steps < 1:
        raise UsageError("need beta-min <= beta-max and steps >= 1")
    _, inc = _load(args)
    lines = ["beta,I_X,I_Y,objective,num_leaves\n"]
    for b, ix, iy, obj, leaves in sweep(inc, np.linspace(lo, hi, args.steps + 1)):
        lines.append(f"{num(b)},{num(ix)},{num(iy)},{num(obj)},{leaves}\n")
    _emit("".join(lines), args.output)


def cmd_phases(args):
    _, inc = _load(args)
    _emit(tree_phase_transitions(inc).to_csv(), args.output)


def cmd_dual(args):
    _, inc = _load(args)
    D = _resolve_D(args, inc.total_y)
    pts = tree_phase_transitions(inc)
    if args.epsilon is not None and not args.epsilon > 0:
        raise UsageError("--epsilon must be positive")
    sol = solve_dual(pts, D, inc.total_y)
    tree, bound = recover_primal_feasible(inc, pts, sol.D, args.epsilon)
    report = {
        "beta_star": _jnum(sol.beta_star),
        "d_star": _jnum(sol.d_star),
        "strong_duality": strong_duality_holds(pts, sol.D),
        "recovered_tree": json.loads(tree.to_json()),
        "suboptimality_bound": _jnum(bound),
    }
    _emit(_dumps(report) + "\n", args.output)


def cmd_gap(args):
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    env, inc = _load(args)
    if inc.total_y <= 0:
        raise DomainError("I(X;Y) = 0: the D grid is degenerate")
    pts = tree_phase_transitions(inc)
    lines = ["D,v,d_star,gap\n"]
    for D in np.linspace(0.0, inc.total_y, args.steps + 1):
        v, d, g = duality_gap(env, D, inc=inc, pts=pts)
        lines.append(f"{num(D)},{num(v)},{num(d)},{num(g)}\n")
    _emit("".join(lines), args.output)


def cmd_dualshape(args):
    _, inc = _load(args)
    D = _resolve_D(args, inc.total_y)
    pts = tree_phase_transitions(inc)
    lo = _nonneg("beta-min", args.beta_min)
    hi = args.beta_max
    if hi is None:
        hi = 1.25 * pts.betas[-1] if pts.betas else 5.0
    hi = _nonneg("beta-max", hi)
    if hi < lo or args.steps < 1:
        raise UsageError("need beta-min <= beta-max and steps >= 1")
    lines = ["# phase transitions: " + " ".join(num(b) for b in pts.betas) + "\n"]
    lines.append("beta,d_q_method,d_pt_method\n")
    for b in np.linspace(lo, hi, args.steps + 1):
        lines.append(f"{num(b)},{num(dual_function(inc, b, D))},{num(dual_value_from_pts(pts, D, b))}\n")
    _emit("".join(lines), args.output)


def cmd_ilp(args):
    _, inc = _load(args)
    D = _resolve_D(args, inc.total_y)
    model = build_ilp(inc, D)
    if args.export:
        with open(args.export, "w", encoding="ascii", newline="\n") as fh:
            fh.write(export_model(model))
    lp = solve_lp_relaxation(model)
    if lp.status != "optimal":
        raise InfeasibleConstraintError(f"LP relaxation is {lp.status}")
    report = {
        "num_vars": model.num_vars,
        "num_rows": len(model.hierarchy_rows),
        "incidence_witness": incidence_witness(hierarchy_matrix(model, sparse=True)),
        "lp_objective": _jnum(lp.objective),
        "lp_dual_beta": _jnum(lp.dual_beta),
        "lp_integral": lp.is_integral(),
    }
    if inc.ell <= MAX_ENUMERATION_DEPTH:
        sel, v = solve_ilp_bruteforce(model)
        report["ilp_value"] = _jnum(v)
        report["ilp_tree"] = json.loads(sel.to_json())
    _emit(_dumps(report) + "\n", args.output)


def render_svg(env, inc, sel: TreeSelection, cell: int = 8) -> str:
    side = env.side * cell
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}">\n'
    ]
    for t in leaves_of(sel, env.ell):
        (r0, r1), (c0, c1) = cell_block(t, env.ell)
        g = int(round(255 * inc.node_relevance[t]))
        out.append(
            f'<rect x="{c0 * cell}" y="{r0 * cell}" width="{(c1 - c0) * cell}" height="{(r1 - r0) * cell}" '
            f'fill="rgb({g},{g},{g})" stroke="#7f7f7f" stroke-width="0.5"/>\n'
        )
    out.append("</svg>\n")
    return "".join(out)


def cmd_render(args):
    if args.cell < 1:
        raise UsageError("--cell must be at least 1")
    env, inc = _load(args)
    try:
        with open(args.tree, "r", encoding="utf-8") as fh:
            sel = TreeSelection.from_json(fh.read())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise OSError(f"cannot read tree {args.tree}: {exc}") from exc
    if sel.ell != env.ell:
        raise DomainError(f"tree depth {sel.ell} does not match environment depth {env.ell}")
    _emit(render_svg(env, inc, sel, args.cell), args.output)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qtreeib", description="Information-optimal quadtree abstractions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("--env", required=True, help="environment file (PGM or CSV)")
        sp.add_argument("--format", choices=["pgm", "csv"], help="default: by file extension")
        sp.add_argument("--prior", help="CSV grid with the prior over cells (default uniform)")
        sp.add_argument("-o", "--output", help="write to this file instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("search", cmd_search, "Q-tree search at one beta")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--greedy", action="store_true", help="use the one-step greedy rule instead")

    sp = add("sweep", cmd_sweep, "Q-tree search over a beta grid")
    sp.add_argument("--beta-min", type=float, default=0.0)
    sp.add_argument("--beta-max", type=float, required=True)
    sp.add_argument("--steps", type=int, default=100)

    add("phases", cmd_phases, "tree phase transitions")

    def add_D(sp):
        sp.add_argument("--D", type=float, help="required relevant information, bits")
        sp.add_argument("--D-ratio", type=float, help="D as a fraction of I(X;Y)")

    sp = add("dual", cmd_dual, "solve the dual problem and recover a feasible tree")
    add_D(sp)
    sp.add_argument("--epsilon", type=float, help="beta offset for recovery (default scale-aware 1e-9)")

    sp = add("gap", cmd_gap, "duality gap over a D grid")
    sp.add_argument("--steps", type=int, default=50)

    sp = add("dualshape", cmd_dualshape, "dual function over a beta grid, two ways")
    add_D(sp)
    sp.add_argument("--beta-min", type=float, default=0.0)
    sp.add_argument("--beta-max", type=float)
    sp.add_argument("--steps", type=int, default=100)

    sp = add("ilp", cmd_ilp, "integer program, LP relaxation and its dual")
    add_D(sp)
    sp.add_argument("--export", help="also write the model as MPS-like text")

    sp = add("render", cmd_render, "SVG of a tree over the environment")
    sp.add_argument("--tree", required=True, help="tree JSON as written by 'search'")
    sp.add_argument("--cell", type=int, default=8, help="pixels per finest cell")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"qtreeib: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"qtreeib: {exc}\n")
        return EXIT_IO
    except (DomainError, InfeasibleConstraintError, InvalidSelectionError) as exc:
        sys.stderr.write(f"qtreeib: {exc}\n")
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
