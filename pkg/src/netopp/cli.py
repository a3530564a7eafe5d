"""Command-line surface.

Subcommands: utility, simulate, check-eq, find-eq, construct,
sweep {poa|gini|friction}, optimal, compare-info.

Exit status 0 on success, 1 on any validation problem (bad flags, unreadable
files, invalid parameters, infeasible constructions), 2 on an internal
invariant breach.  Errors print one machine-parsable line to stderr:
``error code=<CODE> message="<detail>"``.  All deterministic subcommands are
byte-reproducible; Monte Carlo output is byte-reproducible for a fixed
--seed (default: the NETOPP_SEED environment variable, else 0).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .closed_form import social_welfare, utility
from .construct import ConstructionSpec, GirthRetryError, build
from .core import (
    TRANSFER_MODELS,
    UNINFORMED,
    EnumerationCapError,
    GraphError,
    InvariantError,
    ParameterError,
    load_graph_file,
    load_params_file,
    validate_model,
)
from .equilibrium import best_response_dynamics, check_equilibrium
from .interventions import friction_sweep, information_equilibrium_compare
from .sweeps import (
    emit_heatmap,
    parse_grid,
    run_gini_sweep,
    run_poa_sweep,
    write_grid_csv,
)
from .transfer_sim import estimate_utilities
from .welfare import optimal_degree_informed, optimal_welfare


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); route through CliError instead
        raise CliError("BAD_ARGS", message)


def _default_seed() -> int:
    return int(os.environ.get("NETOPP_SEED", "0"))


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _load_inputs(args) -> tuple:
    net = load_graph_file(args.graph)
    params, model = load_params_file(args.params)
    if getattr(args, "model", None):
        model = validate_model(args.model)
    return net, params, model


def _cmd_utility(args) -> int:
    net, params, model = _load_inputs(args)
    nodes = [args.node] if args.node is not None else list(range(net.n))
    if args.node is not None and not (0 <= args.node < net.n):
        raise CliError("BAD_ARGS", f"node {args.node} out of range for n={net.n}")
    values = {i: utility(net, params, i, model=model) for i in nodes}
    lines = [f"# model={model}", f"# welfare={_fmt(social_welfare(net, params, model=model))}"]
    lines.append("node,degree,utility")
    for i in nodes:
        lines.append(f"{i},{net.degree(i)},{_fmt(values[i])}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    net, params, model = _load_inputs(args)
    seed = args.seed if args.seed is not None else _default_seed()
    res = estimate_utilities(net, params, model, args.rounds, seed)
    lines = [
        f"# model={model}",
        f"# rounds={res.rounds}",
        f"# seed={res.seed}",
        f"# welfare={_fmt(res.welfare_mean)}",
        f"# welfare_stderr={_fmt(res.welfare_std_error)}",
        "node,mean,stderr",
    ]
    for i in range(net.n):
        lines.append(f"{i},{_fmt(res.mean_utility[i])},{_fmt(res.std_error[i])}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_check_eq(args) -> int:
    net, params, model = _load_inputs(args)
    report = check_equilibrium(net, params, model)
    _write_text(args.out, json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_find_eq(args) -> int:
    params, model = load_params_file(args.params)
    if args.model:
        model = validate_model(args.model)
    seed = args.seed if args.seed is not None else _default_seed()
    result = best_response_dynamics(args.n, params, seed=seed, max_moves=args.max_moves, model=model)
    if not result.converged:
        raise CliError("NO_CONVERGENCE", f"dynamics did not converge within {result.moves} moves")
    _write_text(args.out, result.network.to_json() + "\n")
    if args.trace:
        lines = ["step,kind,i,j,drop_i,drop_j,gain_i,gain_j"]
        for k, mv in enumerate(result.trace):
            di = ";".join(str(x) for x in mv.drop_i)
            dj = ";".join(str(x) for x in mv.drop_j)
            lines.append(f"{k},{mv.kind},{mv.i},{mv.j},{di},{dj},{_fmt(mv.gain_i)},{_fmt(mv.gain_j)}")
        _write_text(args.trace, "\n".join(lines) + "\n")
    return 0


def _cmd_construct(args) -> int:
    kind = args.kind.replace("-", "_")
    seed = args.seed if args.seed is not None else _default_seed()
    spec = ConstructionSpec(kind=kind, n=args.n, d=args.d, d1=args.d1, d2=args.d2, lam=args.lam, seed=seed)
    net = build(spec)
    _write_text(args.out, net.to_json() + "\n")
    return 0


def _cmd_sweep_poa(args) -> int:
    axes = parse_grid(args.grid)
    grid = run_poa_sweep(args.regime, axes, gamma=args.gamma, n=args.n, jobs=args.jobs)
    write_grid_csv(grid, args.out)
    if args.png:
        emit_heatmap(grid, args.png, scale=args.scale)
    return 0


def _cmd_sweep_gini(args) -> int:
    axes = parse_grid(args.grid)
    grid = run_gini_sweep(axes, jobs=args.jobs)
    write_grid_csv(grid, args.out)
    if args.png:
        emit_heatmap(grid, args.png, scale=args.scale)
    return 0


def _cmd_sweep_friction(args) -> int:
    try:
        lo, hi, step = (float(x) for x in args.gamma.split(":"))
    except ValueError as exc:
        raise CliError("BAD_ARGS", f"bad --gamma range {args.gamma!r}; expected lo:hi:step") from exc
    curve = friction_sweep(args.q, args.p, (lo, hi), step)
    lines = [
        f"# sweep=friction",
        f"# q={_fmt(args.q)}",
        f"# p={_fmt(args.p)}",
        f"# transitions={';'.join(_fmt(t) for t in curve.transitions)}",
        "gamma,degree,utility",
    ]
    for g, d, u in zip(curve.gammas, curve.degrees, curve.worst_regular_utility):
        lines.append(f"{_fmt(g)},{int(d)},{_fmt(u)}")
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_optimal(args) -> int:
    params, model = load_params_file(args.params)
    if args.model:
        model = validate_model(args.model)
    if model == UNINFORMED:
        res = optimal_welfare(params.q, params.p, params.gamma, args.n)
        out = {
            "model": model,
            "structure": res.structure,
            "per_capita": res.per_capita,
            "odd_n_correction": res.odd_n_correction,
        }
    else:
        d_star, value = optimal_degree_informed(params.q, params.p, params.gamma, args.n)
        out = {"model": model, "structure": "regular-girth5", "d_star": d_star, "per_capita": value}
    _write_text(args.out, json.dumps(out, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_compare_info(args) -> int:
    report = information_equilibrium_compare(args.p)
    _write_text(args.out, json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="netopp", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"netopp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(sp, graph=True):
        if graph:
            sp.add_argument("--graph", required=True, help="graph JSON file")
        sp.add_argument("--params", required=True, help="params JSON file")
        sp.add_argument("--model", choices=TRANSFER_MODELS, help="override the params-file transfer model")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    sp = sub.add_parser("utility", help="closed-form per-node utilities and welfare")
    add_io(sp)
    sp.add_argument("--node", type=int, default=None)
    sp.set_defaults(fn=_cmd_utility)

    sp = sub.add_parser("simulate", help="seeded Monte Carlo utility estimates")
    add_io(sp)
    sp.add_argument("--rounds", type=int, required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("check-eq", help="defection-free pairwise equilibrium check")
    add_io(sp)
    sp.set_defaults(fn=_cmd_check_eq)

    sp = sub.add_parser("find-eq", help="equilibrium discovery by random better-response dynamics")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--params", required=True)
    sp.add_argument("--model", choices=TRANSFER_MODELS)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--max-moves", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--trace", default=None, help="write the move trace CSV here")
    sp.set_defaults(fn=_cmd_find_eq)

    sp = sub.add_parser("construct", help="build a special graph (audited)")
    sp.add_argument("--kind", required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, default=None)
    sp.add_argument("--d1", type=int, default=None)
    sp.add_argument("--d2", type=int, default=None)
    sp.add_argument("--lam", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_construct)

    sweep = sub.add_parser("sweep", help="parameter sweeps")
    ssub = sweep.add_subparsers(dest="sweep_kind", required=True)

    sp = ssub.add_parser("poa", help="price-of-anarchy surface")
    sp.add_argument("--regime", required=True, choices=("frictionless", "costly", "informed"))
    sp.add_argument("--grid", required=True, help="e.g. q=0.01:0.99:0.01,p=0.01:0.99:0.01")
    sp.add_argument("--gamma", type=float, default=None)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--png", default=None)
    sp.add_argument("--scale", type=int, default=4)
    sp.set_defaults(fn=_cmd_sweep_poa)

    sp = ssub.add_parser("gini", help="worst-case equilibrium Gini surface")
    sp.add_argument("--grid", required=True, help="e.g. p=0.01:0.5:0.01,gamma=0.001:0.2:0.001")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--png", default=None)
    sp.add_argument("--scale", type=int, default=4)
    sp.set_defaults(fn=_cmd_sweep_gini)

    sp = ssub.add_parser("friction", help="worst-case regular-equilibrium welfare vs gamma")
    sp.add_argument("--q", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--gamma", required=True, help="lo:hi:step")
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_sweep_friction)

    sp = sub.add_parser("optimal", help="socially optimal structure and welfare")
    sp.add_argument("--params", required=True)
    sp.add_argument("--model", choices=TRANSFER_MODELS)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_optimal)

    sp = sub.add_parser("compare-info", help="equilibrium welfare across transfer models")
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=_cmd_compare_info)

    return parser


_ERROR_CODES = (
    (ParameterError, "BAD_PARAMS"),
    (GraphError, "BAD_GRAPH"),
    (EnumerationCapError, "BALL_TOO_LARGE"),
    (GirthRetryError, "GIRTH_RETRY_EXHAUSTED"),
    (json.JSONDecodeError, "BAD_FILE"),
    (OSError, "BAD_FILE"),
    (ValueError, "BAD_INPUT"),
    (KeyError, "BAD_INPUT"),
)


def _emit_error(code: str, message: str) -> None:
    msg = str(message).replace('"', "'").replace("\n", " ")
    sys.stderr.write(f'error code={code} message="{msg}"\n')


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.fn(args)
    except CliError as exc:
        _emit_error(exc.code, str(exc))
        return 1
    except InvariantError as exc:
        _emit_error("INTERNAL_INVARIANT", str(exc))
        return 2
    except tuple(t for t, _ in _ERROR_CODES) as exc:
        code = next(c for t, c in _ERROR_CODES if isinstance(exc, t))
        _emit_error(code, str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
