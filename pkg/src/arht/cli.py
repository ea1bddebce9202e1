"""Command-line entry point: ``arht {gen,solve,sweep,verify,constants}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import analysis
from .data import load_csv, objective_for, preprocess
from .instances import PlantedInstance, gaussian_planted, ompr_adversarial
from .solvers import SOLVERS, SolverConfig
from .sweep import emit_results, run_sweep

TABLE_RATIOS = (1, 2, 3, 30)


def _write(payload, out) -> None:
    text = json.dumps(payload, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _int_list(text: str) -> list:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_problem_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance JSON written by `gen`")
    src.add_argument("--csv", help="numeric CSV dataset with a header row")
    p.add_argument("--label", help="label column of --csv")
    p.add_argument("--task", choices=("regression", "binary"), default="regression")
    p.add_argument("--categorical", default="", help="comma-separated columns to one-hot encode")
    p.add_argument("--no-intercept", action="store_true")


def _add_solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--strict", action="store_true", help="use the theoretical progress condition")
    p.add_argument("--run-exactly-t", action="store_true", help="keep iterating after local optimality")
    p.add_argument("--early-stop", action="store_true")


def _problem(args):
    """Return (objective, pinned, instance-or-None, dataset id)."""
    if args.instance:
        inst = PlantedInstance.load(args.instance)
        return inst.objective, (), inst, Path(args.instance).stem
    if not args.label:
        raise ValueError("--label is required with --csv")
    cats = [c.strip() for c in args.categorical.split(",") if c.strip()]
    ds = load_csv(args.csv, args.label, task=args.task, categorical=cats)
    ds = preprocess(ds, intercept=not args.no_intercept)
    return ds, ds.pinned, None, Path(args.csv).stem


def _config(args, sparsity: int, pinned=(), initial=None) -> SolverConfig:
    return SolverConfig(
        sparsity=sparsity,
        epsilon=args.eps,
        max_iterations=args.max_iter,
        rng_seed=args.seed,
        strict=args.strict,
        run_exactly_t=args.run_exactly_t,
        early_stop=args.early_stop,
        pinned=tuple(pinned),
        initial_support=initial,
    )


def cmd_gen(args) -> int:
    if args.kind == "gaussian":
        inst = gaussian_planted(args.m, args.n, args.s_star, args.noise, args.seed, correlation=args.correlation)
    else:
        inst, _ = ompr_adversarial(args.s_star, args.kappa, args.delta)
    if args.out:
        inst.save(args.out)
    else:
        print(json.dumps(inst.to_json()))
    return 0


def cmd_solve(args) -> int:
    data, pinned, inst, _ = _problem(args)
    f = inst.objective if inst is not None else objective_for(data)
    initial = inst.initial_support if (inst is not None and args.use_instance_start) else None
    cfg = _config(args, args.sparsity + len(pinned), pinned, initial)
    report = SOLVERS[args.algo](f, cfg)
    payload = report.to_dict()
    if not args.trace:
        payload.pop("trace", None)
        payload.get("extra", {}).pop("core_traces", None)
    _write(payload, args.out)
    return 0


def cmd_sweep(args) -> int:
    data, _, inst, name = _problem(args)
    if inst is not None:
        data = inst.objective
    cfg = _config(args, 0)
    res = run_sweep(data, args.algo.split(","), _int_list(args.sparsity), cfg,
                    master_seed=args.seed, dataset_id=name)
    emit_results(res, args.format, args.out)
    return 0


def cmd_verify(args) -> int:
    if args.check == "table1":
        rows = [
            {"ratio": r, "bound": analysis.rip_tradeoff_bound(r, 1, args.theta)}
            for r in TABLE_RATIOS
        ]
        _write(rows, args.out)
        return 0
    inst = PlantedInstance.load(args.instance)
    f = inst.objective
    s = args.sparsity or inst.s_star
    report = SOLVERS[args.algo](f, _config(args, s))
    level = len(set(report.support) | set(inst.support_star))
    consts = analysis.brute_force_restricted_constants(f, level, args.cap)
    sol = analysis.check_solution_recovery(f, report.x, inst.x_star, consts.rho_minus, args.eps, args.theta_bound)
    sup = analysis.check_support_recovery(report.x, inst.x_star, sol.rgoc, consts.rho_minus)
    _write({
        "algorithm": args.algo,
        "value": report.value,
        "support": list(report.support),
        "constants": consts.to_dict(),
        "solution_recovery": sol.to_dict(),
        "support_recovery": sup.to_dict(),
    }, args.out)
    return 0


def cmd_constants(args) -> int:
    data, _, inst, _ = _problem(args)
    f = inst.objective if inst is not None else objective_for(data)
    consts = analysis.brute_force_restricted_constants(f, args.level, args.cap)
    _write(consts.to_dict(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arht", description="Sparse convex optimization toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic instance")
    gen.add_argument("kind", choices=("gaussian", "adversarial"))
    gen.add_argument("--m", type=int, default=100)
    gen.add_argument("--n", type=int, default=256)
    gen.add_argument("--s-star", type=int, default=8)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--correlation", type=float, default=0.0)
    gen.add_argument("--kappa", type=int, default=4)
    gen.add_argument("--delta", type=float, default=1e-3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--out")
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="run one solver")
    _add_problem_args(solve)
    _add_solver_args(solve)
    solve.add_argument("--algo", choices=sorted(SOLVERS), default="arht")
    solve.add_argument("--sparsity", type=int, required=True, help="selectable features (intercept excluded)")
    solve.add_argument("--use-instance-start", action="store_true", help="start from the instance's stored support")
    solve.add_argument("--trace", action="store_true")
    solve.add_argument("--format", choices=("json",), default="json")
    solve.add_argument("-o", "--out")
    solve.set_defaults(func=cmd_solve)

    sweep = sub.add_parser("sweep", help="sparsity-vs-loss sweep")
    _add_problem_args(sweep)
    _add_solver_args(sweep)
    sweep.add_argument("--algo", default="omp,ompr,arht", help="comma-separated solver names")
    sweep.add_argument("--sparsity", required=True, help="comma-separated grid, e.g. 1,2,4,8")
    sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep.add_argument("-o", "--out", required=True)
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="analysis checks")
    verify.add_argument("check", choices=("table1", "recovery"))
    verify.add_argument("--instance")
    verify.add_argument("--algo", choices=sorted(SOLVERS), default="arht")
    verify.add_argument("--sparsity", type=int)
    verify.add_argument("--theta", type=float, default=1e-6)
    verify.add_argument("--theta-bound", type=float, default=None)
    verify.add_argument("--cap", type=int, default=analysis.MAX_COMBINATIONS)
    _add_solver_args(verify)
    verify.add_argument("-o", "--out")
    verify.set_defaults(func=cmd_verify)

    const = sub.add_parser("constants", help="restricted smoothness / convexity constants")
    _add_problem_args(const)
    const.add_argument("--level", type=int, required=True)
    const.add_argument("--cap", type=int, default=analysis.MAX_COMBINATIONS)
    const.add_argument("-o", "--out")
    const.set_defaults(func=cmd_constants)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.command == "verify" and args.check == "recovery" and not args.instance:
        parser.error("verify recovery needs --instance")
    try:
        return args.func(args)
    except Exception as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
