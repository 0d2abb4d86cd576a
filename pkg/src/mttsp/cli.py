"""Command-line interface: ``mttsp <command> ...``.

Exit codes: 0 success, 2 no feasible solution found, 1 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_ERROR, EXIT_NONE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _workers_default() -> int:
    from .graph import default_workers

    return default_workers()


def _add_solver_flags(p):
    p.add_argument("--algo", choices=["irg-pglns", "irg-glns", "pdg", "pcg"], default="irg-pglns")
    p.add_argument("--budget-s", type=float, default=None, help="wall-clock budget (default 30 s, Dubins 60 s)")
    p.add_argument("--workers", type=int, default=None, help="parallel workers (default $MTTSP_WORKERS or CPU count)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-rand", type=int, default=None)
    p.add_argument("--alpha-term", type=float, default=None)
    p.add_argument("--n-rand-init", type=int, default=None)
    p.add_argument("--n-warm", type=int, default=None)
    p.add_argument("--max-iters", type=int, default=None, help="stop after this many improvement iterations")
    p.add_argument("--eval-removals", action="store_true", help="allow up to n_cluster - 1 removals per LNS move")


def _params_from(args, instance):
    from .irg import default_params

    workers = args.workers if args.workers is not None else _workers_default()
    params = default_params(
        args.algo,
        instance.variant,
        budget_s=args.budget_s,
        n_rand=args.n_rand,
        alpha_term=args.alpha_term,
        n_rand_init=args.n_rand_init,
        n_warm=args.n_warm,
        max_iters=args.max_iters,
        n_proc=max(1, workers),
        eval_removals=args.eval_removals or None,
    )
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mttsp", description="Moving-target TSP planners over iterated random GTSPs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random instance that is feasible by construction")
    g.add_argument("--variant", choices=["close-enough", "dubins", "linear"], default="close-enough")
    g.add_argument("--n-tar", type=int, default=200)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--window-len", type=float, default=None)
    g.add_argument("--radius", type=float, default=12.0)
    g.add_argument("--v-max", type=float, default=5.0)
    g.add_argument("--count", type=int, default=1, help="write COUNT instances with seeds seed..seed+COUNT-1")
    g.add_argument("--out", required=True, help="output file, or directory when --count > 1")

    s = sub.add_parser("solve", help="plan a trajectory within the time budget")
    s.add_argument("--instance", required=True)
    _add_solver_flags(s)
    s.add_argument("--out", default="out", help="directory for log.json and trajectory.json")

    o = sub.add_parser("oracle", help="exact optimum over a time-grid sampling of every window")
    o.add_argument("--instance", required=True)
    o.add_argument("--samples-per-target", type=int, default=64)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", default=None)

    t = sub.add_parser("tune", help="tune n_rand_init or the (n_rand, alpha_term) grid")
    t.add_argument("--instances", nargs="+", required=True)
    t.add_argument("--mode", choices=["n-rand-init", "grid"], default="grid")
    _add_solver_flags(t)
    t.add_argument("--values", type=int, nargs="+", default=None, help="grid values (default 1 2 4 ... 64)")
    t.add_argument("--out", default=None)

    c = sub.add_parser("init-compare", help="time to first feasible tour for several methods")
    c.add_argument("--instances", nargs="+", required=True)
    c.add_argument("--methods", nargs="+", default=None)
    c.add_argument("--budget-s", type=float, default=10.0)
    c.add_argument("--n-rand-init", type=int, default=8)
    c.add_argument("--workers", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", default=None, help="JSON report path")
    c.add_argument("--svg", default=None)

    pl = sub.add_parser("plot", help="SVG cost-vs-time plot of solve logs")
    pl.add_argument("--logs", nargs="+", required=True)
    pl.add_argument("--labels", nargs="+", default=None)
    pl.add_argument("--out", required=True)

    gt = sub.add_parser("gtsp", help="solve a GTSPLIB file with the LNS solver")
    gt.add_argument("--file", required=True)
    gt.add_argument("--budget-s", type=float, default=10.0)
    gt.add_argument("--workers", type=int, default=1)
    gt.add_argument("--seed", type=int, default=0)
    gt.add_argument("--alpha-term", type=float, default=60.0)

    sp = sub.add_parser("speedup", help="LNS time-to-target with 1 vs several workers")
    sp.add_argument("--clusters", type=int, default=150)
    sp.add_argument("--seeds", type=int, default=20)
    sp.add_argument("--workers", type=int, nargs="+", default=[1, 8])
    sp.add_argument("--cap-s", type=float, default=30.0)
    return parser


# ---------------------------------------------------------------- commands


def cmd_generate(args) -> int:
    from .instances import GenParams, generate_instance
    from .io import save_instance

    out = Path(args.out)
    for k in range(args.count):
        params = GenParams(
            n_tar=args.n_tar, variant=args.variant, seed=args.seed + k, window_len=args.window_len,
            radius=args.radius, v_max=args.v_max,
        )
        inst = generate_instance(params)
        if args.count == 1:
            out.parent.mkdir(parents=True, exist_ok=True)
            save_instance(inst, out)
        else:
            out.mkdir(parents=True, exist_ok=True)
            save_instance(inst, out / f"{args.variant}_{args.n_tar}_{args.seed + k}.json")
    return EXIT_OK


def cmd_solve(args) -> int:
    from .io import load_instance, save_log, save_trajectory
    from .irg import run

    inst = load_instance(args.instance)
    params = _params_from(args, inst)
    res = run(inst, params, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_log(res.log, out / "log.json")
    if res.incumbent is None:
        print("no feasible tour found within the budget", file=sys.stderr)
        return EXIT_NONE
    save_trajectory(inst, res.incumbent, res.trajectory, out / "trajectory.json")
    print(f"cost {res.incumbent.raw_cost:.4f} after {res.iterations} iterations; wrote {out}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .io import load_instance
    from .oracle import grid_optimum

    inst = load_instance(args.instance)
    found = grid_optimum(inst, args.samples_per_target, args.seed)
    if found is None:
        print("no feasible tour on the sampling grid", file=sys.stderr)
        return EXIT_NONE
    pts, cost = found
    report = {
        "cost": cost,
        "order": [p.owner for p in pts[1:]],
        "tour": [{"target": p.owner, "config": list(p.config), "time": p.time} for p in pts],
    }
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(f"optimum {cost:.4f} order {report['order']}")
    return EXIT_OK


def cmd_tune(args) -> int:
    from .bench import GRID, tune_grid, tune_n_rand_init
    from .io import load_instance

    insts = [load_instance(p) for p in args.instances]
    if args.mode == "n-rand-init":
        rep = tune_n_rand_init(insts, budget_s=args.budget_s or 60.0, seed=args.seed)
        print(f"final |S_1| per instance: {rep['sizes']}; n_rand_init = {rep['n_rand_init']}")
        report = rep
    else:
        values = tuple(args.values) if args.values else GRID
        base = _params_from(args, insts[0])
        rep = tune_grid(insts, base, values, values, seed=args.seed)
        for (n_rand, alpha), auc in sorted(rep["cells"].items()):
            print(f"n_rand={n_rand:3d} alpha_term={alpha:3d} median AUC={auc:.6g}")
        print(f"best cell: n_rand={rep['best'][0]} alpha_term={rep['best'][1]} ({rep['solves']} solves)")
        report = {
            "cells": [{"n_rand": k[0], "alpha_term": k[1], "median_auc": v} for k, v in rep["cells"].items()],
            "best": list(rep["best"]),
            "solves": rep["solves"],
        }
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=1) + "\n")
    return EXIT_OK


def cmd_init_compare(args) -> int:
    from .bench import INIT_METHODS, init_compare, summarize_init
    from .io import load_instance
    from .plot import bar_chart_svg

    insts = [load_instance(p) for p in args.instances]
    workers = args.workers if args.workers is not None else _workers_default()
    rows = init_compare(insts, tuple(args.methods or INIT_METHODS), args.budget_s, args.n_rand_init, args.seed,
                        max(2, workers))
    summary = summarize_init(rows)
    for m, s in summary.items():
        print(f"{m:18s} median {s['median_s']:.4f} s  found {s['found']}/{s['n']}")
    if args.out:
        Path(args.out).write_text(json.dumps(
            {"rows": [r.__dict__ for r in rows], "summary": summary}, indent=1) + "\n")
    if args.svg:
        Path(args.svg).write_text(bar_chart_svg([(m, s["median_s"]) for m, s in summary.items()],
                                                "median time to first feasible tour (s)"))
    return EXIT_OK


def cmd_plot(args) -> int:
    from .io import load_log
    from .plot import write_svg

    logs = [load_log(p) for p in args.logs]
    labels = args.labels or [Path(p).stem for p in args.logs]
    if len(labels) != len(logs):
        print("need one label per log", file=sys.stderr)
        return EXIT_ERROR
    write_svg(args.out, logs, labels)
    return EXIT_OK


def cmd_gtsp(args) -> int:
    from .io import read_gtsplib
    from .lns import LnsParams, solve_cycle_gtsp

    inst = read_gtsplib(args.file)
    params = LnsParams.from_alpha(args.alpha_term, len(inst.clusters))
    tour, cost = solve_cycle_gtsp(inst.cost, inst.clusters, params, np.random.default_rng(args.seed), args.budget_s,
                                  args.workers)
    print(f"{inst.name}: cost {cost}")
    print("tour " + " ".join(str(v + 1) for v in tour))
    return EXIT_OK


def cmd_speedup(args) -> int:
    from .bench import speedup_benchmark

    rep = speedup_benchmark(args.clusters, seeds=range(args.seeds), workers=tuple(args.workers), cap_s=args.cap_s)
    base = rep["median"][args.workers[0]]
    for w, m in rep["median"].items():
        print(f"workers={w}: median time to target {m:.4f} s (ratio vs {args.workers[0]}: {base / m:.3f})")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "tune": cmd_tune,
    "init-compare": cmd_init_compare,
    "plot": cmd_plot,
    "gtsp": cmd_gtsp,
    "speedup": cmd_speedup,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"mttsp {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
