"""Command-line entry point: ``solve``, ``bench``, ``front`` and ``check``.

Exit codes: 0 on success, 1 on usage errors, 2 on runtime failures.
A JSON file passed with ``--config`` supplies defaults keyed by flag name;
explicit flags override it.
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from .bench import BenchConfig, export_cloud, export_report, run_suite, start_point
from .linesearch import LineSearchParams
from .problems import SUITES, fd_check, get_problem, problem_names, sample_start
from .solver import SolverOptions, run, write_trace

METRIC_FLAGS = {
    "identity": "identity",
    "bfgs": "bfgs_shared",
    "qn-per-objective": "bfgs_per_objective",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_solver_flags(sp):
    sp.add_argument("--metric", choices=sorted(METRIC_FLAGS), default="bfgs")
    sp.add_argument("--linesearch", choices=["vector", "aggregated"], default="aggregated")
    sp.add_argument("--sigma", type=float, default=0.1)
    sp.add_argument("--gamma", type=float, default=0.5)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iter", type=int, default=500)
    sp.add_argument("--config", help="JSON file with default flag values")


def build_parser():
    parser = _Parser(prog="vmmop", description="Variable metric multiobjective solver")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    sp = sub.add_parser("solve", help="single run, optional CSV trace")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--x0", default="seed:1", help="comma list or seed:<int>")
    sp.add_argument("--trace", help="write per-iteration CSV here")
    _add_solver_flags(sp)

    sp = sub.add_parser("bench", help="seeded multi-start suite with CSV report")
    sp.add_argument("--suite", choices=sorted(SUITES), default="table2")
    sp.add_argument("--problems", help="comma list overriding --suite")
    sp.add_argument("--runs", type=int, default=200)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out", default="out")
    sp.add_argument("--workers", type=int, default=None)
    _add_solver_flags(sp)

    sp = sub.add_parser("front", help="terminal points of seeded runs as CSV")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--runs", type=int, default=200)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out", required=True, help="output CSV path")
    _add_solver_flags(sp)

    sp = sub.add_parser("check", help="finite-difference sweep over the corpus")
    sp.add_argument("--points", type=int, default=20)
    sp.add_argument("--h", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threshold", type=float, default=1e-4)
    sp.add_argument("--config", help="JSON file with default flag values")
    return parser, sub.choices


def _apply_config(parser, subparsers, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not argv:
        return
    sp = subparsers.get(argv[0])
    if sp is None:
        return
    try:
        cfg = json.loads(Path(known.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {known.config}: {exc}") from exc
    dests = {a.dest for a in sp._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in dests:
            raise UsageError(f"unknown config key {key!r} for {argv[0]}")
        defaults[dest] = value
    sp.set_defaults(**defaults)


def _options(args):
    return SolverOptions(
        metric=METRIC_FLAGS[args.metric],
        linesearch=args.linesearch,
        tol=args.tol,
        max_iter=args.max_iter,
        ls=LineSearchParams(sigma=args.sigma, gamma=args.gamma),
    )


def _problem(name):
    try:
        return get_problem(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc


def _parse_x0(text, p):
    if text.startswith("seed:"):
        try:
            seed = int(text[5:])
        except ValueError as exc:
            raise UsageError(f"bad --x0 seed {text!r}") from exc
        return start_point(p, seed, 0)
    try:
        x0 = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"bad --x0 {text!r}") from exc
    if x0.shape != (p.n,):
        raise UsageError(f"--x0 needs {p.n} values for {p.name}, got {x0.size}")
    return x0


def cmd_solve(args):
    p = _problem(args.problem)
    res = run(p, _parse_x0(args.x0, p), _options(args))
    print(f"problem: {p.name}")
    print(f"status: {res.status}")
    print(f"iterations: {res.iters}")
    print(f"theta: {res.theta_final!r}")
    print(f"lambda: {', '.join(repr(float(v)) for v in res.lam_final)}")
    print(f"fevals: {res.counters.f_calls}  jacobians: {res.counters.jac_calls}")
    if p.n <= 10:
        print(f"x: {', '.join(repr(float(v)) for v in res.x_final)}")
    if args.trace:
        write_trace(res, args.trace)
        print(f"trace: {args.trace}")
    return 0


def cmd_bench(args):
    if args.problems:
        problems = [s.strip() for s in args.problems.split(",") if s.strip()]
    else:
        problems = list(SUITES[args.suite])
    for name in problems:
        _problem(name)
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = BenchConfig(problems, args.runs, args.seed, _options(args), str(out), args.workers)
    report = run_suite(config)
    summary, raw = export_report(report, out / "summary.csv")
    for s in report.stats:
        print(f"{s.problem:8s} iter={s.mean_iter:.2f} feval={s.mean_feval:.2f} "
              f"critical={s.critical_fraction:.3f} failures={s.failures}")
    print(f"summary: {summary}")
    print(f"raw: {raw}")
    return 0


def cmd_front(args):
    p = _problem(args.problem)
    config = BenchConfig([p.name], args.runs, args.seed, _options(args))
    results = []
    run_suite(config, observer=lambda name, i, res: results.append(res))
    path = export_cloud(results, p, args.out)
    print(f"front: {path} ({len(results)} rows)")
    return 0


def cmd_check(args):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for name in problem_names():
        p = get_problem(name)
        err = max(fd_check(p, sample_start(rng, p), args.h) for _ in range(args.points))
        worst = max(worst, err)
        flag = "ok" if err < args.threshold else "FAIL"
        print(f"{name:8s} max_fd_error={err:.3e} {flag}")
    return 0 if worst < args.threshold else 2


def _join_negative_values(argv):
    # "--x0 -1,2" would otherwise parse "-1,2" as an option.
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--x0" and i + 1 < len(argv) and re.match(r"-[\d.]", argv[i + 1]):
            out.append(f"--x0={argv[i + 1]}")
            i += 2
            continue
        out.append(argv[i])
        i += 1
    return out


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "front": cmd_front, "check": cmd_check}


def cli_main(argv=None):
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser, subparsers = build_parser()
    try:
        _apply_config(parser, subparsers, argv)
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    except Exception as exc:
        print(f"vmmop: error: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(cli_main())
