"""Seeded multi-start benchmark harness and CSV export.

Each (problem, run) pair gets its own random stream derived from the run
seed ``base_seed + run`` and a hash of the problem name, so results do not
depend on problem order or on how runs are spread over worker processes.
"""

import csv
import math
import os
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .problems import ProblemDef, get_problem, sample_start
from .solver import STATUS_CRITICAL, SolverOptions, run

WORKERS_ENV = "VMMOP_WORKERS"

SUMMARY_HEADER = ["problem", "mean_iter", "mean_feval", "mean_time_s",
                  "critical_fraction", "failures"]
RAW_HEADER = ["problem", "run", "seed", "status", "iters", "fevals", "time_s",
              "theta_final"]


@dataclass
class BenchConfig:
    problems: list
    runs: int = 200
    seed: int = 1
    opts: SolverOptions = field(default_factory=SolverOptions)
    out_dir: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not self.problems:
            raise ValueError("problems must be non-empty")


@dataclass
class RunRow:
    problem: str
    run: int
    seed: int
    status: str
    iters: int
    fevals: int
    time_s: float
    theta_final: float


@dataclass
class RunStats:
    problem: str
    mean_iter: float
    mean_feval: float
    mean_time: float
    critical_fraction: float
    failures: int


@dataclass
class SuiteReport:
    config: BenchConfig | None
    stats: list
    rows: list


def run_seed(base_seed, run_index):
    return base_seed + run_index


def start_point(p, base_seed, run_index):
    """Deterministic starting point for run ``run_index`` of problem ``p``."""
    ss = np.random.SeedSequence([run_seed(base_seed, run_index), zlib.crc32(p.name.encode())])
    return sample_start(np.random.default_rng(ss), p)


def _as_problem(entry):
    return entry if isinstance(entry, ProblemDef) else get_problem(entry)


def _one_run(task):
    entry, run_index, base_seed, opts = task
    p = _as_problem(entry)
    return run(p, start_point(p, base_seed, run_index), opts)


def aggregate(problem, rows):
    """Per-problem statistics; means are taken over critical runs only."""
    done = [r for r in rows if r.status == STATUS_CRITICAL]
    n = len(rows)

    def mean(vals):
        return math.fsum(vals) / len(vals) if vals else float("nan")

    return RunStats(
        problem=problem,
        mean_iter=mean([r.iters for r in done]),
        mean_feval=mean([r.fevals for r in done]),
        mean_time=mean([r.time_s for r in done]),
        critical_fraction=len(done) / n if n else float("nan"),
        failures=n - len(done),
    )


def _resolve_workers(config):
    if config.workers is not None:
        return max(1, int(config.workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def run_suite(config, observer=None):
    """Run every problem ``config.runs`` times and aggregate the outcomes.

    ``config.problems`` holds corpus names or ``ProblemDef`` instances; the
    latter always run in-process. ``observer(problem_name, run_index,
    result)`` is called in the calling process for each finished run, in
    (problem, run) order.
    """
    names = [_as_problem(e).name for e in config.problems]  # unknown names abort here
    tasks = [(entry, i, config.seed, config.opts)
             for entry in config.problems for i in range(config.runs)]
    workers = _resolve_workers(config)
    if workers > 1 and all(isinstance(e, str) for e in config.problems):
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_one_run, tasks, chunksize=max(1, len(tasks) // (4 * workers)))
            results = list(results)
    else:
        results = map(_one_run, tasks)

    rows = []
    for (entry, i, base, _), res in zip(tasks, results):
        name = entry if isinstance(entry, str) else entry.name
        if observer is not None:
            observer(name, i, res)
        rows.append(RunRow(name, i, run_seed(base, i), res.status, res.iters,
                           res.counters.f_calls, res.wall_time, res.theta_final))
    stats = [aggregate(name, [r for r in rows if r.problem == name]) for name in names]
    return SuiteReport(config, stats, rows)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def raw_path_for(path):
    path = Path(path)
    return path.with_name(path.stem + "_raw" + path.suffix)


def export_report(report, path, raw_path=None):
    """Write the summary CSV at ``path`` and the per-run CSV next to it."""
    path = Path(path)
    raw_path = Path(raw_path) if raw_path is not None else raw_path_for(path)
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(SUMMARY_HEADER)
            for s in report.stats:
                w.writerow([s.problem, _fmt(s.mean_iter), _fmt(s.mean_feval),
                            _fmt(s.mean_time), _fmt(s.critical_fraction), s.failures])
        with open(raw_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RAW_HEADER)
            for r in report.rows:
                w.writerow([r.problem, r.run, r.seed, r.status, r.iters, r.fevals,
                            _fmt(float(r.time_s)), _fmt(float(r.theta_final))])
    except OSError as exc:
        raise OSError(f"cannot write report to {path} / {raw_path}: {exc}") from exc
    return path, raw_path


def export_cloud(results, p, path):
    """Terminal iterates and their objective values, one CSV row per run."""
    header = [f"x_{j}" for j in range(p.n)] + [f"F_{i}" for i in range(p.m)]
    rows = []
    for res in results:
        x = np.asarray(res.x_final, dtype=float)
        F = np.asarray(res.F_final, dtype=float)
        if x.shape != (p.n,) or F.shape != (p.m,):
            raise ValueError(
                f"result shapes x{x.shape}, F{F.shape} do not match {p.name} (n={p.n}, m={p.m})"
            )
        rows.append([repr(float(v)) for v in x] + [repr(float(v)) for v in F])
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write cloud to {path}: {exc}") from exc
    return Path(path)

