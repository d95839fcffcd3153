"""Variable metric drivers for unconstrained multiobjective problems.

``run`` covers three metric strategies:

* ``identity``: the metric stays ``I`` (multiobjective steepest descent);
* ``bfgs_shared``: one inverse metric ``H_k`` shared by all objectives,
  updated by BFGS with the multiplier-weighted gradient difference;
* ``bfgs_per_objective``: one BFGS matrix per objective with directions
  from the quadratically constrained subproblem (baseline).

Each iteration solves the dual subproblem, stops once ``|theta| <= tol``,
otherwise takes a backtracking step and updates the metric.
"""

import csv
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .dual import DEFAULT_DUAL_TOL, solve_qnm_dual, solve_subproblem
from .linesearch import LineSearchParams, armijo_aggregated, armijo_vector
from .problems import EvalCounters, evaluate, hessians, jacobian

METRICS = ("identity", "bfgs_shared", "bfgs_per_objective")
LINESEARCHES = ("vector", "aggregated")

STATUS_CRITICAL = "critical"
STATUS_MAX_ITER = "max_iter"
STATUS_LS_FAILURE = "linesearch_failure"


@dataclass(frozen=True)
class SolverOptions:
    metric: str = "bfgs_shared"
    linesearch: str = "aggregated"
    tol: float = 1e-8
    max_iter: int = 500
    ls: LineSearchParams = field(default_factory=LineSearchParams)
    dual_tol: float = DEFAULT_DUAL_TOL
    dual_max_inner: int | None = None
    curvature_tol: float = linalg.DEFAULT_CURVATURE_TOL
    diagnostics: bool = False

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.linesearch not in LINESEARCHES:
            raise ValueError(
                f"linesearch must be one of {LINESEARCHES}, got {self.linesearch!r}"
            )
        if self.tol < 0:
            raise ValueError("tol must be >= 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class IterateRecord:
    """State at iterate ``k``.

    The last record of a run is the terminal iterate where no step was
    taken; its ``alpha`` is NaN. ``Bd`` (the primal metric applied to ``d``)
    and the spectrum bounds of the primal metric are filled only in
    diagnostics mode.
    """

    k: int
    x: np.ndarray
    theta: float
    lam: np.ndarray
    d: np.ndarray
    norm_d: float
    gap: float
    alpha: float = float("nan")
    backtracks: int = 0
    curvature_skipped: bool = False
    eig_lo: float = float("nan")
    eig_hi: float = float("nan")
    Bd: np.ndarray | None = None


@dataclass
class SolveResult:
    status: str
    x_final: np.ndarray
    theta_final: float
    lam_final: np.ndarray
    iters: int
    counters: EvalCounters
    trace: list
    wall_time: float
    F_final: np.ndarray | None = None
    metric_final: object = None


class _SharedMetric:
    def __init__(self, n, opts, identity):
        self.identity = identity
        self.opts = opts
        self.H = np.eye(n)
        self.B = np.eye(n) if opts.diagnostics else None

    def direction(self, J):
        return solve_subproblem(J, self.H, self.opts.dual_tol, self.opts.dual_max_inner)

    def update(self, s, J_old, J_new, lam):
        if self.identity:
            return False
        y = (J_new - J_old).T @ lam
        skipped = not linalg.curvature_ok(s, y, self.opts.curvature_tol)
        self.H = linalg.bfgs_update_inverse(self.H, s, y, self.opts.curvature_tol)
        if self.B is not None:
            self.B = linalg.bfgs_update_primal(self.B, s, y, self.opts.curvature_tol)
        return skipped

    def primal_times(self, d, lam):
        return d.copy() if self.identity else self.B @ d

    def bounds(self):
        if self.identity:
            return 1.0, 1.0
        lo, hi = linalg.eig_bounds_estimate(self.H)
        return 1.0 / hi, 1.0 / lo

    def final(self):
        return self.H


class _PerObjectiveMetric:
    def __init__(self, n, m, opts):
        self.opts = opts
        self.B_list = [np.eye(n) for _ in range(m)]

    def direction(self, J):
        return solve_qnm_dual(J, self.B_list, self.opts.dual_tol, self.opts.dual_max_inner)

    def update(self, s, J_old, J_new, lam):
        skipped = False
        for i in range(len(self.B_list)):
            y = J_new[i] - J_old[i]
            if not linalg.curvature_ok(s, y, self.opts.curvature_tol):
                skipped = True
                continue
            self.B_list[i] = linalg.bfgs_update_primal(
                self.B_list[i], s, y, self.opts.curvature_tol
            )
        return skipped

    def primal_times(self, d, lam):
        return sum(l * (B @ d) for l, B in zip(lam, self.B_list))

    def bounds(self):
        lows, highs = zip(*(linalg.eig_bounds_estimate(B) for B in self.B_list))
        return min(lows), max(highs)

    def final(self):
        return list(self.B_list)


def _make_metric(p, opts):
    if opts.metric == "bfgs_per_objective":
        return _PerObjectiveMetric(p.n, p.m, opts)
    return _SharedMetric(p.n, opts, identity=(opts.metric == "identity"))


def run(p, x0, opts=SolverOptions()):
    """Minimize problem ``p`` from ``x0``; never raises on line-search failure."""
    start = time.perf_counter()
    x = np.array(x0, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"{p.name}: x0 must have shape ({p.n},), got {x.shape}")
    counters = EvalCounters()
    F = evaluate(p, x, counters)
    J = jacobian(p, x, counters)
    metric = _make_metric(p, opts)
    trace = []
    status = STATUS_MAX_ITER
    k = 0
    while True:
        sub = metric.direction(J)
        rec = IterateRecord(
            k=k,
            x=x.copy(),
            theta=sub.theta,
            lam=sub.lam.copy(),
            d=sub.d.copy(),
            norm_d=float(np.linalg.norm(sub.d)),
            gap=sub.gap,
        )
        if opts.diagnostics:
            rec.eig_lo, rec.eig_hi = metric.bounds()
            rec.Bd = metric.primal_times(sub.d, sub.lam)
        trace.append(rec)

        if abs(sub.theta) <= opts.tol:
            status = STATUS_CRITICAL
            break
        if k >= opts.max_iter:
            status = STATUS_MAX_ITER
            break

        if opts.linesearch == "aggregated":
            out = armijo_aggregated(p, x, F, sub.d, sub.lam, sub.theta, opts.ls, counters)
        else:
            out = armijo_vector(p, x, F, sub.d, J @ sub.d, opts.ls, counters)
        rec.backtracks = out.backtracks
        if not out.accepted:
            status = STATUS_LS_FAILURE
            break
        rec.alpha = out.alpha

        x_new = x + out.alpha * sub.d
        J_new = jacobian(p, x_new, counters)
        rec.curvature_skipped = metric.update(x_new - x, J, J_new, sub.lam)
        x, F, J = x_new, out.F_new, J_new
        k += 1

    last = trace[-1]
    return SolveResult(
        status=status,
        x_final=x,
        theta_final=last.theta,
        lam_final=last.lam,
        iters=k,
        counters=counters,
        trace=trace,
        wall_time=time.perf_counter() - start,
        F_final=F,
        metric_final=metric.final(),
    )


def tightened_reference(p, x0, opts, tol=1e-14):
    """Limit-point estimate: re-run from ``x0`` with a much tighter tolerance."""
    return run(p, x0, replace(opts, tol=tol, diagnostics=False)).x_final


def superlinear_ratios(trace, x_ref):
    """``|x_{k+1} - x_ref| / |x_k - x_ref|`` over consecutive iterates."""
    x_ref = np.asarray(x_ref, dtype=float)
    errs = [float(np.linalg.norm(r.x - x_ref)) for r in trace]
    return [errs[k + 1] / errs[k] for k in range(len(errs) - 1) if errs[k] > 1e-14]


def hessian_residual(p, trace):
    """Resemblance of the metric to the multiplier-weighted Hessian along ``d_k``.

    Needs a trace recorded with ``diagnostics=True``.
    """
    out = []
    for rec in trace:
        if rec.norm_d == 0.0:
            continue
        if rec.Bd is None:
            raise ValueError("trace was recorded without diagnostics")
        W = sum(l * h for l, h in zip(rec.lam, hessians(p, rec.x)))
        out.append(float(np.linalg.norm(rec.Bd - W @ rec.d)) / rec.norm_d)
    return out


def assumption_diagnostics(trace, tail=5):
    """Summary of metric bounds, curvature skips and tail behaviour of a run."""
    if not trace:
        raise ValueError("empty trace")
    tail_recs = trace[-tail:]
    lam_steps = [
        float(np.linalg.norm(b.lam - a.lam)) for a, b in zip(trace[:-1], trace[1:])
    ][-tail:]
    return {
        "eig_lo_min": float(np.nanmin([r.eig_lo for r in trace])),
        "eig_hi_max": float(np.nanmax([r.eig_hi for r in trace])),
        "curvature_skips": sum(r.curvature_skipped for r in trace),
        "lam_change_tail_max": max(lam_steps) if lam_steps else 0.0,
        "norm_d_tail_max": max(r.norm_d for r in tail_recs),
    }


def write_trace(result, path):
    """Write the per-iteration trace as CSV with full round-trip floats."""
    m = len(result.lam_final)
    header = ["k", "theta", "norm_d", "alpha", "backtracks", "skipped"]
    header += [f"lambda_{i}" for i in range(m)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in result.trace:
            row = [r.k, repr(r.theta), repr(r.norm_d), repr(r.alpha), r.backtracks,
                   int(r.curvature_skipped)]
            row += [repr(float(v)) for v in r.lam]
            w.writerow(row)
