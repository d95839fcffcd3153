"""Variable metric method for unconstrained multiobjective optimization."""

from .dual import DualResult, build_gram, frank_wolfe_simplex, solve_qnm_dual, solve_subproblem
from .linesearch import LineSearchOutcome, LineSearchParams, armijo_aggregated, armijo_vector
from .problems import (
    EvalCounters,
    InfeasibleEvaluation,
    ProblemDef,
    evaluate,
    fd_check,
    get_problem,
    hessians,
    jacobian,
    sample_start,
)
from .solver import SolveResult, SolverOptions, run

__version__ = "0.1.0"

__all__ = [
    "DualResult", "build_gram", "frank_wolfe_simplex", "solve_qnm_dual", "solve_subproblem",
    "LineSearchOutcome", "LineSearchParams", "armijo_aggregated", "armijo_vector",
    "EvalCounters", "InfeasibleEvaluation", "ProblemDef", "evaluate", "fd_check", "get_problem",
    "hessians", "jacobian", "sample_start", "SolveResult", "SolverOptions", "run",
]
