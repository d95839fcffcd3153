"""Backtracking step-size rules along a multiobjective descent direction.

Both rules try ``alpha = 1, gamma, gamma^2, ...`` and accept the first
trial satisfying their test:

* ``armijo_vector`` requires ``F_i(x + a d) - F_i(x) <= sigma a (J d)_i``
  for every objective.
* ``armijo_aggregated`` only asks the multiplier-weighted sum to decrease,
  ``lam.F(x + a d) - lam.F(x) <= sigma a theta``, so single objectives may
  go up.

Trial points outside a problem's domain count as rejected trials.
"""

from dataclasses import dataclass

import numpy as np

from .problems import InfeasibleEvaluation, evaluate


@dataclass(frozen=True)
class LineSearchParams:
    sigma: float = 0.1
    gamma: float = 0.5
    max_backtracks: int = 60

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be >= 1")


@dataclass(frozen=True)
class LineSearchOutcome:
    alpha: float
    backtracks: int
    accepted: bool
    F_new: np.ndarray | None = None


def _backtrack(p, x, d, params, counters, accept):
    alpha = 1.0
    for k in range(params.max_backtracks + 1):
        try:
            F_trial = evaluate(p, x + alpha * d, counters)
        except InfeasibleEvaluation:
            F_trial = None
        if F_trial is not None and accept(alpha, F_trial):
            return LineSearchOutcome(alpha, k, True, F_trial)
        if k < params.max_backtracks:
            alpha *= params.gamma
    return LineSearchOutcome(alpha, params.max_backtracks, False, None)


def armijo_vector(p, x, F_x, d, Jd, params=LineSearchParams(), counters=None):
    """Componentwise Armijo backtracking."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    F_x = np.asarray(F_x, dtype=float)
    Jd = np.asarray(Jd, dtype=float)

    def accept(alpha, F_trial):
        return bool(np.all(F_trial - F_x <= params.sigma * alpha * Jd))

    return _backtrack(p, x, d, params, counters, accept)


def armijo_aggregated(p, x, F_x, d, lam, theta, params=LineSearchParams(), counters=None):
    """Backtracking on the multiplier-weighted sum of objectives."""
    if not theta < 0.0:
        raise ValueError("theta must be negative for the aggregated search")
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    lam = np.asarray(lam, dtype=float)
    merit_x = float(lam @ np.asarray(F_x, dtype=float))

    def accept(alpha, F_trial):
        return float(lam @ F_trial) - merit_x <= params.sigma * alpha * theta

    return _backtrack(p, x, d, params, counters, accept)
