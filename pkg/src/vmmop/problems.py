"""Test-problem corpus with analytic derivatives and evaluation counters.

Every problem maps ``x`` to the objective vector ``F(x)``, the Jacobian
``JF(x)`` (row ``i`` is the gradient of ``F_i``) and the list of objective
Hessians. The sampling boxes only generate starting points; the iterates
themselves are unconstrained.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

BENCH_SUITE = (
    "Deb",
    "JOS1a", "JOS1b", "JOS1c", "JOS1d", "JOS1e", "JOS1f", "JOS1g", "JOS1h",
    "PNR",
    "WIT0", "WIT1", "WIT2", "WIT3", "WIT4", "WIT5", "WIT6",
)
EXAMPLES_SUITE = ("EX41", "EX51")
SUITES = {"table2": BENCH_SUITE, "examples": EXAMPLES_SUITE}

# Iterates with x1 at or below this are outside the Deb domain.
DEB_GUARD = 1e-12


class InfeasibleEvaluation(ValueError):
    """Raised when a problem is evaluated outside its domain."""


@dataclass
class EvalCounters:
    f_calls: int = 0
    jac_calls: int = 0

    def reset(self):
        self.f_calls = 0
        self.jac_calls = 0


@dataclass(frozen=True)
class ProblemDef:
    """A named multiobjective instance.

    ``fun``, ``jac`` and ``hess`` take a 1-D array of length ``n`` and return
    an ``(m,)`` array, an ``(m, n)`` array and a list of ``m`` ``(n, n)``
    arrays respectively.
    """

    name: str
    n: int
    m: int
    lower: np.ndarray
    upper: np.ndarray
    fun: Callable
    jac: Callable
    hess: Callable | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.n,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.n,)).copy()
        if not np.all(lower < upper):
            raise ValueError(f"{self.name}: lower must be < upper componentwise")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)


# ---------------------------------------------------------------- JOS1


def make_jos1(n, bound=2.0, name=None):
    """JOS1: mean of x_i^2 against mean of (x_i - 2)^2."""

    def fun(x):
        return np.array([np.mean(x * x), np.mean((x - 2.0) ** 2)])

    def jac(x):
        return np.vstack([(2.0 / n) * x, (2.0 / n) * (x - 2.0)])

    def hess(x):
        h = (2.0 / n) * np.eye(n)
        return [h, h.copy()]

    return ProblemDef(name or f"JOS1[n={n}]", n, 2, -bound, bound, fun, jac, hess)


# ---------------------------------------------------------------- Deb


def _deb_g(t):
    u = (t - 0.2) / 0.004
    v = (t - 0.6) / 0.4
    eu = np.exp(-u * u)
    ev = np.exp(-v * v)
    g = 2.0 - eu - 0.8 * ev
    dg = (2.0 * u / 0.004) * eu + 0.8 * (2.0 * v / 0.4) * ev
    d2g = (2.0 / 0.004**2) * (1.0 - 2.0 * u * u) * eu + 0.8 * (2.0 / 0.4**2) * (
        1.0 - 2.0 * v * v
    ) * ev
    return g, dg, d2g


def _deb_domain(x):
    if not x[0] > DEB_GUARD:
        raise InfeasibleEvaluation(f"Deb requires x1 > 0, got x1={x[0]!r}")


def _deb_fun(x):
    _deb_domain(x)
    g, _, _ = _deb_g(x[1])
    return np.array([x[0], g / x[0]])


def _deb_jac(x):
    _deb_domain(x)
    g, dg, _ = _deb_g(x[1])
    return np.array([[1.0, 0.0], [-g / x[0] ** 2, dg / x[0]]])


def _deb_hess(x):
    _deb_domain(x)
    g, dg, d2g = _deb_g(x[1])
    x1 = x[0]
    h2 = np.array([[2.0 * g / x1**3, -dg / x1**2], [-dg / x1**2, d2g / x1]])
    return [np.zeros((2, 2)), h2]


# ---------------------------------------------------------------- PNR


def _pnr_fun(x):
    x1, x2 = x
    f1 = x1**4 + x2**4 - x1**2 + x2**2 - 10.0 * x1 * x2 + 0.25 * x1 + 20.0
    f2 = (x1 - 1.0) ** 2 + x2**2
    return np.array([f1, f2])


def _pnr_jac(x):
    x1, x2 = x
    return np.array(
        [
            [4.0 * x1**3 - 2.0 * x1 - 10.0 * x2 + 0.25, 4.0 * x2**3 + 2.0 * x2 - 10.0 * x1],
            [2.0 * (x1 - 1.0), 2.0 * x2],
        ]
    )


def _pnr_hess(x):
    x1, x2 = x
    h1 = np.array([[12.0 * x1**2 - 2.0, -10.0], [-10.0, 12.0 * x2**2 + 2.0]])
    return [h1, 2.0 * np.eye(2)]


# ---------------------------------------------------------------- WIT0


def _wit0_parts(x):
    a = x[0] + x[1]
    b = x[0] - x[1]
    ha = np.sqrt(1.0 + a * a)
    hb = np.sqrt(1.0 + b * b)
    eb = 0.6 * np.exp(-b * b)
    return a, b, ha, hb, eb


def _wit0_fun(x):
    a, b, ha, hb, eb = _wit0_parts(x)
    base = 0.5 * (ha + hb) + eb
    return np.array([base + 0.5 * b, base - 0.5 * b])


def _wit0_jac(x):
    a, b, ha, hb, eb = _wit0_parts(x)
    da = 0.5 * a / ha
    db = 0.5 * b / hb - 2.0 * b * eb
    ea = np.array([1.0, 1.0])
    e_b = np.array([1.0, -1.0])
    return np.vstack([da * ea + (db + 0.5) * e_b, da * ea + (db - 0.5) * e_b])


def _wit0_hess(x):
    a, b, ha, hb, eb = _wit0_parts(x)
    caa = 0.5 / ha**3
    cbb = 0.5 / hb**3 + (4.0 * b * b - 2.0) * eb
    h = caa * np.array([[1.0, 1.0], [1.0, 1.0]]) + cbb * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return [h, h.copy()]


# ---------------------------------------------------------------- WIT1..6

WIT_PARAMS = {1: 0.0, 2: 0.5, 3: 0.9, 4: 0.99, 5: 0.999, 6: 1.0}


def make_wit(lam, name=None):
    """Parametric WIT pair with mixing weight ``lam`` in [0, 1]."""

    def fun(x):
        u, v = x[0] - 2.0, x[1] - 2.0
        f1 = lam * (u * u + v * v) + (1.0 - lam) * (u**4 + v**8)
        f2 = (x[0] + 2.0 * lam) ** 2 + (x[1] + 2.0 * lam) ** 2
        return np.array([f1, f2])

    def jac(x):
        u, v = x[0] - 2.0, x[1] - 2.0
        g1 = [2.0 * lam * u + 4.0 * (1.0 - lam) * u**3, 2.0 * lam * v + 8.0 * (1.0 - lam) * v**7]
        g2 = [2.0 * (x[0] + 2.0 * lam), 2.0 * (x[1] + 2.0 * lam)]
        return np.array([g1, g2])

    def hess(x):
        u, v = x[0] - 2.0, x[1] - 2.0
        h1 = np.diag(
            [2.0 * lam + 12.0 * (1.0 - lam) * u**2, 2.0 * lam + 56.0 * (1.0 - lam) * v**6]
        )
        return [h1, 2.0 * np.eye(2)]

    return ProblemDef(name or f"WIT[{lam}]", 2, 2, -2.0, 2.0, fun, jac, hess, {"lambda": lam})


# ---------------------------------------------------------------- worked examples


def _ex41_fun(x):
    x1, x2 = x
    return np.array([2.0 * x1**2 - x2**2, -((x1 - 1.0) ** 2) + 2.0 * (x2 - 1.0) ** 2])


def _ex41_jac(x):
    x1, x2 = x
    return np.array([[4.0 * x1, -2.0 * x2], [-2.0 * (x1 - 1.0), 4.0 * (x2 - 1.0)]])


def _ex41_hess(x):
    return [np.diag([4.0, -2.0]), np.diag([-2.0, 4.0])]


def _ex51_fun(x):
    x1, x2 = x
    return np.array([(x1**2 + x2**2) / 100.0, (x1 - 2.0) ** 2 + (x2 - 2.0) ** 2])


def _ex51_jac(x):
    x1, x2 = x
    return np.array([[x1 / 50.0, x2 / 50.0], [2.0 * x1 - 4.0, 2.0 * x2 - 4.0]])


def _ex51_hess(x):
    return [np.diag([0.02, 0.02]), np.diag([2.0, 2.0])]


# ---------------------------------------------------------------- registry

_JOS1_ROWS = {
    "JOS1a": (100, 2.0),
    "JOS1b": (200, 2.0),
    "JOS1c": (500, 2.0),
    "JOS1d": (1000, 2.0),
    "JOS1e": (100, 10.0),
    "JOS1f": (100, 50.0),
    "JOS1g": (100, 100.0),
    "JOS1h": (200, 100.0),
}


def problem_names():
    return list(BENCH_SUITE + EXAMPLES_SUITE)


def get_problem(name):
    """Look up a corpus problem by name; raises KeyError for unknown names."""
    if name in _JOS1_ROWS:
        n, bound = _JOS1_ROWS[name]
        return make_jos1(n, bound, name)
    if name == "Deb":
        return ProblemDef("Deb", 2, 2, 0.1, 1.0, _deb_fun, _deb_jac, _deb_hess)
    if name == "PNR":
        return ProblemDef("PNR", 2, 2, -2.0, 2.0, _pnr_fun, _pnr_jac, _pnr_hess)
    if name == "WIT0":
        return ProblemDef("WIT0", 2, 2, -2.0, 2.0, _wit0_fun, _wit0_jac, _wit0_hess)
    if name.startswith("WIT") and name[3:].isdigit() and int(name[3:]) in WIT_PARAMS:
        return make_wit(WIT_PARAMS[int(name[3:])], name)
    if name == "EX41":
        return ProblemDef("EX41", 2, 2, -2.0, 2.0, _ex41_fun, _ex41_jac, _ex41_hess)
    if name == "EX51":
        return ProblemDef("EX51", 2, 2, -2.0, 2.0, _ex51_fun, _ex51_jac, _ex51_hess)
    raise KeyError(f"unknown problem {name!r}; known: {', '.join(problem_names())}")


# ---------------------------------------------------------------- evaluation


def _check_x(p, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"{p.name}: expected x of shape ({p.n},), got {x.shape}")
    return x


def evaluate(p, x, counters=None):
    """Objective vector ``F(x)``; one call counts as one function evaluation."""
    x = _check_x(p, x)
    if counters is not None:
        counters.f_calls += 1
    F = np.asarray(p.fun(x), dtype=float)
    if not np.all(np.isfinite(F)):
        raise InfeasibleEvaluation(f"{p.name}: non-finite objective at x")
    return F


def jacobian(p, x, counters=None):
    x = _check_x(p, x)
    if counters is not None:
        counters.jac_calls += 1
    J = np.asarray(p.jac(x), dtype=float)
    if not np.all(np.isfinite(J)):
        raise InfeasibleEvaluation(f"{p.name}: non-finite Jacobian at x")
    return J


def hessians(p, x):
    if p.hess is None:
        raise NotImplementedError(f"{p.name} has no analytic Hessians")
    return [np.asarray(h, dtype=float) for h in p.hess(_check_x(p, x))]


def fd_check(p, x, h=1e-6):
    """Max relative error between the analytic Jacobian and central differences.

    Each gradient row is compared in the max norm and scaled by
    ``max(1, |grad_i|_inf)``; small gradients are thus compared absolutely.
    """
    x = _check_x(p, x)
    J = np.asarray(p.jac(x), dtype=float)
    fd = np.empty_like(J)
    for j in range(p.n):
        e = np.zeros(p.n)
        e[j] = h
        fd[:, j] = (np.asarray(p.fun(x + e)) - np.asarray(p.fun(x - e))) / (2.0 * h)
    scale = np.maximum(1.0, np.max(np.abs(J), axis=1, keepdims=True))
    return float(np.max(np.abs(J - fd) / scale))


def sample_start(rng, p):
    """Uniform draw strictly inside the open sampling box of ``p``."""
    # Integers in [1, 2^53) give u in the open interval (0, 1).
    u = rng.integers(1, 2**53, size=p.n) / float(2**53)
    x = p.lower + (p.upper - p.lower) * u
    lo = np.nextafter(p.lower, p.upper)
    hi = np.nextafter(p.upper, p.lower)
    return np.clip(x, lo, hi)
