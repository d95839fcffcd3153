import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vmmop.linesearch import LineSearchParams, armijo_aggregated, armijo_vector
from vmmop.problems import EvalCounters, ProblemDef, evaluate, get_problem, jacobian

SQUARE = ProblemDef("sq", 1, 1, -5.0, 5.0, lambda x: np.array([x[0] ** 2]), lambda x: np.array([[2 * x[0]]]))
LINEAR = ProblemDef("lin", 1, 1, -5.0, 5.0, lambda x: np.array([x[0]]), lambda x: np.array([[1.0]]))
TWO = ProblemDef(
    "two", 2, 2, -5.0, 5.0,
    lambda x: np.array([x @ x, (x[0] - 2) ** 2 + x[1] ** 2]),
    lambda x: np.array([2 * x, [2 * (x[0] - 2), 2 * x[1]]]),
)
DEFAULT = LineSearchParams()


def test_params_defaults_and_validation():
    assert (DEFAULT.sigma, DEFAULT.gamma, DEFAULT.max_backtracks) == (0.1, 0.5, 60)
    for bad in [dict(sigma=0.0), dict(sigma=1.0), dict(gamma=0.0), dict(gamma=1.5), dict(max_backtracks=0)]:
        with pytest.raises(ValueError):
            LineSearchParams(**bad)


def test_vector_examples():
    x = np.array([1.0])
    out = armijo_vector(SQUARE, x, SQUARE.fun(x), [-2.0], [-4.0], DEFAULT)
    assert out.accepted and out.alpha == 0.5 and out.backtracks == 1

    x = np.array([0.0])
    out = armijo_vector(LINEAR, x, LINEAR.fun(x), [-1.0], [-1.0], DEFAULT)
    assert out.accepted and out.alpha == 1.0 and out.backtracks == 0

    x = np.array([1.0, 1.0])
    d = np.array([0.0, -2.0])
    out = armijo_vector(TWO, x, TWO.fun(x), d, TWO.jac(x) @ d, DEFAULT)
    assert out.accepted and out.alpha == 0.5


def test_aggregated_examples():
    x = np.array([1.0])
    # theta = 1/2 d^T grad = 1/2 (-2)(2) = -2
    out = armijo_aggregated(SQUARE, x, SQUARE.fun(x), [-2.0], [1.0], -2.0, DEFAULT)
    assert out.accepted and out.alpha == 0.5

    x = np.array([1.0, 1.0])
    out = armijo_aggregated(TWO, x, TWO.fun(x), [0.0, -2.0], [0.5, 0.5], -2.0, DEFAULT)
    assert out.accepted and out.alpha == 0.5


def test_aggregated_requires_negative_theta():
    x = np.array([1.0])
    with pytest.raises(ValueError):
        armijo_aggregated(SQUARE, x, SQUARE.fun(x), [-2.0], [1.0], 0.0)


def test_trial_evaluations_are_counted():
    c = EvalCounters()
    x = np.array([1.0])
    out = armijo_vector(SQUARE, x, SQUARE.fun(x), [-2.0], [-4.0], DEFAULT, c)
    assert c.f_calls == out.backtracks + 1 == 2
    np.testing.assert_allclose(out.F_new, [0.0])


def test_failure_after_max_backtracks():
    x = np.array([1.0])
    # An ascent direction can never be accepted.
    c = EvalCounters()
    out = armijo_vector(SQUARE, x, SQUARE.fun(x), [1.0], [2.0], LineSearchParams(max_backtracks=5), c)
    assert not out.accepted
    assert out.backtracks == 5
    assert c.f_calls == 6


def test_deb_infeasible_trials_are_rejections():
    p = get_problem("Deb")
    x = np.array([0.15, 0.5])
    d = np.array([-0.6, 0.0])  # alpha = 1, 1/2, 1/4 give x1 <= 0
    F = evaluate(p, x)
    c = EvalCounters()
    out = armijo_aggregated(p, x, F, d, [1.0, 0.0], -0.01, DEFAULT, c)
    assert out.accepted
    assert out.alpha == 0.125 and out.backtracks == 3
    assert c.f_calls == 4


def test_aggregated_allows_single_objective_increase():
    # EX51 near (1,1): the unit step raises f1 but lowers the weighted sum.
    p = get_problem("EX51")
    x = np.array([1.02, 0.98])
    from vmmop.dual import solve_subproblem
    H = np.linalg.inv(sum(l * h for l, h in zip([100 / 101, 1 / 101], p.hess(x))))
    r = solve_subproblem(jacobian(p, x), H)
    F = evaluate(p, x)
    out = armijo_aggregated(p, x, F, r.d, r.lam, r.theta, DEFAULT)
    assert out.accepted and out.alpha == 1.0


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_single_objective_rules_coincide(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    A = rng.standard_normal((n, n))
    Q = A @ A.T + 0.1 * np.eye(n)
    b = rng.standard_normal(n)
    p = ProblemDef("quad", n, 1, -10.0, 10.0,
                   lambda x: np.array([0.5 * x @ Q @ x + b @ x]),
                   lambda x: (Q @ x + b)[None, :])
    x = rng.uniform(-1, 1, n)
    g = Q @ x + b
    d = -g * rng.uniform(0.1, 5.0)
    params = LineSearchParams(sigma=rng.uniform(0.01, 0.9), gamma=rng.uniform(0.1, 0.9))
    F = p.fun(x)
    v = armijo_vector(p, x, F, d, [g @ d], params)
    if not g @ d < 0:
        return
    # Vector threshold: sigma a d.g. With theta = d.g the aggregated one is
    # the same inequality, so the two searches agree trial by trial.
    same = armijo_aggregated(p, x, F, d, [1.0], float(d @ g), params)
    assert (same.alpha, same.backtracks) == (v.alpha, v.backtracks)
    # With theta = d.g/2 the aggregated test is looser: never a smaller step.
    loose = armijo_aggregated(p, x, F, d, [1.0], 0.5 * float(d @ g), params)
    assert loose.alpha >= v.alpha


def _quadratic_pair(rng):
    n = 3
    Qs, bs = [], []
    for _ in range(2):
        A = rng.standard_normal((n, n))
        Qs.append(A @ A.T + 0.1 * np.eye(n))
        bs.append(rng.standard_normal(n))
    p = ProblemDef("pair", n, 2, -10.0, 10.0,
                   lambda x: np.array([0.5 * x @ Q @ x + b @ x for Q, b in zip(Qs, bs)]),
                   lambda x: np.array([Q @ x + b for Q, b in zip(Qs, bs)]))
    return p


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_accepted_steps_satisfy_conditions_post_hoc(seed):
    from vmmop.dual import solve_subproblem

    rng = np.random.default_rng(seed)
    p = _quadratic_pair(rng)
    x = rng.uniform(-2, 2, p.n)
    J = p.jac(x)
    r = solve_subproblem(J, np.eye(p.n))
    if r.theta > -1e-10:
        return
    F = p.fun(x)
    prm = LineSearchParams()

    v = armijo_vector(p, x, F, r.d, J @ r.d, prm)
    assert v.accepted and v.alpha == prm.gamma ** v.backtracks
    Fv = p.fun(x + v.alpha * r.d)
    assert np.all(Fv - F <= prm.sigma * v.alpha * (J @ r.d))
    np.testing.assert_array_equal(Fv, v.F_new)

    a = armijo_aggregated(p, x, F, r.d, r.lam, r.theta, prm)
    assert a.accepted and 0 < a.alpha <= 1 and a.alpha == prm.gamma ** a.backtracks
    merit = lambda z: float(r.lam @ p.fun(z))
    assert merit(x + a.alpha * r.d) - merit(x) <= prm.sigma * a.alpha * r.theta
    assert merit(x + a.alpha * r.d) < merit(x)
    # maximality: the previous grid point fails the test
    if a.backtracks > 0:
        prev = a.alpha / prm.gamma
        assert merit(x + prev * r.d) - merit(x) > prm.sigma * prev * r.theta
    if v.backtracks > 0:
        prev = v.alpha / prm.gamma
        assert not np.all(p.fun(x + prev * r.d) - F <= prm.sigma * prev * (J @ r.d))
