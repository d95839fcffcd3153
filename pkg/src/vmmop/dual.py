"""Direction-finding subproblem solved in the dual over the unit simplex.

For a Jacobian ``J`` (rows are objective gradients) and an inverse metric
``H``, the dual minimizes ``q(lam) = 1/2 lam^T G lam`` with
``G = J H J^T`` over the simplex. The primal direction, criticality value
and auxiliary scalar follow from the minimizer::

    d     = -H J^T lam
    theta = -1/2 lam^T G lam        (always <= 0)
    t     = 2 * theta               (= -d^T B d)

Both duals here are minimized by the same simplex routine: Frank-Wolfe
steps (with away steps) followed by a Newton step restricted to the face
spanned by the current support. Plain Frank-Wolfe is sublinear once the
minimizer sits on a face or the Gram matrix is ill-conditioned; the face
step makes the tight default gap reachable within the inner budget.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve


def default_max_inner(m):
    return 10 * m * m + 100


DEFAULT_DUAL_TOL = 1e-12
_MAX_HALVINGS = 60
_DECREASE = 1e-4


@dataclass(frozen=True)
class DualResult:
    lam: np.ndarray
    d: np.ndarray
    theta: float
    t: float
    gap: float
    inner_iters: int


def build_gram(J, H):
    """Gram matrix ``G_ij = grad_i^T H grad_j`` of the gradients in the ``H`` metric."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    H = np.asarray(H, dtype=float)
    if H.shape != (J.shape[1], J.shape[1]):
        raise ValueError(f"dimension mismatch: J {J.shape}, H {H.shape}")
    G = J @ (H @ J.T)
    return 0.5 * (G + G.T)


def _fw_direction(grad, lam):
    """Pick the Frank-Wolfe or away direction, whichever has the larger gap.

    Returns ``(v, step_max, fw_gap, snap)``. ``snap = (i, value)`` pins
    coordinate ``i`` when the full step ``step_max`` is taken: the target
    vertex goes to 1 for a Frank-Wolfe step and the dropped vertex to 0 for
    an away step. Ties go to the Frank-Wolfe step and, within a step type,
    to the smallest index.
    """
    j = int(np.argmin(grad))
    g_lam = float(grad @ lam)
    fw_gap = g_lam - float(grad[j])
    support = np.flatnonzero(lam > 0.0)
    a = int(support[np.argmax(grad[support])])
    away_gap = float(grad[a]) - g_lam
    if fw_gap >= away_gap or lam[a] >= 1.0:
        v = -lam
        v[j] += 1.0
        return v, 1.0, fw_gap, (j, 1.0)
    v = lam.copy()
    v[a] -= 1.0
    return v, lam[a] / (1.0 - lam[a]), fw_gap, (a, 0.0)


def _move(lam, v, step, step_max, snap):
    """``lam + step*v`` kept exactly on the simplex."""
    if snap is not None and step == step_max and snap[1] == 1.0:
        out = np.zeros_like(lam)
        out[snap[0]] = 1.0
        return out
    out = np.maximum(lam + step * v, 0.0)
    if snap is not None and step == step_max:
        out[snap[0]] = 0.0
    return out / out.sum()


def _face_newton(lam, grad, hess):
    """Newton direction on the affine hull of the support of ``lam``.

    Returns ``(v, step_max, snap)`` or ``None`` when the support is a vertex
    or the step is not a descent direction.
    """
    S = np.flatnonzero(lam > 0.0)
    k = S.size
    if k < 2:
        return None
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = hess[np.ix_(S, S)]
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    # A constant shift of grad only moves the multiplier; centering it keeps
    # the right-hand side at the size of the step and avoids cancellation.
    gS = grad[S] - grad[S].mean()
    rhs = np.concatenate([-gS, [0.0]])
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    v = np.zeros_like(lam)
    v[S] = sol[:k] - sol[:k].mean()  # stay on sum(lam) = 1
    if float(grad @ v) >= 0.0:
        return None
    neg = v < 0.0
    if not np.any(neg):
        return v, 1.0, None
    ratios = np.full(lam.shape, np.inf)
    ratios[neg] = lam[neg] / -v[neg]
    i = int(np.argmin(ratios))
    if ratios[i] >= 1.0:
        return v, 1.0, None
    return v, float(ratios[i]), (i, 0.0)


def _halving_step(fun, lam, q, v, step_max, snap, slope):
    """Largest step in ``step_max * 2^-k`` with ``q(new) <= q + c * step * slope``.

    ``c`` is small enough that a full Newton step on a nearly quadratic
    ``q`` (which decreases by half the linear prediction) is accepted.

    The test carries a few ulps of slack in ``q``: near the minimizer the
    predicted decrease drops below rounding while the gradient still
    improves.
    """
    noise = 8.0 * np.finfo(float).eps * abs(q)
    step = step_max
    for _ in range(_MAX_HALVINGS):
        trial = _move(lam, v, step, step_max, snap)
        terms = fun(trial)
        if terms[0] <= q + _DECREASE * step * slope + noise:
            return trial, terms
        step *= 0.5
    return None


def _simplex_minimize(fun, m, tol, max_inner, quadratic=False):
    """Minimize a smooth convex ``q`` over the unit simplex.

    ``fun(lam)`` returns ``(q, grad, hess, extra)``. For a quadratic the
    Frank-Wolfe step uses the exact line minimizer and the face step is a
    full Newton step; otherwise both backtrack by halving. Returns
    ``(lam, terms, gap, iters)`` with ``gap`` the Frank-Wolfe gap.
    """
    lam = np.full(m, 1.0 / m)
    terms = fun(lam)
    it = 0
    while True:
        q, grad, hess, _ = terms
        v, step_max, gap, snap = _fw_direction(grad, lam)
        if gap <= tol or it >= max_inner:
            break
        slope = float(grad @ v)
        if quadratic:
            curv = float(v @ (hess @ v))
            step = step_max if curv <= 0.0 else min(max(-slope / curv, 0.0), step_max)
            lam = _move(lam, v, step, step_max, snap)
            terms = fun(lam)
        else:
            moved = _halving_step(fun, lam, q, v, step_max, snap, slope)
            if moved is None:
                break
            lam, terms = moved
        it += 1

        q, grad, hess, _ = terms
        face = _face_newton(lam, grad, hess)
        if face is not None:
            v, step_max, snap = face
            moved = _halving_step(fun, lam, q, v, step_max, snap, float(grad @ v))
            if moved is not None:
                lam, terms = moved
    return lam, terms, max(gap, 0.0), it


def _check_budget(tol, max_inner, m):
    if tol <= 0:
        raise ValueError("tol must be > 0")
    if max_inner is None:
        max_inner = default_max_inner(m)
    if max_inner < 1:
        raise ValueError("max_inner must be >= 1")
    return max_inner


def frank_wolfe_simplex(G, tol=DEFAULT_DUAL_TOL, max_inner=None):
    """Minimize ``1/2 lam^T G lam`` over the unit simplex.

    Starts from the barycenter. Each iteration moves toward the best vertex
    (smallest index on ties) or away from the worst support vertex with an
    exact line search, then takes a Newton step on the current face when it
    decreases ``q``. Returns ``(lam, gap, inner_iters)``; if the budget runs
    out the returned gap is simply larger than ``tol``.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    m = G.shape[0]
    max_inner = _check_budget(tol, max_inner, m)
    if m == 1:
        return np.ones(1), 0.0, 0

    def fun(lam):
        g = G @ lam
        return 0.5 * float(lam @ g), g, G, None

    lam, _, gap, it = _simplex_minimize(fun, m, tol, max_inner, quadratic=True)
    return lam, gap, it


def solve_subproblem(J, H, tol=DEFAULT_DUAL_TOL, max_inner=None):
    """Multipliers, direction and criticality value for a shared metric ``H``."""
    J = np.atleast_2d(np.asarray(J, dtype=float))
    G = build_gram(J, H)
    lam, gap, iters = frank_wolfe_simplex(G, tol, max_inner)
    g_lam = J.T @ lam
    d = -(H @ g_lam)
    # theta from d^T g_lam equals -lam^T G lam up to rounding but never
    # drifts above zero.
    theta = min(0.5 * float(d @ g_lam), 0.0)
    return DualResult(lam, d, theta, 2.0 * theta, gap, iters)


def _qnm_terms(J, B_list, lam):
    g_lam = J.T @ lam
    M = sum(l * B for l, B in zip(lam, B_list))
    try:
        factor = cho_factor(M)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("weighted metric is not positive definite") from exc
    d = -cho_solve(factor, g_lam)
    q = -0.5 * float(g_lam @ d)
    # w_k = grad_k + B_k d; grad q = -(J d + 1/2 d^T B_k d), hess q = W^T M^{-1} W
    W = np.stack([g + B @ d for g, B in zip(J, B_list)], axis=1)
    grad = -(J @ d + 0.5 * np.array([d @ (B @ d) for B in B_list]))
    hess = W.T @ cho_solve(factor, W)
    return q, grad, 0.5 * (hess + hess.T), d


def solve_qnm_dual(J, B_list, tol=DEFAULT_DUAL_TOL, max_inner=None):
    """Dual of the per-objective quasi-Newton subproblem.

    ``min_d max_i grad_i^T d + 1/2 d^T B_i d`` has the convex dual
    ``q(lam) = 1/2 g^T M^{-1} g`` with ``g = J^T lam`` and
    ``M = sum lam_i B_i``, minimized over the simplex by the same routine as
    :func:`frank_wolfe_simplex`; steps are halved from the largest feasible
    one until ``q`` decreases sufficiently.
    """
    J = np.atleast_2d(np.asarray(J, dtype=float))
    m, n = J.shape
    B_list = [np.asarray(B, dtype=float) for B in B_list]
    if len(B_list) != m or any(B.shape != (n, n) for B in B_list):
        raise ValueError("need one n x n metric per objective")
    max_inner = _check_budget(tol, max_inner, m)

    def fun(lam):
        return _qnm_terms(J, B_list, lam)

    if m == 1:
        q, _, _, d = fun(np.ones(1))
        return DualResult(np.ones(1), d, -q, -2.0 * q, 0.0, 0)
    lam, (q, _, _, d), gap, it = _simplex_minimize(fun, m, tol, max_inner)
    theta = min(-q, 0.0)
    return DualResult(lam, d, theta, 2.0 * theta, gap, it)
