import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vmmop.linalg import (
    bfgs_update_inverse,
    bfgs_update_primal,
    curvature_ok,
    eig_bounds_estimate,
    spd_check,
)


def product_form_inverse(H, s, y):
    """Oracle: the textbook product form, evaluated with dense matrix products."""
    rho = 1.0 / (s @ y)
    I = np.eye(len(s))
    return (I - rho * np.outer(s, y)) @ H @ (I - rho * np.outer(y, s)) + rho * np.outer(s, s)


def test_inverse_update_examples():
    # Primal update gives diag(2, 1); its inverse is diag(0.5, 1).
    B1 = bfgs_update_primal(np.eye(2), [1.0, 0.0], [2.0, 0.0])
    np.testing.assert_allclose(np.linalg.inv(B1), np.diag([0.5, 1.0]), atol=1e-15)
    H1 = bfgs_update_inverse(np.eye(2), [1.0, 0.0], [2.0, 0.0])
    np.testing.assert_allclose(H1, np.diag([0.5, 1.0]), atol=1e-15)

    np.testing.assert_allclose(bfgs_update_inverse(np.eye(2), [1.0, 1.0], [1.0, 1.0]), np.eye(2), atol=1e-15)
    np.testing.assert_array_equal(bfgs_update_inverse(np.eye(2), [1.0, 0.0], [-1.0, 0.0]), np.eye(2))


def test_primal_update_examples():
    B1 = bfgs_update_primal(np.eye(2), [1.0, 0.0], [2.0, 0.0])
    np.testing.assert_allclose(B1, np.diag([2.0, 1.0]), atol=1e-15)
    np.testing.assert_allclose(B1 @ bfgs_update_inverse(np.eye(2), [1.0, 0.0], [2.0, 0.0]), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(bfgs_update_primal(np.eye(2), [1.0, 1.0], [1.0, 1.0]), np.eye(2), atol=1e-15)
    B = np.diag([2.0, 1.0])
    np.testing.assert_array_equal(bfgs_update_primal(B, [1.0, 0.0], [-1.0, 0.0]), B)


def test_update_errors():
    with pytest.raises(ValueError):
        bfgs_update_inverse(np.eye(2), [1.0, 0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        bfgs_update_inverse(np.eye(2), [np.nan, 0.0], [1.0, 0.0])
    with pytest.raises(ArithmeticError):
        bfgs_update_primal(np.diag([-1.0, 1.0]), [1.0, 0.0], [1.0, 0.0])


def test_relative_curvature_threshold():
    s = np.array([1.0, 0.0])
    assert curvature_ok(s, np.array([1e-12, 1.0]), 1e-10) is False
    assert curvature_ok(s, np.array([1e-9, 1.0]), 1e-10)
    assert curvature_ok(s, np.array([1e-300, 0.0]), 0.0)
    assert not curvature_ok(s, np.zeros(2), 0.0)


def test_spd_check_examples():
    assert spd_check(np.eye(2), 1e-12)
    assert not spd_check(np.diag([1.0, -1.0]), 1e-12)
    assert spd_check(np.diag([0.5, 1.0]), 1e-12)
    assert not spd_check(np.diag([1e-14, 1.0]), 1e-12)


def test_eig_bounds_examples():
    assert eig_bounds_estimate(np.diag([0.5, 1.0])) == pytest.approx((0.5, 1.0), abs=1e-12)
    assert eig_bounds_estimate(np.eye(2)) == pytest.approx((1.0, 1.0), abs=1e-12)
    # Characteristic polynomial (2 - t)^2 - 1 has roots 1 and 3.
    assert eig_bounds_estimate([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx((1.0, 3.0), abs=1e-12)


def _spd_pair(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    H = A @ A.T + n * np.eye(n)
    s = rng.standard_normal(n)
    # y = C s with C SPD guarantees s.y > 0.
    C = rng.standard_normal((n, n))
    y = (C @ C.T + np.eye(n)) @ s
    return H, s, y


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_secant_and_spd_preservation(seed, n):
    H, s, y = _spd_pair(seed, n)
    H1 = bfgs_update_inverse(H, s, y)
    scale = np.linalg.norm(s) + np.linalg.norm(y)
    assert np.linalg.norm(H1 @ y - s) <= 1e-10 * scale * max(1.0, np.linalg.norm(H))
    assert spd_check(H1)
    np.testing.assert_allclose(H1, product_form_inverse(H, s, y), rtol=1e-10, atol=1e-12)

    B = np.linalg.inv(H)
    B1 = bfgs_update_primal(B, s, y)
    assert np.linalg.norm(B1 @ s - y) <= 1e-10 * scale * max(1.0, np.linalg.norm(B))
    assert spd_check(B1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_paired_updates_stay_inverse(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    # Stream from a fixed SPD quadratic: y = A s keeps every pair consistent.
    R = rng.standard_normal((n, n))
    A = np.eye(n) + 0.5 * (R @ R.T) / n
    H = np.eye(n)
    B = np.eye(n)
    for _ in range(10):
        s = rng.standard_normal(n)
        y = A @ s
        H = bfgs_update_inverse(H, s, y)
        B = bfgs_update_primal(B, s, y)
    assert np.linalg.norm(H @ B - np.eye(n)) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_skip_symmetry(seed):
    rng = np.random.default_rng(seed)
    n = 3
    s = rng.standard_normal(n)
    y = rng.standard_normal(n)
    H = np.eye(n)
    skipped_inv = np.array_equal(bfgs_update_inverse(H, s, y), H)
    skipped_pri = np.array_equal(bfgs_update_primal(H, s, y), H)
    assert skipped_inv == skipped_pri == (not curvature_ok(s, y))
