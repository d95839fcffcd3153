"""Dense vector/matrix kernels and the BFGS update pair.

Vectors and symmetric matrices are plain float64 numpy arrays. Every
function here is pure: inputs are never modified and new arrays are
returned.
"""

import numpy as np

DEFAULT_CURVATURE_TOL = 1e-10


def as_vector(v, name="vector"):
    """Return ``v`` as a finite 1-D float array, raising ValueError otherwise."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_symmetric(M, name="matrix"):
    """Return ``M`` as a finite, exactly symmetric square float array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return 0.5 * (arr + arr.T)


def _check_pair(M, s, y):
    n = M.shape[0]
    if s.shape[0] != n or y.shape[0] != n:
        raise ValueError(
            f"dimension mismatch: matrix {n}x{n}, s {s.shape[0]}, y {y.shape[0]}"
        )


def curvature_ok(s, y, curvature_tol=DEFAULT_CURVATURE_TOL):
    """Relative curvature test ``s.y > tol*|s||y|`` shared by both updates."""
    if curvature_tol < 0:
        raise ValueError("curvature_tol must be >= 0")
    sy = float(s @ y)
    return bool(sy > curvature_tol * np.linalg.norm(s) * np.linalg.norm(y) and sy > 0.0)


def bfgs_update_inverse(H, s, y, curvature_tol=DEFAULT_CURVATURE_TOL):
    """BFGS update of the inverse metric ``H = B^{-1}``.

    Returns ``(I - s y^T/s^T y) H (I - y s^T/s^T y) + s s^T/s^T y`` when the
    curvature test passes and ``H`` unchanged otherwise. The product form is
    expanded so the cost is O(n^2) rather than a dense matrix product.
    """
    H = as_symmetric(H, "H")
    s = as_vector(s, "s")
    y = as_vector(y, "y")
    _check_pair(H, s, y)
    if not curvature_ok(s, y, curvature_tol):
        return H
    rho = 1.0 / float(s @ y)
    Hy = H @ y
    yHy = float(y @ Hy)
    out = H - rho * (np.outer(s, Hy) + np.outer(Hy, s))
    out += (rho * rho * yHy + rho) * np.outer(s, s)
    return 0.5 * (out + out.T)


def bfgs_update_primal(B, s, y, curvature_tol=DEFAULT_CURVATURE_TOL):
    """BFGS update of the primal metric ``B``; skip rule identical to the inverse."""
    B = as_symmetric(B, "B")
    s = as_vector(s, "s")
    y = as_vector(y, "y")
    _check_pair(B, s, y)
    if not curvature_ok(s, y, curvature_tol):
        return B
    Bs = B @ s
    sBs = float(s @ Bs)
    if sBs <= 0.0:
        raise ArithmeticError("s^T B s <= 0: B is not positive definite")
    out = B - np.outer(Bs, Bs) / sBs + np.outer(y, y) / float(s @ y)
    return 0.5 * (out + out.T)


def spd_check(M, tol=1e-12):
    """True iff a Cholesky factorization of ``M`` succeeds with pivots > ``tol``."""
    try:
        L = np.linalg.cholesky(as_symmetric(M))
    except (np.linalg.LinAlgError, ValueError):
        return False
    return bool(np.all(np.diag(L) ** 2 > tol))


def eig_bounds_estimate(M):
    """Smallest and largest eigenvalue of a symmetric matrix.

    LAPACK's symmetric eigensolver is accurate far beyond the 1e-8 relative
    target at the sizes used here. ``numpy.linalg.LinAlgError`` propagates
    on non-convergence.
    """
    w = np.linalg.eigvalsh(as_symmetric(M))
    return float(w[0]), float(w[-1])
