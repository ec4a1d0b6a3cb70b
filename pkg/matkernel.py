"""Dense linear-algebra kernel: Gram matrices, inverses, ranks and realignments.

Matrices are float64 numpy arrays; a vector set is stored column-wise (n x s).
"""
import numpy as np
from scipy import linalg

from exceptions import NotUnit, Singular

DEFAULT_RANK_TOL = 1e-10
UNIT_TOL = 1e-9


def as_matrix(S):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim == 1:
        S = S.reshape(-1, 1)
    if S.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix has non-finite entries")
    return S


def scaled_tol(A, tol=DEFAULT_RANK_TOL):
    """tol x max|entry| x max(rows, cols)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return tol * float(np.abs(A).max()) * max(A.shape)


def gram(S):
    S = as_matrix(S)
    G = S.T @ S
    return 0.5 * (G + G.T)


def invert(A, tol=DEFAULT_RANK_TOL):
    A = as_matrix(A)
    rows, cols = A.shape
    if rows != cols:
        raise ValueError(f"cannot invert a non-square {rows}x{cols} matrix")
    threshold = scaled_tol(A, tol)
    if threshold == 0.0:
        raise Singular("zero matrix is singular")
    if rows == 1:
        if abs(A[0, 0]) < threshold:
            raise Singular(f"pivot {A[0, 0]:.3e} below tolerance {threshold:.3e}")
        return np.array([[1.0 / A[0, 0]]])
    lu, piv = linalg.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < threshold:
        raise Singular(
            f"pivot {pivots.min():.3e} below tolerance {threshold:.3e}"
        )
    inv = linalg.lu_solve((lu, piv), np.eye(rows), check_finite=False)
    if not np.all(np.isfinite(inv)):
        raise Singular("inverse has non-finite entries")
    return inv


def grand_sum(A):
    """Sum of all entries, i.e. 1^T A 1."""
    return float(np.sum(A))


def rank(S, tol=DEFAULT_RANK_TOL):
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    S = as_matrix(S)
    if S.size == 0:
        return 0
    threshold = scaled_tol(S, tol)
    if threshold == 0.0:
        return 0
    R, _ = linalg.qr(S, mode="r", pivoting=True, check_finite=False)
    diag = np.abs(np.diag(R))
    return int(np.count_nonzero(diag > threshold))


def solve_transposed(B, b, tol=DEFAULT_RANK_TOL):
    """x with B^T x = b for a square B that passes the rank() test."""
    B = as_matrix(B)
    rows, cols = B.shape
    if rows != cols:
        raise ValueError(f"expected a square matrix, got {rows}x{cols}")
    if rank(B, tol) < rows:
        raise Singular(f"{rows}x{cols} matrix has rank below {rows}")
    lu_piv = linalg.lu_factor(B, check_finite=False)
    x = linalg.lu_solve(lu_piv, np.asarray(b, dtype=np.float64), trans=1, check_finite=False)
    if not np.all(np.isfinite(x)):
        raise Singular("solution has non-finite entries")
    return x


def block_inverse(A, B, D, tol=DEFAULT_RANK_TOL):
    """Inverse of G = [[A, B^T], [B, D]] assembled blockwise through the
    Schur complement D - B A^-1 B^T."""
    A = as_matrix(A)
    D = np.atleast_2d(np.asarray(D, dtype=np.float64))
    B = np.asarray(B, dtype=np.float64).reshape(D.shape[0], A.shape[0])

    A_inv = invert(A, tol)
    BA = B @ A_inv
    schur = D - BA @ B.T
    if schur.shape == (1, 1):
        # scalar path
        value = schur[0, 0]
        if abs(value) < tol * max(1.0, float(np.abs(D).max())):
            raise Singular(f"Schur complement {value:.3e} is numerically zero")
        S_inv = np.array([[1.0 / value]])
    else:
        S_inv = invert(0.5 * (schur + schur.T), tol)

    top_left = A_inv + BA.T @ S_inv @ BA
    top_right = -BA.T @ S_inv
    bottom_left = -S_inv @ BA
    return np.block([[top_left, top_right], [bottom_left, S_inv]])


def check_unit(w, tol=UNIT_TOL, what="vector"):
    norm = float(np.linalg.norm(w))
    if abs(norm - 1.0) > tol:
        raise NotUnit(f"{what} has norm {norm!r}, expected 1")
    return norm


def householder_align(w, tol=UNIT_TOL):
    """Orthonormal T with T e1 = w.

    T is the reflection exchanging e1 and w, or the identity when they coincide.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    check_unit(w, tol)
    n = w.shape[0]
    v = -w.copy()
    v[0] += 1.0
    vv = float(v @ v)
    if vv < 1e-30:
        return np.eye(n)
    return np.eye(n) - (2.0 / vv) * np.outer(v, v)


def normalize_columns(S):
    S = as_matrix(S)
    norms = np.linalg.norm(S, axis=0)
    if np.any(norms == 0.0):
        zero = [int(i) for i in np.flatnonzero(norms == 0.0)]
        raise ValueError(f"cannot normalize zero columns {zero}")
    return S / norms


def random_orthonormal(n, rng):
    """Haar-distributed orthonormal n x n matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def leading_minors_positive(G):
    """Sylvester's criterion on a symmetric matrix."""
    G = as_matrix(G)
    for k in range(1, G.shape[0] + 1):
        if np.linalg.det(G[:k, :k]) <= 0.0:
            return False
    return True
