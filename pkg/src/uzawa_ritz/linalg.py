"""Minimal dense linear algebra: Cholesky solves and a cyclic Jacobi
eigensolver.  Everything here targets desk-scale matrices (dims <= 100)."""

from __future__ import annotations

import numpy as np


class NotPositiveDefiniteError(ValueError):
    """Raised when a Cholesky pivot falls at or below the allowed minimum."""


def _check_symmetric(a: np.ndarray, tol: float = 1e-12) -> None:
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    if float(np.abs(a - a.T).max()) > tol * scale:
        raise ValueError("matrix is not symmetric within 1e-12")


def cholesky(a, min_pivot: float = 0.0) -> np.ndarray:
    """Lower-triangular L with a = L @ L.T.

    Raises NotPositiveDefiniteError if any pivot is <= min_pivot.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        d = a[j, j] - L[j, :j] @ L[j, :j]
        if d <= min_pivot:
            raise NotPositiveDefiniteError(
                f"pivot {d:.3e} at row {j} is not above {min_pivot:.3e}"
            )
        L[j, j] = np.sqrt(d)
        L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def solve_lower(L: np.ndarray, b):
    """Forward substitution; b may be a vector or a matrix of columns."""
    y = np.array(b, dtype=float)
    for i in range(L.shape[0]):
        y[i] -= L[i, :i] @ y[:i]
        y[i] /= L[i, i]
    return y


def solve_upper_from_lower(L: np.ndarray, b):
    """Back substitution with L.T; b may be a vector or a matrix."""
    x = np.array(b, dtype=float)
    for i in range(L.shape[0] - 1, -1, -1):
        x[i] -= L[i + 1 :, i] @ x[i + 1 :]
        x[i] /= L[i, i]
    return x


def solve_cholesky(L: np.ndarray, b):
    return solve_upper_from_lower(L, solve_lower(L, b))


def solve_spd(a, rhs, min_pivot: float = 0.0):
    """Cholesky solve of a symmetric positive-definite system."""
    a = np.asarray(a, dtype=float)
    _check_symmetric(a)
    return solve_cholesky(cholesky(a, min_pivot=min_pivot), rhs)


def jacobi_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm drops below tol relative to
    the matrix scale.  Returns the eigenvalues sorted ascending.
    """
    a = np.asarray(a, dtype=float)
    _check_symmetric(a)
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    if n == 1:
        return a[0, :1].copy()
    scale = max(1.0, float(np.sqrt((a * a).sum())))
    for _ in range(max_sweeps):
        off = np.sqrt(max((a * a).sum() - (np.diag(a) ** 2).sum(), 0.0))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 0.1 * tol * scale / (n * n):
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
    return np.sort(np.diag(a))
