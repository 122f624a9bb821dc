"""Small dense linear-algebra kernels used by the solvers.

Everything here works on plain ``numpy`` arrays and is side-effect free.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonFinite, NotUnit, SingularMatrix, SizeMismatch

#: relative pivot floor of :func:`solve_general`
PIVOT_FLOOR = 1e-14


class SymmetricEigen(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def solve_general(A, b) -> np.ndarray:
    """Solve ``A y = b`` by LU factorisation with partial (row) pivoting.

    Raises :class:`SingularMatrix` as soon as a pivot falls below
    ``PIVOT_FLOOR * max|A_ij|``. The check is deliberate: callers rely on
    near-singular systems being reported rather than regularised.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n or b.shape != (n,):
        raise SizeMismatch(f"expected ({n},{n}) matrix and ({n},) vector, got {A.shape} and {b.shape}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise NonFinite("non-finite entry in linear system")
    floor = PIVOT_FLOOR * np.max(np.abs(A)) if n else 0.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if abs(A[p, k]) <= floor or A[p, k] == 0.0:
            raise SingularMatrix(f"pivot {A[p, k]:.3e} below floor at column {k}")
        if p != k:
            A[[k, p]] = A[[p, k]]
            b[[k, p]] = b[[p, k]]
        l = A[k + 1:, k] / A[k, k]
        A[k + 1:, k:] -= np.outer(l, A[k, k:])
        b[k + 1:] -= l * b[k]
    y = np.empty(n)
    for k in range(n - 1, -1, -1):
        y[k] = (b[k] - A[k, k + 1:] @ y[k + 1:]) / A[k, k]
    return y


def symmetric_eigen(A) -> SymmetricEigen:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains NaN or Inf")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return SymmetricEigen(w, V)


def orthonormal_complement(x) -> np.ndarray:
    """Return an ``n x (n-1)`` matrix whose orthonormal columns span ``x``'s complement.

    Built from the Householder reflector that sends ``x`` to ``-sign(x_1) e_1``;
    the columns are the reflector's columns 2..n.
    """
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise NotUnit(f"|x| = {np.linalg.norm(x)!r}")
    return _householder_complement(x)


def _householder_complement(x):
    n = x.shape[0]
    v = x.copy()
    v[0] += 1.0 if x[0] >= 0.0 else -1.0
    P = np.eye(n) - (2.0 / (v @ v)) * np.outer(v, v)
    return P[:, 1:]
