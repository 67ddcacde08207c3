"""Dense linear algebra substrate: products, row normalization, square SVD.

Matrices are plain 2-D float64 numpy arrays (row-major). The SVD is a
one-sided Jacobi implementation: cyclic column-pair sweeps orthogonalize
the working matrix G = M V until all off-diagonal couplings vanish, at
which point the column norms of G are the singular values. Jacobi is
simple, accurate at small k, and fully deterministic, which matters more
here than peak speed.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ConsistencyError, ConvergenceError, InputError

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 30


def as_dense(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a validated 2-D float64 array."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def matmul(x, y) -> np.ndarray:
    """Matrix product with shape validation."""
    a = as_dense(x, "left operand")
    b = as_dense(y, "right operand")
    if a.shape[1] != b.shape[0]:
        raise ConsistencyError(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}"
        )
    return a @ b


def transpose(x) -> np.ndarray:
    return as_dense(x).T.copy()


def row_normalize(x) -> np.ndarray:
    """Scale every row to unit Euclidean norm."""
    arr = as_dense(x)
    norms = np.sqrt((arr * arr).sum(axis=1))
    zero = np.nonzero(norms == 0.0)[0]
    if len(zero):
        raise InputError(f"cannot normalize zero row at index {int(zero[0])}")
    return arr / norms[:, None]


@njit(cache=True)
def _jacobi_sweeps(G, V, tol, max_sweeps):
    """Cyclic one-sided Jacobi; returns sweeps used, or -1 if not converged."""
    n_rows, k = G.shape
    for sweep in range(1, max_sweeps + 1):
        converged = True
        for p in range(k - 1):
            for q in range(p + 1, k):
                app = 0.0
                aqq = 0.0
                apq = 0.0
                for r in range(n_rows):
                    gp = G[r, p]
                    gq = G[r, q]
                    app += gp * gp
                    aqq += gq * gq
                    apq += gp * gq
                denom = np.sqrt(app * aqq)
                if denom == 0.0 or abs(apq) <= tol * denom:
                    continue
                converged = False
                zeta = (aqq - app) / (2.0 * apq)
                if zeta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for r in range(n_rows):
                    gp = G[r, p]
                    gq = G[r, q]
                    G[r, p] = c * gp - s * gq
                    G[r, q] = s * gp + c * gq
                for r in range(k):
                    vp = V[r, p]
                    vq = V[r, q]
                    V[r, p] = c * vp - s * vq
                    V[r, q] = s * vp + c * vq
        if converged:
            return sweep
    return -1


def _complete_basis(U: np.ndarray, start: int) -> None:
    """Fill U[:, start:] with vectors orthonormal to the earlier columns."""
    k = U.shape[0]
    col = start
    for basis in range(k):
        if col >= U.shape[1]:
            return
        v = np.zeros(k)
        v[basis] = 1.0
        for _ in range(2):  # double Gram-Schmidt pass for orthogonality
            for j in range(col):
                v -= (U[:, j] @ v) * U[:, j]
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            U[:, col] = v / norm
            col += 1
    if col < U.shape[1]:
        raise ConvergenceError("failed to complete orthonormal basis")


def svd_square(m, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS):
    """Full SVD of a square matrix: returns (U, sigma, V) with M = U diag(sigma) V^T.

    Singular values are non-negative and sorted descending. The sign of
    each U column is fixed so its largest-magnitude entry is non-negative
    (compensated in V), making the decomposition deterministic.
    """
    M = as_dense(m)
    if M.shape[0] != M.shape[1]:
        raise InputError(f"svd_square requires a square matrix, got {M.shape}")
    k = M.shape[0]
    if k == 0:
        empty = np.zeros((0, 0))
        return empty.copy(), np.zeros(0), empty.copy()

    G = M.copy()
    V = np.eye(k)
    sweeps = _jacobi_sweeps(G, V, tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi SVD did not converge in {max_sweeps} sweeps")

    sigma = np.sqrt((G * G).sum(axis=0))
    order = np.argsort(-sigma, kind="stable")
    G = G[:, order]
    V = V[:, order]
    sigma = sigma[order]

    # Columns with sigma at rounding-noise level cannot yield reliable
    # directions for U; treat them as rank-deficient and rebuild a basis.
    cutoff = k * np.finfo(np.float64).eps * (sigma[0] if k else 0.0)
    U = np.zeros((k, k))
    rank = 0
    for j in range(k):
        if sigma[j] > cutoff:
            U[:, j] = G[:, j] / sigma[j]
            rank = j + 1
        else:
            sigma[j] = 0.0
    _complete_basis(U, rank)

    for j in range(k):
        pivot = int(np.argmax(np.abs(U[:, j])))
        if U[pivot, j] < 0.0:
            U[:, j] = -U[:, j]
            V[:, j] = -V[:, j]
    return U, sigma, V
