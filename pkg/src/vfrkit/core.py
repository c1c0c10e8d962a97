"""Deterministic numeric kernels: symmetric eigendecomposition and
minimum-cost assignment.

Both are thin validating wrappers over the selected backend kernel
(compiled or pure NumPy, see ``_backend``); results are identical either
way.
"""
import numpy as np

from . import _backend
from .errors import ValidationError

SYMMETRY_RTOL = 1e-9
JACOBI_RTOL = 1e-12


def backend_name():
    """Name of the active kernel backend ('cython' or 'python')."""
    return _backend.BACKEND


def _fix_signs(vectors):
    # Deterministic sign convention: the largest-magnitude component of
    # each eigenvector is made non-negative (first such index on ties).
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def symmetric_eigendecomposition(a):
    """Eigendecompose a symmetric matrix via cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted in
    descending order and eigenvectors as matching orthonormal columns.
    Raises ValidationError for non-square, non-finite or non-symmetric
    input.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains non-finite entries")
    norm = np.linalg.norm(a)
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * max(norm, 1.0):
        raise ValidationError("matrix is not symmetric within tolerance")
    values, vectors = _backend.jacobi_eigh(a, rel_tol=JACOBI_RTOL)
    order = np.argsort(-values, kind="stable")
    return values[order], _fix_signs(vectors[:, order])


def hungarian_assignment(cost):
    """Optimal one-to-one assignment minimizing total cost.

    Accepts rectangular matrices; unmatched rows/columns are omitted.
    Returns (row, col) pairs sorted by row index.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise ValidationError(f"expected a non-empty 2-D cost matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValidationError("cost matrix contains non-finite entries")
    n, m = cost.shape
    if n <= m:
        col_of_row = _backend.hungarian(cost)
        pairs = [(i, int(col_of_row[i])) for i in range(n)]
    else:
        row_of_col = _backend.hungarian(cost.T.copy())
        pairs = sorted((int(row_of_col[j]), j) for j in range(m))
    return pairs
