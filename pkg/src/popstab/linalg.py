"""Dense linear-algebra kernel used by the discretization.

Thin contracts over LAPACK (via scipy): factorization-based solves with a
relative pivot guard, Kronecker products, and the nonsymmetric dense
eigensolver (balancing + Hessenberg reduction + QR, which is what *geev
performs).  Matrices are plain float64 2-D numpy arrays.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Relative pivot threshold: the trimmed differentiation matrices are
# nonsingular but increasingly ill-conditioned with the degree.
PIVOT_RTOL = 1e-13


class SingularMatrix(ArithmeticError):
    """A pivot underflowed the relative threshold during factorization."""


class NoConvergence(ArithmeticError):
    """The QR eigenvalue iteration failed to deflate."""


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def norm_inf(a) -> float:
    """Maximum absolute row sum (for vectors, the max absolute entry)."""
    a = np.asarray(a)
    if a.ndim <= 1:
        return float(np.max(np.abs(a))) if a.size else 0.0
    return float(np.max(np.sum(np.abs(a), axis=1)))


def lu_factor(a) -> tuple[np.ndarray, np.ndarray]:
    """LU with partial pivoting; raises SingularMatrix on a tiny pivot."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    with warnings.catch_warnings():
        # exact singularity is reported through the pivot threshold below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) <= PIVOT_RTOL * norm_inf(a):
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below threshold for matrix of "
            f"inf-norm {norm_inf(a):.3e}"
        )
    return lu, piv


def lu_solve(a, b) -> np.ndarray:
    """Solve A X = B by pivoted LU; B may be a vector or a matrix."""
    factors = lu_factor(a)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != factors[0].shape[0]:
        raise ValueError("right-hand side rows must match the matrix")
    return scipy.linalg.lu_solve(factors, b, check_finite=False)


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is A[i, j] * B."""
    return np.kron(as_matrix(a), as_matrix(b))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues with index-paired right eigenvectors (as columns).

    Vectors have unit Euclidean norm with the first significant component
    rotated to be real and positive, so repeated runs give identical output.
    """

    values: np.ndarray
    vectors: np.ndarray


def _canonicalize(vectors: np.ndarray) -> np.ndarray:
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)
    out = np.array(vectors, dtype=complex)
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        significant = np.nonzero(mags > 1e-12 * mags.max())[0]
        lead = col[significant[0]]
        out[:, j] = col * (np.conj(lead) / np.abs(lead))
    return out


def eigen_dense(m) -> EigenDecomposition:
    """All eigenvalues and right eigenvectors of a real square matrix."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    try:
        values, vectors = scipy.linalg.eig(m, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return EigenDecomposition(values, _canonicalize(vectors))
