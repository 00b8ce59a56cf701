"""Symmetric positive-semidefinite linear algebra.

Eigendecomposition with explicit numerical-rank decisions, Moore-Penrose
pseudoinverse, canonical square roots, and range projectors. Everything
downstream (conditioning, quadratic solves, RKHS geometry) is built on the
factored form produced here, so rank thresholds, eigenvector signs, and
tie-breaking are all pinned to keep outputs reproducible across runs.

Rank convention: an eigenvalue (or singular value) counts toward the rank
when it exceeds ``rank_tol * largest_magnitude_eigenvalue``. The default
``rank_tol`` is ``max(n_rows, n_cols) * machine_epsilon``, the standard
numerical-rank rule. All ``rank_tol`` arguments in this package are this
relative cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NotPsdError

EPS = float(np.finfo(float).eps)


def default_rank_tol(n_rows: int, n_cols: int | None = None) -> float:
    """Default relative spectral cutoff: max(rows, cols) * machine epsilon."""
    if n_cols is None:
        n_cols = n_rows
    return max(int(n_rows), int(n_cols)) * EPS


def symmetrize(matrix) -> np.ndarray:
    """Return (M + M^T)/2 as a float array; rejects non-square input."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return (m + m.T) / 2.0


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make each column's largest-magnitude entry positive (deterministic basis)."""
    if vectors.shape[1] == 0:
        return vectors
    lead = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs


def _order_descending(values: np.ndarray, vectors: np.ndarray):
    """Stable descending sort; exact ties ordered by eigenvector entries."""
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = _fix_signs(vectors[:, order])
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[j + 1] == values[i]:
            j += 1
        if j > i:
            block = vectors[:, i : j + 1]
            perm = sorted(range(block.shape[1]), key=lambda c: tuple(block[:, c]))
            vectors[:, i : j + 1] = block[:, perm]
        i = j + 1
    return values, vectors


def eig_psd(matrix, rank_tol: float | None = None, scale_floor: float = 0.0):
    """Eigendecompose a PSD matrix with a numerical rank decision.

    Returns ``(eigenvalues, eigenvectors, rank)`` where the eigenvalues are
    the ``rank`` values above threshold in descending order and the
    eigenvectors are the matching orthonormal columns. Raises
    :class:`NotPsdError` when some eigenvalue falls below minus the
    effective threshold.

    ``scale_floor`` lets callers anchor the threshold to the scale of the
    computation that produced the matrix (e.g. the prior spectrum when
    factoring a posterior covariance), since round-off lives at that scale
    rather than at the output's own.
    """
    k = symmetrize(matrix)
    if rank_tol is None:
        rank_tol = default_rank_tol(k.shape[0])
    elif rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    if k.shape[0] == 0:
        return np.zeros(0), np.zeros((0, 0)), 0
    values, vectors = np.linalg.eigh(k)
    values, vectors = _order_descending(values, vectors)
    scale = max(float(np.max(np.abs(values))), float(scale_floor))
    threshold = rank_tol * scale
    if values[-1] < -threshold:
        raise NotPsdError(
            f"matrix has eigenvalue {values[-1]:.3e} below -{threshold:.3e}; not PSD"
        )
    rank = int(np.sum(values > threshold))
    return values[:rank].copy(), vectors[:, :rank].copy(), rank


@dataclass(frozen=True)
class PsdFactor:
    """Canonical square root of a PSD matrix: K = factor @ factor.T.

    The factor is U_r diag(sqrt(eigenvalues)); its columns are mutually
    orthogonal with squared norms equal to the (positive, descending)
    eigenvalues. ``rank`` may be zero, in which case ``factor`` has no
    columns.
    """

    dim: int
    rank: int
    factor: np.ndarray
    eigenvalues: np.ndarray

    def gram(self) -> np.ndarray:
        """Reconstruct K = A A^T (symmetrized to absorb round-off)."""
        return symmetrize(self.factor @ self.factor.T)

    def basis(self) -> np.ndarray:
        """Orthonormal basis U_r of Range(K), shape (dim, rank)."""
        if self.rank == 0:
            return np.zeros((self.dim, 0))
        return self.factor / np.sqrt(self.eigenvalues)

    def pinv(self) -> np.ndarray:
        """Moore-Penrose pseudoinverse U_r diag(1/eigenvalues) U_r^T."""
        if self.rank == 0:
            return np.zeros((self.dim, self.dim))
        u = self.basis()
        return symmetrize((u / self.eigenvalues) @ u.T)


def canonical_sqrt(matrix, rank_tol: float | None = None,
                   scale_floor: float = 0.0) -> PsdFactor:
    """Canonical square root A = U_r diag(sqrt(lambda_r)) of a PSD matrix."""
    values, vectors, rank = eig_psd(matrix, rank_tol, scale_floor)
    factor = vectors * np.sqrt(values)
    return PsdFactor(dim=int(np.asarray(matrix).shape[0]), rank=rank,
                     factor=factor, eigenvalues=values)


def canonicalize_factor(factor, rank_tol: float | None = None) -> PsdFactor:
    """Canonical form of an arbitrary n x p square-root factor.

    Thin SVD A = U S V^T gives the canonical factor U_r S_r; the Gram
    matrix A A^T is preserved, so any two factors differing by a
    right-rotation canonicalize to the same object (up to column signs,
    which are fixed deterministically).
    """
    a = np.asarray(factor, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix factor, got shape {a.shape}")
    n, p = a.shape
    if rank_tol is None:
        rank_tol = default_rank_tol(n, p)
    elif rank_tol < 0:
        raise ValueError("rank_tol must be nonnegative")
    if p == 0 or n == 0 or not np.any(a):
        return PsdFactor(dim=n, rank=0, factor=np.zeros((n, 0)), eigenvalues=np.zeros(0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    s, u = _order_descending(s, u)  # SVD is already descending; this pins ties/signs
    threshold = rank_tol * float(s[0])
    rank = int(np.sum(s > threshold))
    return PsdFactor(dim=n, rank=rank, factor=u[:, :rank] * s[:rank],
                     eigenvalues=(s[:rank] ** 2).copy())


def pseudoinverse(matrix, rank_tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a PSD matrix via truncated eigendecomposition."""
    values, vectors, rank = eig_psd(matrix, rank_tol)
    n = np.asarray(matrix).shape[0]
    if rank == 0:
        return np.zeros((n, n))
    return symmetrize((vectors / values) @ vectors.T)


def range_projector(factor: PsdFactor) -> np.ndarray:
    """Orthogonal projector P = U_r U_r^T onto the factor's column span."""
    u = factor.basis()
    return symmetrize(u @ u.T)


def weighted_norm_sq(vector, weight) -> float:
    """Quadratic form v^T A v; nonnegative (to round-off) for PSD A."""
    v = np.asarray(vector, dtype=float)
    a = np.asarray(weight, dtype=float)
    if v.ndim != 1:
        raise DimensionError(f"expected a vector, got shape {v.shape}")
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != v.shape[0]:
        raise DimensionError(
            f"weight shape {a.shape} incompatible with vector of length {v.shape[0]}"
        )
    return float(v @ a @ v)
