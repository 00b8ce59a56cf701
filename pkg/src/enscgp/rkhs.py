"""Discrete RKHS geometry induced by a PSD kernel matrix.

The space is Range(K) with inner product <u, v> = u^T K^+ v. Regularized
regression in this geometry shares its minimizer with exact conditioning
and the MAP program; the solver here works in the orthonormal range basis
and deliberately goes through the explicit pseudoinverse, giving a
numerically distinct route from the quadratic-program path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import psd
from .errors import DegenerateModelError, DimensionError
from .gaussian import ObservationModel, _check_data
from .psd import PsdFactor, symmetrize


@dataclass(frozen=True)
class DiscreteRkhs:
    """Range(K) together with K^+ and the orthogonal projector onto it."""

    kernel_factor: PsdFactor
    pinv: np.ndarray
    projector: np.ndarray

    @classmethod
    def from_kernel(cls, kernel, rank_tol: float | None = None) -> "DiscreteRkhs":
        factor = psd.canonical_sqrt(symmetrize(kernel), rank_tol)
        return cls.from_factor(factor)

    @classmethod
    def from_factor(cls, factor: PsdFactor) -> "DiscreteRkhs":
        return cls(kernel_factor=factor, pinv=factor.pinv(),
                   projector=psd.range_projector(factor))

    @property
    def dim(self) -> int:
        return self.kernel_factor.dim

    @property
    def rank(self) -> int:
        return self.kernel_factor.rank


def rkhs_inner(space: DiscreteRkhs, u, v) -> float:
    """Inner product u^T K^+ v (the native product for u, v in Range(K))."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (space.dim,) or v.shape != (space.dim,):
        raise DimensionError(
            f"vectors must have shape ({space.dim},), got {u.shape} and {v.shape}"
        )
    return float(u @ space.pinv @ v)


def rkhs_solve(space: DiscreteRkhs, prior_mean, obs: ObservationModel, y) -> np.ndarray:
    """Regularized regression over g in prior_mean + Range(K).

    Minimizes |y - H g|^2 weighted by R^(-1) plus the squared RKHS norm of
    g - prior_mean. The normal equations are solved in the orthonormal
    basis of Range(K) with the penalty assembled from the stored K^+.
    """
    prior_mean = np.asarray(prior_mean, dtype=float)
    if prior_mean.shape != (space.dim,):
        raise DimensionError(
            f"prior mean must have shape ({space.dim},), got {prior_mean.shape}"
        )
    if obs.state_dim != space.dim:
        raise DimensionError(
            f"observation model expects state dim {obs.state_dim}, space has {space.dim}"
        )
    y = _check_data(obs, y)
    if obs.n_obs == 0 or space.rank == 0:
        return prior_mean.copy()
    d = y - obs.H @ prior_mean
    u = space.kernel_factor.basis()
    reduced = symmetrize(u.T @ (space.pinv + obs.information()) @ u)
    rhs = u.T @ (obs.H.T @ obs.noise_solve(d))
    try:
        chol = cho_factor(reduced, lower=True)
    except np.linalg.LinAlgError:
        raise DegenerateModelError(
            "restricted normal equations are singular; rank tolerance is inconsistent"
        ) from None
    return prior_mean + u @ cho_solve(chol, rhs)


def gram_from_features(features) -> np.ndarray:
    """K = phi^T phi: the Gram matrix of the feature columns phi_i."""
    phi = np.asarray(features, dtype=float)
    if phi.ndim != 2:
        raise DimensionError(f"features must be a matrix, got shape {phi.shape}")
    return symmetrize(phi.T @ phi)


def dual_gram(features) -> np.ndarray:
    """Feature-space Gram phi phi^T; shares its nonzero spectrum with phi^T phi."""
    phi = np.asarray(features, dtype=float)
    if phi.ndim != 2:
        raise DimensionError(f"features must be a matrix, got shape {phi.shape}")
    return symmetrize(phi @ phi.T)
