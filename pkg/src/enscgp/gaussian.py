"""Gaussian laws on a fixed discretization and exact conditioning.

A law carries its covariance in factored form K = A A^T, so singular
(low-rank, ensemble-derived) priors are first-class citizens. Conditioning
on linear observations y = H f + noise follows the Schur-complement update

    mean_post = m + K H^T (H K H^T + R)^(-1) (y - H m)
    cov_post  = K - K H^T (H K H^T + R)^(-1) H K

realized with a Cholesky factorization of the innovation covariance
H K H^T + R, which is SPD whenever R is, even for singular K. The posterior
covariance is also available through the inverse of the quadratic-form
Hessian restricted to Range(K); the two must agree, and tests enforce it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from . import psd
from .errors import DegenerateModelError, DimensionError, NotSpdError
from .psd import PsdFactor, symmetrize


@dataclass(frozen=True)
class GaussianLaw:
    """Gaussian law N(mean, K) with K carried as a canonical square root."""

    mean: np.ndarray
    cov_factor: PsdFactor

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        if mean.ndim != 1:
            raise DimensionError(f"mean must be a vector, got shape {mean.shape}")
        if mean.shape[0] != self.cov_factor.dim:
            raise DimensionError(
                f"mean length {mean.shape[0]} != covariance dim {self.cov_factor.dim}"
            )
        object.__setattr__(self, "mean", mean)

    @property
    def dim(self) -> int:
        return self.cov_factor.dim

    @property
    def rank(self) -> int:
        return self.cov_factor.rank

    @property
    def covariance(self) -> np.ndarray:
        return self.cov_factor.gram()

    @classmethod
    def from_moments(cls, mean, cov, rank_tol: float | None = None) -> "GaussianLaw":
        """Build from a dense covariance; symmetrizes and factors on ingestion."""
        return cls(np.asarray(mean, dtype=float),
                   psd.canonical_sqrt(symmetrize(cov), rank_tol))


@dataclass(frozen=True)
class ObservationModel:
    """Linear observation model y = H f + e with e ~ N(0, R), R SPD.

    R is symmetrized on construction and must admit a Cholesky
    factorization. An empty model (zero observations) is allowed and acts
    as "no data" throughout.
    """

    H: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.H, dtype=float)
        if h.ndim != 2:
            raise DimensionError(f"H must be a matrix, got shape {h.shape}")
        r = symmetrize(self.R)
        if r.shape[0] != h.shape[0]:
            raise DimensionError(
                f"R is {r.shape[0]}x{r.shape[0]} but H has {h.shape[0]} rows"
            )
        if r.shape[0] > 0:
            try:
                np.linalg.cholesky(r)
            except np.linalg.LinAlgError:
                raise NotSpdError("noise covariance R is not positive definite") from None
        object.__setattr__(self, "H", h)
        object.__setattr__(self, "R", r)

    @property
    def n_obs(self) -> int:
        return self.H.shape[0]

    @property
    def state_dim(self) -> int:
        return self.H.shape[1]

    def noise_solve(self, b: np.ndarray) -> np.ndarray:
        """R^(-1) b via Cholesky."""
        if self.n_obs == 0:
            return np.zeros_like(np.asarray(b, dtype=float))
        return cho_solve(cho_factor(self.R, lower=True), np.asarray(b, dtype=float))

    def information(self) -> np.ndarray:
        """Observation information matrix H^T R^(-1) H."""
        if self.n_obs == 0:
            return np.zeros((self.state_dim, self.state_dim))
        return symmetrize(self.H.T @ self.noise_solve(self.H))


@dataclass(frozen=True)
class JointGaussian:
    """Joint law of (f, y) under a linear observation model."""

    mean_f: np.ndarray
    mean_y: np.ndarray
    cov_ff: np.ndarray
    cov_fy: np.ndarray
    cov_yy: np.ndarray


def _check_compatible(prior: GaussianLaw, obs: ObservationModel) -> None:
    if obs.state_dim != prior.dim:
        raise DimensionError(
            f"observation model expects state dim {obs.state_dim}, prior has {prior.dim}"
        )


def _check_data(obs: ObservationModel, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (obs.n_obs,):
        raise DimensionError(f"data must have shape ({obs.n_obs},), got {y.shape}")
    return y


def build_joint(prior: GaussianLaw, obs: ObservationModel) -> JointGaussian:
    """Joint Gaussian of state and observations: Cov(y,y) = H K H^T + R."""
    _check_compatible(prior, obs)
    k = prior.covariance
    cov_fy = k @ obs.H.T
    cov_yy = symmetrize(obs.H @ cov_fy) + obs.R
    return JointGaussian(mean_f=prior.mean.copy(), mean_y=obs.H @ prior.mean,
                         cov_ff=k, cov_fy=cov_fy, cov_yy=cov_yy)


def kalman_gain(prior: GaussianLaw, obs: ObservationModel) -> np.ndarray:
    """Gain G = K H^T (H K H^T + R)^(-1), solved by Cholesky.

    K H^T is assembled through the covariance factor, so every column of G
    lies in Range(K) by construction.
    """
    _check_compatible(prior, obs)
    n, m = prior.dim, obs.n_obs
    if m == 0 or prior.rank == 0:
        return np.zeros((n, m))
    a = prior.cov_factor.factor
    kht = a @ (a.T @ obs.H.T)
    innovation_cov = symmetrize(obs.H @ kht) + obs.R
    try:
        chol = cho_factor(innovation_cov, lower=True)
    except np.linalg.LinAlgError:
        raise NotSpdError("innovation covariance H K H^T + R is not SPD") from None
    return cho_solve(chol, kht.T).T


def condition(prior: GaussianLaw, obs: ObservationModel, y,
              rank_tol: float | None = None) -> GaussianLaw:
    """Exact Gaussian conditioning on y = H f + e.

    The posterior covariance K - G H K is re-symmetrized and re-factored so
    the factored representation stays closed under conditioning; the
    posterior rank never exceeds the prior rank. With zero observations the
    prior is returned unchanged.
    """
    _check_compatible(prior, obs)
    y = _check_data(obs, y)
    if obs.n_obs == 0:
        return prior
    gain = kalman_gain(prior, obs)
    mean = prior.mean + gain @ (y - obs.H @ prior.mean)
    k = prior.covariance
    cov = symmetrize(k - gain @ (obs.H @ k))
    # round-off in the update lives at the prior's scale, so the
    # re-factoring threshold is floored there
    scale = float(prior.cov_factor.eigenvalues[0]) if prior.rank else 0.0
    return GaussianLaw(mean, psd.canonical_sqrt(cov, rank_tol, scale_floor=scale))


def posterior_cov_via_hessian(prior: GaussianLaw, obs: ObservationModel) -> np.ndarray:
    """Posterior covariance as the inverse Hessian on Range(K).

    Builds Q = K^+ + H^T R^(-1) H, restricts it to the canonical range
    basis U_r, inverts the restriction, and re-embeds: U_r (U_r^T Q U_r)^(-1) U_r^T.
    Must equal the Schur-complement covariance of :func:`condition`.
    """
    _check_compatible(prior, obs)
    if prior.rank == 0:
        return np.zeros((prior.dim, prior.dim))
    q = symmetrize(prior.cov_factor.pinv() + obs.information())
    u = prior.cov_factor.basis()
    reduced = symmetrize(u.T @ q @ u)
    try:
        chol = cho_factor(reduced, lower=True)
    except np.linalg.LinAlgError:
        raise DegenerateModelError(
            "restricted Hessian is numerically singular; rank tolerance is inconsistent"
        ) from None
    inv_reduced = cho_solve(chol, np.eye(prior.rank))
    return symmetrize(u @ inv_reduced @ u.T)


def marginal(law: GaussianLaw, indices, rank_tol: float | None = None) -> GaussianLaw:
    """Marginal law on a coordinate subset (subvector and principal submatrix)."""
    idx = np.asarray(indices, dtype=int)
    k = law.covariance[np.ix_(idx, idx)]
    return GaussianLaw(law.mean[idx], psd.canonical_sqrt(k, rank_tol))
