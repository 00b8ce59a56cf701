"""The MAP quadratic program of the linear-Gaussian model.

In displacement coordinates x = f - m with data shift d = y - H m, the
negative log-posterior is (up to an additive constant)

    J(x) = 1/2 x^T Q x + q^T x + c,    x in Range(K),

with Q = K^+ + H^T R^(-1) H, q = -H^T R^(-1) d, c = 1/2 d^T R^(-1) d.
Off the range the objective is infinite; evaluation there is rejected.

The solver never touches K^+. Substituting x = A w through the canonical
square root turns the prior penalty into |w|^2 exactly, and the normal
equations become the SPD system (A^T H^T R^(-1) H A + I) w = A^T H^T R^(-1) d,
solved by Cholesky. Q, q, c are still materialized for audits and for the
objective/gradient/Hessian oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DegenerateModelError, DimensionError, InfeasiblePointError
from .gaussian import GaussianLaw, ObservationModel, _check_compatible, _check_data
from .psd import PsdFactor, symmetrize

FEASIBILITY_TOL = 1e-8


@dataclass(frozen=True)
class QuadraticObjective:
    """Convex quadratic whose minimizer is the posterior mean shift."""

    Q: np.ndarray
    q: np.ndarray
    c: float
    range_basis: np.ndarray
    prior_mean: np.ndarray
    data_shift: np.ndarray
    cov_factor: PsdFactor
    reduced_gram: np.ndarray  # A^T H^T R^(-1) H A, assembled without K^+

    @property
    def dim(self) -> int:
        return self.prior_mean.shape[0]

    @property
    def rank(self) -> int:
        return self.cov_factor.rank


def build_qp(prior: GaussianLaw, obs: ObservationModel, y) -> QuadraticObjective:
    """Assemble (Q, q, c) plus the reduced solver payload."""
    _check_compatible(prior, obs)
    y = _check_data(obs, y)
    d = y - obs.H @ prior.mean
    if obs.n_obs > 0:
        rinv_d = obs.noise_solve(d)
        q = -(obs.H.T @ rinv_d)
        c = 0.5 * float(d @ rinv_d)
    else:
        q = np.zeros(prior.dim)
        c = 0.0
    quad = symmetrize(prior.cov_factor.pinv() + obs.information())
    a = prior.cov_factor.factor
    if obs.n_obs > 0 and prior.rank > 0:
        ha = obs.H @ a
        reduced_gram = symmetrize(ha.T @ obs.noise_solve(ha))
    else:
        reduced_gram = np.zeros((prior.rank, prior.rank))
    return QuadraticObjective(Q=quad, q=q, c=c,
                              range_basis=prior.cov_factor.basis(),
                              prior_mean=prior.mean.copy(), data_shift=d,
                              cov_factor=prior.cov_factor,
                              reduced_gram=reduced_gram)


def solve_qp(obj: QuadraticObjective):
    """Minimize on Range(K); returns (x_star, posterior_mean).

    The zero-data-shift case is returned exactly, without a solve.
    """
    if obj.rank == 0 or not np.any(obj.data_shift):
        x_star = np.zeros(obj.dim)
        return x_star, obj.prior_mean + x_star
    lhs = obj.reduced_gram + np.eye(obj.rank)
    rhs = -(obj.cov_factor.factor.T @ obj.q)
    try:
        chol = cho_factor(lhs, lower=True)
    except np.linalg.LinAlgError:
        raise DegenerateModelError(
            "reduced normal equations are singular; rank tolerance is inconsistent"
        ) from None
    w = cho_solve(chol, rhs)
    x_star = obj.cov_factor.factor @ w
    return x_star, obj.prior_mean + x_star


def _feasible_point(obj: QuadraticObjective, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (obj.dim,):
        raise DimensionError(f"point must have shape ({obj.dim},), got {x.shape}")
    u = obj.range_basis
    residual = float(np.linalg.norm(x - u @ (u.T @ x)))
    if residual > FEASIBILITY_TOL * (1.0 + float(np.linalg.norm(x))):
        raise InfeasiblePointError(
            f"point lies off Range(K): projection residual {residual:.3e}; "
            "the objective is infinite there"
        )
    return x


def objective(obj: QuadraticObjective, x) -> float:
    """J(x) = 1/2 x^T Q x + q^T x + c for feasible x."""
    x = _feasible_point(obj, x)
    return 0.5 * float(x @ obj.Q @ x) + float(obj.q @ x) + obj.c


def gradient(obj: QuadraticObjective, x) -> np.ndarray:
    """Gradient Q x + q; vanishes at the minimizer."""
    x = _feasible_point(obj, x)
    return obj.Q @ x + obj.q


def hessian(obj: QuadraticObjective) -> np.ndarray:
    """Constant Hessian Q (independent of the evaluation point)."""
    return obj.Q.copy()
