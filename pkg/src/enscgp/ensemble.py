"""Ensemble statistics and ensemble-prior conditioning.

An ensemble of E members in R^n defines an empirical mean and the scaled
anomaly matrix A = [f_e - mean] / sqrt(E - 1), so that K = A A^T is the
divisor-(E-1) empirical covariance with rank at most E - 1. Conditioning
with these empirical moments as the Gaussian prior gives the exact
posterior law on the ensemble span; the stochastic perturbed-observation
update is a Monte Carlo realization whose sample mean matches that
posterior mean up to O(1/sqrt(E)) noise.

Localization and inflation are deliberately absent: callers who want a
modified prior covariance pass ``cov_transform``, which edits the dense K
before conditioning.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import gaussian, psd
from .errors import DimensionError
from .gaussian import GaussianLaw, ObservationModel
from .psd import PsdFactor
from .rng import blocked_normals


@dataclass(frozen=True)
class Ensemble:
    """Member-per-column matrix, at least two members, all entries finite."""

    members: np.ndarray

    def __post_init__(self):
        members = np.asarray(self.members, dtype=float)
        if members.ndim != 2:
            raise DimensionError(f"members must be an (n, E) matrix, got shape {members.shape}")
        if members.shape[1] < 2:
            raise ValueError(f"need at least 2 members, got {members.shape[1]}")
        if not np.all(np.isfinite(members)):
            raise ValueError("ensemble contains non-finite entries")
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members.shape[0]

    @property
    def size(self) -> int:
        return self.members.shape[1]


@dataclass(frozen=True)
class EnsembleStats:
    """Empirical mean, scaled anomaly matrix, and its canonical factor."""

    mean: np.ndarray
    anomaly: np.ndarray
    covariance_factor: PsdFactor


def ensemble_stats(ens: Ensemble, rank_tol: float | None = None) -> EnsembleStats:
    """Empirical moments with the divisor-(E-1) convention."""
    mean = ens.members.mean(axis=1)
    anomaly = (ens.members - mean[:, None]) / np.sqrt(ens.size - 1)
    return EnsembleStats(mean=mean, anomaly=anomaly,
                         covariance_factor=psd.canonicalize_factor(anomaly, rank_tol))


def _prior_law(stats: EnsembleStats, rank_tol: float | None,
               cov_transform: Callable[[np.ndarray], np.ndarray] | None) -> GaussianLaw:
    if cov_transform is None:
        return GaussianLaw(stats.mean, stats.covariance_factor)
    return GaussianLaw.from_moments(stats.mean, cov_transform(stats.covariance_factor.gram()),
                                    rank_tol)


def ens_cgp(ens: Ensemble, obs: ObservationModel, y, rank_tol: float | None = None,
            cov_transform: Callable[[np.ndarray], np.ndarray] | None = None) -> GaussianLaw:
    """Condition the ensemble-defined prior N(mean, A A^T) on the data.

    The posterior mean shift is confined to the anomaly span. A zero-spread
    ensemble has zero gain, so the posterior collapses to the prior point
    mass at the empirical mean.
    """
    stats = ensemble_stats(ens, rank_tol)
    prior = _prior_law(stats, rank_tol, cov_transform)
    return gaussian.condition(prior, obs, y, rank_tol)


def enkf_mean_update(stats: EnsembleStats, obs: ObservationModel, y,
                     cov_transform: Callable[[np.ndarray], np.ndarray] | None = None,
                     rank_tol: float | None = None) -> np.ndarray:
    """Gain-form mean update mean + G (y - H mean) with the empirical K."""
    prior = _prior_law(stats, rank_tol, cov_transform)
    y = gaussian._check_data(obs, y)
    gain = gaussian.kalman_gain(prior, obs)
    return prior.mean + gain @ (y - obs.H @ prior.mean)


def enkf_perturbed_obs(ens: Ensemble, obs: ObservationModel, y, seed: int,
                       perturb: bool = True, center_perturbations: bool = False,
                       rank_tol: float | None = None,
                       cov_transform: Callable[[np.ndarray], np.ndarray] | None = None,
                       ) -> Ensemble:
    """Stochastic analysis update f_e <- f_e + G (y + eta_e - H f_e).

    The gain comes from the prior ensemble's empirical covariance and is
    shared by all members. Perturbations eta_e ~ N(0, R) are drawn from
    per-member counter substreams (substream index = member index): member
    e's draw depends only on (seed, e), so results are reproducible and
    member updates could run in parallel. ``perturb=False`` sets eta = 0,
    the deterministic limit of the scheme; ``center_perturbations``
    subtracts the perturbation sample mean.
    """
    stats = ensemble_stats(ens, rank_tol)
    prior = _prior_law(stats, rank_tol, cov_transform)
    y = gaussian._check_data(obs, y)
    gain = gaussian.kalman_gain(prior, obs)
    m = obs.n_obs
    if perturb and m > 0:
        chol = np.linalg.cholesky(obs.R)
        eta = chol @ blocked_normals(seed, m, ens.size)
        if center_perturbations:
            eta = eta - eta.mean(axis=1, keepdims=True)
    else:
        eta = np.zeros((m, ens.size))
    innovations = y[:, None] + eta - obs.H @ ens.members
    return Ensemble(ens.members + gain @ innovations)
