"""Kernel Gram matrices on point sets, eigenmode truncation, and sampling.

These are the prior generators: build K from a kernel family on a finite
point set, keep the leading eigenmodes, and draw Gaussian vectors through
the truncated expansion f = mean + sum_i sqrt(lambda_i) z_i psi_i with
z_i iid standard normal from a seeded deterministic stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import psd
from .errors import DimensionError
from .psd import symmetrize
from .rng import NormalStream


class KernelFamily(str, enum.Enum):
    SQUARED_EXPONENTIAL = "squared-exponential"
    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    WHITE = "white"


# lengthscale enters only for these
_STATIONARY = (KernelFamily.SQUARED_EXPONENTIAL, KernelFamily.EXPONENTIAL)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family with variance sigma^2 and (where it applies) lengthscale."""

    family: KernelFamily
    variance: float
    lengthscale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")
        if self.family in _STATIONARY and not self.lengthscale > 0:
            raise ValueError(f"lengthscale must be positive, got {self.lengthscale}")


def _points_2d(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise DimensionError(f"points must be a nonempty (n, d) array, got shape {x.shape}")
    return x


def gram_matrix(spec: KernelSpec, points) -> np.ndarray:
    """K_ij = k(x_i, x_j) on the given point set.

    Any principal submatrix equals the Gram matrix of the corresponding
    point subset exactly, because each entry depends only on its own pair.
    """
    x = _points_2d(points)
    n = x.shape[0]
    if spec.family is KernelFamily.WHITE:
        return spec.variance * np.eye(n)
    if spec.family is KernelFamily.LINEAR:
        return symmetrize(spec.variance * (x @ x.T))
    sq = np.sum(x * x, axis=1)
    dist_sq = np.clip(sq[:, None] + sq[None, :] - 2.0 * (x @ x.T), 0.0, None)
    if spec.family is KernelFamily.SQUARED_EXPONENTIAL:
        k = spec.variance * np.exp(-dist_sq / (2.0 * spec.lengthscale**2))
    else:  # exponential / Matern-1/2
        k = spec.variance * np.exp(-np.sqrt(dist_sq) / spec.lengthscale)
    return symmetrize(k)


@dataclass(frozen=True)
class KlModes:
    """Truncated eigenmodes of a covariance: orthonormal modes, descending
    positive eigenvalues, the mean vector, and the relative Frobenius
    reconstruction residual left by the truncation."""

    eigenvalues: np.ndarray
    modes: np.ndarray
    mean: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.modes.shape[0]

    @property
    def n_modes(self) -> int:
        return self.modes.shape[1]


def kl_truncate(cov, r, mean=None, rank_tol: float | None = None) -> KlModes:
    """Keep the top eigenmodes of a PSD matrix.

    ``r`` is either an integer mode count in [1, rank] or a float energy
    fraction in (0, 1], in which case the smallest count reaching that
    fraction of the trace is kept. The reported residual
    |K - Psi Lambda Psi^T|_F / |K|_F is computed on the actual
    reconstruction and is nonincreasing in the kept count.
    """
    k = symmetrize(cov)
    values, vectors, rank = psd.eig_psd(k, rank_tol)
    if mean is None:
        mean = np.zeros(k.shape[0])
    else:
        mean = np.asarray(mean, dtype=float)
        if mean.shape != (k.shape[0],):
            raise DimensionError(
                f"mean must have shape ({k.shape[0]},), got {mean.shape}"
            )
    if isinstance(r, (bool, np.bool_)):
        raise ValueError("r must be an integer count or a float energy fraction")
    if isinstance(r, (int, np.integer)):
        count = int(r)
        if rank == 0 or not 1 <= count <= rank:
            raise ValueError(f"mode count {count} outside [1, rank={rank}]")
    else:
        fraction = float(r)
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"energy fraction {fraction} outside (0, 1]")
        if rank == 0:
            count = 0
        else:
            ratios = np.cumsum(values) / np.sum(values)
            # tiny slack so fraction=1.0 is reached despite rounding
            count = int(np.argmax(ratios >= fraction - 1e-12)) + 1
    kept_values = values[:count].copy()
    kept_modes = vectors[:, :count].copy()
    norm_k = float(np.linalg.norm(k))
    if norm_k == 0.0:
        residual = 0.0
    else:
        recon = (kept_modes * kept_values) @ kept_modes.T
        residual = float(np.linalg.norm(k - recon)) / norm_k
    return KlModes(eigenvalues=kept_values, modes=kept_modes, mean=mean,
                   residual=residual)


def sample_kl(modes: KlModes, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` vectors mean + Psi sqrt(Lambda) z, one per column.

    Identical seeds give bitwise-identical output.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    z = NormalStream(seed).normals((modes.n_modes, count))
    scaled = modes.modes * np.sqrt(modes.eigenvalues)
    return modes.mean[:, None] + scaled @ z
