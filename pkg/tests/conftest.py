import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_psd(rng, n, rank=None, scale=1.0):
    """Dense PSD matrix with a prescribed rank (defaults to full)."""
    if rank is None:
        rank = n
    b = rng.normal(size=(n, rank)) * scale
    return (b @ b.T + b @ b.T) / 2.0


def random_orthogonal(rng, n):
    """Haar-ish orthogonal matrix from QR with positive diagonal."""
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))
