import numpy as np
import pytest


def random_orthogonal(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))[None, :]


def random_spd(rng, dim, eig_lo=0.1, eig_hi=10.0):
    """Well-conditioned random SPD matrix with log-uniform spectrum."""
    q = random_orthogonal(rng, dim)
    eigs = np.exp(rng.uniform(np.log(eig_lo), np.log(eig_hi), size=dim))
    return (q * eigs) @ q.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
