from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cn(rng, shape, var=1.0):
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def orthogonal_sources(K, N, products, seed=0):
    """Noiseless sum of orthogonal rank-one sources with the given singular values."""
    g = np.random.default_rng(seed)
    U, _ = np.linalg.qr(cn(g, (K, K)))
    V, _ = np.linalg.qr(cn(g, (N, N)))
    Y = np.zeros((K, N), complex)
    for i, p in enumerate(products):
        Y += p * np.outer(U[:, i], V[:, i].conj())
    return Y
