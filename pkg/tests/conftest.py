import numpy as np
import pytest

from drjadce import ObjectiveParams, crandn


def unit_pilots(rng, L, N):
    A = crandn(rng, L, N)
    return A / np.linalg.norm(A, axis=0, keepdims=True)


def random_objective(rng, n=12, r=3, L=8):
    """Small random problem data for gradient and geometry tests."""
    A = unit_pilots(rng, L, n)
    V = crandn(rng, L, r)
    w = np.abs(rng.standard_normal(n)) + 0.1
    return ObjectiveParams(A, V, w)


def sparse_instance_arrays(rng, N, M, L, K, row_scale=1.0, noise_std=0.0):
    """Raw (A, X, Y, active) tuple without the scenario machinery."""
    A = unit_pilots(rng, L, N)
    act = np.sort(rng.choice(N, K, replace=False))
    X = np.zeros((N, M), dtype=complex)
    X[act] = row_scale * crandn(rng, K, M)
    Y = A @ X
    if noise_std > 0:
        Y = Y + noise_std * crandn(rng, L, M)
    return A, X, Y, act


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
