"""Projection of the received signal onto its r-dimensional signal subspace.

A truncated SVD ``Y ~ V U`` with ``U U^H = I`` turns the L x M measurement
into an L x r one; solutions of the reduced problem lift back through ``U``
without changing row supports or row norms.  Per-device weights come from how
strongly each pilot column correlates with the noise subspace: columns of
active devices are nearly orthogonal to it, so they receive small penalties.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import thin_svd
from .rank_estimation import RankSelection


@dataclass
class ReducedModel:
    V: np.ndarray           # L x r signal-space measurements
    U: np.ndarray           # r x M lift-back basis, U U^H = I
    weights: np.ndarray     # length N, noise-subspace row norms of A^H D_noise
    D_noise: np.ndarray     # L x (L - r) noise-subspace eigenvectors
    r: int


def reduce_measurements(Y: np.ndarray, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-r factorization ``(V, U)`` of Y with row-orthonormal U."""
    L, M = Y.shape
    if not 1 <= r <= min(L, M):
        raise ValueError(f"rank must lie in [1, {min(L, M)}], got {r}")
    svd = thin_svd(Y)
    positive = int(np.sum(svd.singulars > svd.singulars[0] * 1e-12)) if svd.singulars.size else 0
    if r > positive:
        warnings.warn(
            f"requested rank {r} exceeds the {positive} nonzero singular values; "
            "trailing columns of V are zero",
            RuntimeWarning,
        )
    V = svd.left[:, :r] * svd.singulars[:r]
    U = svd.right_h[:r, :]
    return V, U


def compute_weights(A: np.ndarray, D_noise: np.ndarray) -> np.ndarray:
    """Row norms of ``A^H D_noise``; zero when the noise subspace is empty."""
    return np.linalg.norm(A.conj().T @ D_noise, axis=1)


def lift_back(S: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Map a reduced solution back to the full antenna dimension."""
    return S @ U


def build_reduced_model(A: np.ndarray, Y: np.ndarray, selection: RankSelection,
                        r: int | None = None) -> ReducedModel:
    """Reduce Y using the covariance eigenvectors from the rank-estimation step.

    ``r`` overrides the estimated rank; the noise subspace is re-partitioned
    accordingly from the same eigen-system.
    """
    r_used = selection.r_hat if r is None else int(r)
    r_used = max(1, min(r_used, min(Y.shape)))
    V, U = reduce_measurements(Y, r_used)
    D_noise = selection.eigenvectors[:, r_used:]
    return ReducedModel(V, U, compute_weights(A, D_noise), D_noise, r_used)
