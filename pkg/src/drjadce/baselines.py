"""Comparison recovery algorithms: group-sparse least squares, greedy pursuit,
and the support-aware linear MMSE reference."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


@dataclass
class BaselineConfig:
    zeta: float = 8.0
    max_iters: int = 5000
    tol: float = 1e-12
    prox_tol: float = 1e-6          # fixed-point residual target, relative
    somp_sparsity: Optional[int] = None

    def __post_init__(self):
        if self.zeta <= 0 or self.max_iters < 1 or self.tol <= 0:
            raise ValueError("baseline parameters must be positive")


@dataclass
class L21Result:
    X: np.ndarray
    objective: float
    iterations: int
    converged: bool
    prox_residual: float
    objectives: list = None         # accepted objective value per iteration


def _row_shrink(G: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Proximal map of the weighted row-norm sum: shrink each row toward zero."""
    rn = np.linalg.norm(G, axis=1)
    factor = np.maximum(0.0, 1.0 - thresholds / np.maximum(rn, 1e-300))
    return factor[:, None] * G


def l21_solve(
    A: np.ndarray,
    Y: np.ndarray,
    zeta: float,
    cfg: Optional[BaselineConfig] = None,
    weights: Optional[np.ndarray] = None,
) -> L21Result:
    """Accelerated proximal gradient for
    ``min sum_n w_n ||X[n]|| + (zeta/2) ||A X - Y||_F^2``.

    Monotone variant: whenever the accelerated step would increase the
    objective the momentum is restarted from the last accepted point, so the
    recorded objective never increases.  Iterations stop once the fixed-point
    residual ``||X - prox(X - step * grad)||_F`` falls below
    ``1e-6 * (1 + ||X||_F)`` (or the relative objective change drops below
    ``cfg.tol``); hitting ``max_iters`` first flags the result.
    """
    cfg = cfg or BaselineConfig()
    N = A.shape[1]
    w = np.ones(N) if weights is None else np.asarray(weights, dtype=float)
    step = 1.0 / (zeta * np.linalg.norm(A, 2) ** 2)
    thr = step * w

    def grad(X):
        return zeta * (A.conj().T @ (A @ X - Y))

    def objective(X):
        return float(np.sum(w * np.linalg.norm(X, axis=1))
                     + 0.5 * zeta * np.linalg.norm(A @ X - Y) ** 2)

    X = np.zeros((N, Y.shape[1]), dtype=complex)
    Xm = X.copy()          # momentum point
    f = objective(X)
    history = [f]
    t_k = 1.0
    converged = False
    prox_res = np.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        X_new = _row_shrink(Xm - step * grad(Xm), thr)
        f_new = objective(X_new)
        if f_new > f:
            # restart momentum from the last accepted iterate
            Xm, t_k = X.copy(), 1.0
            X_new = _row_shrink(Xm - step * grad(Xm), thr)
            f_new = objective(X_new)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        Xm = X_new + ((t_k - 1.0) / t_next) * (X_new - X)
        rel_change = abs(f - f_new) / (1.0 + abs(f))
        X, f, t_k = X_new, f_new, t_next
        history.append(f)
        prox_res = np.linalg.norm(X - _row_shrink(X - step * grad(X), thr))
        if prox_res <= cfg.prox_tol * (1.0 + np.linalg.norm(X)) or rel_change < cfg.tol:
            converged = True
            break
    return L21Result(X, f, it, converged, float(prox_res), history)


def somp(A: np.ndarray, Y: np.ndarray, k: int) -> tuple[list[int], np.ndarray]:
    """Simultaneous orthogonal matching pursuit with k greedy selections.

    Each round picks the column with the largest residual correlation row
    norm (ties resolve to the lowest index through argmax), refits by least
    squares on the selected support, and updates the residual.
    """
    L, N = A.shape
    if k > L:
        raise ValueError("sparsity target cannot exceed the pilot length")
    support: list[int] = []
    X_s = np.zeros((0, Y.shape[1]), dtype=complex)
    R = Y.copy()
    for _ in range(k):
        corr = np.linalg.norm(A.conj().T @ R, axis=1)
        corr[support] = -1.0
        support.append(int(np.argmax(corr)))
        A_s = A[:, support]
        X_s, *_ = np.linalg.lstsq(A_s, Y, rcond=None)
        R = Y - A_s @ X_s
    X = np.zeros((N, Y.shape[1]), dtype=complex)
    if support:
        X[support] = X_s
    return support, X


def oracle_mmse(
    A: np.ndarray,
    Y: np.ndarray,
    support: Sequence[int],
    sigma2: float,
    gamma,
) -> np.ndarray:
    """Regularized least squares on the known support, zero elsewhere.

    ``gamma`` is the per-device prior signal variance (scalar or one value
    per device in ``support``).  At ``sigma2 = 0`` with a rank-deficient
    selected pilot block the solve falls back to the pseudo-inverse.
    """
    N = A.shape[1]
    X = np.zeros((N, Y.shape[1]), dtype=complex)
    idx = np.asarray(list(support), dtype=int)
    if idx.size == 0:
        return X
    A_s = A[:, idx]
    g = np.broadcast_to(np.asarray(gamma, dtype=float), (N,))[idx] if np.ndim(gamma) else \
        np.full(idx.size, float(gamma))
    G = A_s.conj().T @ A_s + np.diag(sigma2 / g)
    rhs = A_s.conj().T @ Y
    try:
        X[idx] = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        X[idx] = np.linalg.pinv(G) @ rhs
    return X
