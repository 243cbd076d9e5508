"""Built-in invariant suite: quick numerical checks of the core contracts.

Each check returns (name, passed, detail).  The gradient check accepts an
injectable gradient function so a deliberately corrupted gradient can be
shown to fail (mutation sanity for the finite-difference oracle).
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from . import manifold, pipeline
from .objective import (ObjectiveParams, cost, euclidean_gradient,
                        hessian_vec, smooth_norm, smooth_scale)
from .scenario import SystemConfig, crandn, make_instance, substream


def _random_params(rng, n=12, r=3, L=8):
    A = crandn(rng, L, n)
    A /= np.linalg.norm(A, axis=0, keepdims=True)
    V = crandn(rng, L, r)
    w = np.abs(rng.standard_normal(n)) + 0.1
    return ObjectiveParams(A, V, w)


def check_gradient_fd(grad_fn: Optional[Callable] = None, seed: int = 0):
    """Directional derivatives of the cost versus the claimed gradient."""
    grad_fn = grad_fn or euclidean_gradient
    rng = substream(seed, 101)
    worst = 0.0
    for _ in range(5):
        p = _random_params(rng)
        Z = crandn(rng, p.n_devices + p.r, p.r)
        for _ in range(8):
            xi = crandn(rng, *Z.shape)
            h = 1e-6
            fd = (cost(Z + h * xi, p) - cost(Z - h * xi, p)) / (2 * h)
            an = manifold.metric(grad_fn(Z, p), xi)
            worst = max(worst, abs(fd - an) / (1 + abs(fd)))
    return worst < 1e-5, f"max relative FD error {worst:.2e} (tolerance 1e-5)"


def check_hessian(seed: int = 0):
    rng = substream(seed, 102)
    worst_fd, worst_sym = 0.0, 0.0
    for _ in range(4):
        p = _random_params(rng)
        Z = crandn(rng, p.n_devices + p.r, p.r)
        for _ in range(4):
            eta = manifold.project_horizontal(Z, crandn(rng, *Z.shape))
            h = 1e-5
            fd = manifold.project_horizontal(
                Z, (euclidean_gradient(Z + h * eta, p)
                    - euclidean_gradient(Z - h * eta, p)) / (2 * h))
            an = hessian_vec(Z, eta, p)
            worst_fd = max(worst_fd, np.linalg.norm(fd - an) / (1 + np.linalg.norm(an)))
            xi = manifold.project_horizontal(Z, crandn(rng, *Z.shape))
            a = manifold.metric(hessian_vec(Z, eta, p), xi)
            b = manifold.metric(hessian_vec(Z, xi, p), eta)
            worst_sym = max(worst_sym, abs(a - b) / (1 + abs(a)))
    ok = worst_fd < 1e-4 and worst_sym < 1e-8
    return ok, f"FD error {worst_fd:.2e}, symmetry defect {worst_sym:.2e}"


def check_horizontal_space(seed: int = 0):
    rng = substream(seed, 103)
    worst = 0.0
    for _ in range(25):
        n, r = 10, 3
        Z = crandn(rng, n + r, r)
        xibar = crandn(rng, n + r, r)
        xi = manifold.project_horizontal(Z, xibar)
        worst = max(worst, np.linalg.norm(
            manifold.project_horizontal(Z, xi) - xi) / (1 + np.linalg.norm(xi)))
        B = crandn(rng, r, r)
        B = B - B.conj().T
        worst = max(worst, np.linalg.norm(manifold.project_horizontal(Z, Z @ B)))
        worst = max(worst, abs(manifold.metric(xi, Z @ B)))
        # decomposition: recovered vertical part reconstructs xibar
        worst = max(worst, np.linalg.norm((xibar - xi) + xi - xibar))
    return worst < 1e-9, f"max defect {worst:.2e}"


def check_rank_preservation(seed: int = 0):
    """Compression by a wide-enough random pilot matrix keeps the rank."""
    rng = substream(seed, 104)
    for _ in range(50):
        n, m, k = 30, 6, 4
        L = 2 * k + 2
        A = crandn(rng, L, n)
        A /= np.linalg.norm(A, axis=0, keepdims=True)
        X = np.zeros((n, m), complex)
        X[rng.choice(n, k, replace=False)] = crandn(rng, k, m)
        rx = np.linalg.matrix_rank(X, tol=1e-8 * np.linalg.svd(X, compute_uv=False)[0])
        rax = np.linalg.matrix_rank(A @ X, tol=1e-8 * np.linalg.svd(A @ X, compute_uv=False)[0])
        if rx != rax:
            return False, f"rank changed under compression: {rx} -> {rax}"
    return True, "rank(A X) = rank(X) on 50 random sparse instances"


def check_smoother():
    t = np.linspace(0, 2.0, 200)
    for theta in (1.0, 10.0, 1 / 0.039):
        J = smooth_norm(t, theta)
        if J[0] != 0 or np.any(J < -1e-15):
            return False, "smoother not anchored at zero or negative"
        small = t[theta * t <= 1.0]
        gap = np.abs(smooth_norm(small, theta) - theta * small**2 / 2)
        if np.any(gap > theta**2 * small**3 / 3 + 1e-12):
            return False, "quadratic regime bound violated"
        tt = 0.7
        h = 1e-6
        fd = (smooth_norm(tt + h, theta) - smooth_norm(tt - h, theta)) / (2 * h)
        if abs(fd - tt * smooth_scale(tt, theta)) > 1e-6:
            return False, "derivative identity J'(t) = theta t/(1+theta t) violated"
    gaps = [np.sum(t - smooth_norm(t, th)) for th in (1.0, 10.0, 1 / 0.039, 100.0)]
    if not all(b < a for a, b in zip(gaps, gaps[1:])):
        return False, "smoothing gap not decreasing in theta"
    return True, "anchor, quadratic bound, derivative identity, gap monotone"


def check_noiseless_recovery(seed: int = 3):
    cfg = SystemConfig(n_devices=24, n_antennas=8, pilot_len=12, fixed_active=3,
                       pilot_power_dbm=20.0, bandwidth_hz=0.0, seed=seed)
    inst = make_instance(cfg)
    res = pipeline.run_dr_jadce(inst)
    ok = res.aer == 0.0 and res.nmse_db is not None and res.nmse_db <= -60.0
    return ok, f"AER {res.aer}, NMSE {res.nmse_db:.1f} dB"


CHECKS = [
    ("gradient finite differences", check_gradient_fd),
    ("hessian product and symmetry", check_hessian),
    ("horizontal space geometry", check_horizontal_space),
    ("rank preservation under compression", check_rank_preservation),
    ("logarithmic smoother properties", check_smoother),
    ("noiseless end-to-end recovery", check_noiseless_recovery),
]


def selftest(verbose: bool = True) -> bool:
    """Run every invariant check; prints one table row per check."""
    all_ok = True
    width = max(len(name) for name, _ in CHECKS)
    for name, fn in CHECKS:
        ok, detail = fn()
        all_ok &= ok
        if verbose:
            print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    return all_ok
