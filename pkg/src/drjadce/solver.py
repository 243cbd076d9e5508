"""Riemannian trust-region solver with a Steihaug-Toint truncated-CG inner loop.

The outer loop minimizes the smoothed objective over the quotient manifold:
each iteration builds the quadratic model

    m(eta) = f + g(grad, eta) + 0.5 * g(Hess[eta], eta),

approximately minimizes it inside the trust radius with truncated CG, and
accepts or rejects the linear retraction of the step based on the ratio of
actual to predicted decrease.  All tangent iterates stay horizontal because
the gradient and Hessian products are horizontal and the constraint is linear.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import manifold
from .manifold import RetractionError, metric, norm, project_horizontal
from .objective import ObjectiveParams, cost, euclidean_gradient, hessian_vec

TCG_GRAD_ZERO = "grad_zero"
TCG_NEG_CURVATURE = "negative_curvature"
TCG_BOUNDARY = "boundary"
TCG_CONVERGED = "residual_converged"
TCG_MAX_INNER = "max_inner"

_BOUNDARY_REASONS = (TCG_NEG_CURVATURE, TCG_BOUNDARY)


@dataclass
class TrustRegionConfig:
    """Knobs of the outer loop; ``None`` fields are derived at solve time.

    ``delta_bar`` defaults to sqrt(r), ``delta0`` to ``delta_bar / 8``,
    ``grad_tol`` to ``1e-6 * (1 + ||V||_F)`` and ``max_inner`` to the real
    dimension of the horizontal space.
    """

    delta_bar: Optional[float] = None
    delta0: Optional[float] = None
    rho_prime: float = 0.1
    grad_tol: Optional[float] = None
    max_outer: int = 500
    tcg_kappa: float = 0.1
    tcg_theta: float = 1.0
    max_inner: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.rho_prime < 0.25:
            raise ValueError("rho_prime must lie in [0, 0.25)")
        if self.delta_bar is not None and self.delta0 is not None:
            if not 0.0 < self.delta0 <= self.delta_bar:
                raise ValueError("need 0 < delta0 <= delta_bar")


@dataclass
class SolverTrace:
    """Per-iteration history of the outer loop.

    ``delta`` is the radius the step was computed with (before the update
    rule runs) and ``step_norm`` the metric norm of the returned step.
    """

    iters: list = field(default_factory=list)
    f: list = field(default_factory=list)
    grad_norm: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    inner_iters: list = field(default_factory=list)
    ms: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)

    def record(self, it, fval, gn, delta, rho, acc, inner, ms, step):
        self.iters.append(it)
        self.f.append(fval)
        self.grad_norm.append(gn)
        self.delta.append(delta)
        self.rho.append(rho)
        self.accepted.append(acc)
        self.inner_iters.append(inner)
        self.ms.append(ms)
        self.step_norm.append(step)

    def rows(self):
        """CSV-ready rows: (iter, f, gradnorm, delta, rho, accepted, inner_iters, ms)."""
        return list(zip(self.iters, self.f, self.grad_norm, self.delta,
                        self.rho, self.accepted, self.inner_iters, self.ms))


@dataclass
class RTRResult:
    Z: np.ndarray
    f: float
    grad_norm: float
    iterations: int
    converged: bool
    trace: SolverTrace


def _to_boundary(eta: np.ndarray, d: np.ndarray, delta: float) -> float:
    """Positive tau with ||eta + tau d|| = delta."""
    a = metric(d, d)
    b = 2.0 * metric(eta, d)
    c = metric(eta, eta) - delta * delta
    disc = max(b * b - 4.0 * a * c, 0.0)
    return (-b + np.sqrt(disc)) / (2.0 * a)


def tcg(
    Z: np.ndarray,
    grad: np.ndarray,
    delta: float,
    p: ObjectiveParams,
    cfg: TrustRegionConfig,
    hess: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None,
):
    """Truncated CG on the trust-region model at Z.

    Returns ``(eta, H_eta, stop_reason, inner_iterations)`` where ``H_eta``
    is the accumulated Hessian product needed for the model-decrease ratio.
    Stops on negative curvature or the trust boundary (returning the boundary
    point along the current direction) or when the residual passes the
    superlinear test ``||r_j|| <= ||r_0|| min(||r_0||^tcg_theta, tcg_kappa)``.
    """
    if hess is None:
        hess = lambda Zc, e: hessian_vec(Zc, e, p)
    eta = np.zeros_like(grad)
    H_eta = np.zeros_like(grad)
    resid = grad.copy()
    d = -resid
    r0 = norm(resid)
    if r0 == 0.0:
        return eta, H_eta, TCG_GRAD_ZERO, 0
    tol = r0 * min(r0 ** cfg.tcg_theta, cfg.tcg_kappa)
    max_inner = cfg.max_inner
    if max_inner is None:
        max_inner = manifold.horizontal_dim(p.n_devices, p.r)
    rr = r0 * r0
    for j in range(1, max_inner + 1):
        Hd = hess(Z, d)
        if not np.all(np.isfinite(Hd)):
            raise FloatingPointError("non-finite model values in truncated CG")
        curv = metric(d, Hd)
        if curv <= 0.0:
            tau = _to_boundary(eta, d, delta)
            return eta + tau * d, H_eta + tau * Hd, TCG_NEG_CURVATURE, j
        alpha = rr / curv
        eta_next = eta + alpha * d
        if norm(eta_next) >= delta:
            tau = _to_boundary(eta, d, delta)
            return eta + tau * d, H_eta + tau * Hd, TCG_BOUNDARY, j
        eta = eta_next
        H_eta = H_eta + alpha * Hd
        resid = resid + alpha * Hd
        rr_next = metric(resid, resid)
        if np.sqrt(rr_next) <= tol:
            return eta, H_eta, TCG_CONVERGED, j
        d = -resid + (rr_next / rr) * d
        rr = rr_next
    return eta, H_eta, TCG_MAX_INNER, max_inner


def default_init(p: ObjectiveParams, rng: Optional[np.random.Generator] = None,
                 random: bool = False) -> np.ndarray:
    """Starting factor: matched filter by default, Gaussian behind the flag.

    The top block is A^H V (a matched-filter image of the measurements), the
    bottom block the identity; the whole factor is rescaled to Frobenius norm
    sqrt(||V||_F) so that S0 = Z_top Z_bot^H starts at the scale of V.
    """
    n, r = p.n_devices, p.r
    if random:
        if rng is None:
            rng = np.random.default_rng()
        Z0 = (rng.standard_normal((n + r, r)) + 1j * rng.standard_normal((n + r, r))) / np.sqrt(2)
    else:
        Z0 = np.vstack([p.A.conj().T @ p.V, np.eye(r, dtype=complex)])
    nrm = np.linalg.norm(Z0)
    target = np.sqrt(max(np.linalg.norm(p.V), 1e-300))
    return Z0 * (target / nrm)


def rtr_solve(
    Z0: np.ndarray,
    p: ObjectiveParams,
    cfg: Optional[TrustRegionConfig] = None,
) -> RTRResult:
    """Trust-region outer loop from Z0; returns the best iterate and its trace.

    The step size of the retraction is fixed to 1: the trust radius already
    governs step length.  A retraction that drops rank, or a model decrease
    below 1e-15, counts as a rejected step and shrinks the radius.
    """
    cfg = cfg or TrustRegionConfig()
    manifold.check_full_rank(Z0)
    r = Z0.shape[1]
    delta_bar = cfg.delta_bar if cfg.delta_bar is not None else float(np.sqrt(r))
    delta = cfg.delta0 if cfg.delta0 is not None else 0.125 * delta_bar
    grad_tol = cfg.grad_tol
    if grad_tol is None:
        grad_tol = 1e-6 * (1.0 + np.linalg.norm(p.V))

    Z = Z0.copy()
    f = cost(Z, p)
    trace = SolverTrace()
    converged = False
    gn = np.inf
    it = 0
    for it in range(cfg.max_outer):
        t0 = time.perf_counter()
        grad = project_horizontal(Z, euclidean_gradient(Z, p))
        gn = norm(grad)
        if gn < grad_tol:
            converged = True
            break
        delta_used = delta
        eta, H_eta, stop, inner = tcg(Z, grad, delta_used, p, cfg)
        step = norm(eta)
        model_dec = -metric(grad, eta) - 0.5 * metric(H_eta, eta)
        rho = -np.inf
        accepted = False
        if model_dec >= 1e-15:
            try:
                Z_new = manifold.retract(Z, eta, 1.0)
            except RetractionError:
                Z_new = None
            if Z_new is not None:
                f_new = cost(Z_new, p)
                rho = (f - f_new) / model_dec
                hit_boundary = stop in _BOUNDARY_REASONS or step >= delta_used * (1 - 1e-10)
                if rho >= 0.75 and hit_boundary:
                    delta = min(2.0 * delta_used, delta_bar)
                if rho > cfg.rho_prime:
                    Z, f = Z_new, f_new
                    accepted = True
        if rho <= 0.25:
            delta = delta_used / 4.0
        trace.record(it, f, gn, delta_used, rho, accepted, inner,
                     1e3 * (time.perf_counter() - t0), step)
    else:
        it = cfg.max_outer
    return RTRResult(Z, f, gn, it, converged, trace)
