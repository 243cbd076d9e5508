"""Quotient geometry of full-column-rank factors up to unitary rotation.

Points are ``(N + r) x r`` complex matrices Z of full column rank, identified
with Z Q for unitary Q because only ``Z Z^H`` matters to the objective.  The
real inner product ``Re Tr(xi^H eta)`` makes the vertical space at Z equal to
``{Z B : B skew-Hermitian}``; its orthogonal complement, the horizontal space
``{xi : xi^H Z = Z^H xi}``, carries unique representatives of quotient
tangent vectors.  Tangent vectors are plain arrays of the same shape as Z.
"""

from __future__ import annotations

import numpy as np

from .linalg import RankDeficiencyError, solve_sylvester_skew


class RetractionError(RuntimeError):
    """The retracted point lost full column rank; the caller should shrink its step."""


def metric(xi: np.ndarray, eta: np.ndarray) -> float:
    """Canonical real inner product Re Tr(xi^H eta)."""
    return float(np.real(np.vdot(xi, eta)))


def norm(xi: np.ndarray) -> float:
    return float(np.sqrt(max(metric(xi, xi), 0.0)))


def check_full_rank(Z: np.ndarray, rtol: float = 1e-10) -> None:
    sv = np.linalg.svd(Z, compute_uv=False)
    if sv[-1] <= rtol * sv[0]:
        raise RankDeficiencyError(
            f"factor is rank deficient: sigma_min/sigma_max = {sv[-1] / sv[0]:.3e}"
        )


def horizontal_dim(n_devices: int, r: int) -> int:
    """Real dimension of the horizontal space: 2(N+r)r minus the r^2 vertical dims."""
    return 2 * (n_devices + r) * r - r * r


def project_horizontal(Z: np.ndarray, xibar: np.ndarray) -> np.ndarray:
    """Orthogonal projection of an ambient direction onto the horizontal space.

    The vertical component is ``Z B`` with B solving the Lyapunov-type system
    ``(Z^H Z) B + B (Z^H Z) = Z^H xibar - xibar^H Z``; subtracting it leaves
    ``xi^H Z = Z^H xi`` exactly.
    """
    G = Z.conj().T @ Z
    R = Z.conj().T @ xibar - xibar.conj().T @ Z
    B = solve_sylvester_skew(G, R)
    return xibar - Z @ B


def is_horizontal(Z: np.ndarray, xi: np.ndarray, tol: float = 1e-8) -> bool:
    dev = np.linalg.norm(xi.conj().T @ Z - Z.conj().T @ xi)
    return dev <= tol * (1.0 + np.linalg.norm(xi) * np.linalg.norm(Z))


def retract(Z: np.ndarray, eta: np.ndarray, alpha: float = 1.0) -> np.ndarray:
    """Linear retraction ``Z + alpha * eta`` with a full-rank safeguard.

    Raises
    ------
    RetractionError
        If the result is numerically rank deficient (singular value ratio
        below 1e-10); trust-region callers treat this as a rejected step.
    """
    Znew = Z + alpha * eta
    sv = np.linalg.svd(Znew, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise RetractionError("retraction left the full-rank manifold")
    return Znew
