"""Dense complex linear-algebra kernels shared by the rest of the package.

Matrices are plain ``numpy`` arrays of ``complex128``; the thin wrapper types
below only bundle decomposition outputs so callers do not juggle tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ContractViolationError(ValueError):
    """An input violates a documented precondition."""


class RankDeficiencyError(np.linalg.LinAlgError):
    """A matrix required to have full rank is numerically rank deficient."""


@dataclass
class HermitianEigenSystem:
    """Eigenvalues (descending) and matching orthonormal eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass
class ThinSVD:
    """Thin singular value decomposition ``Y = left @ diag(singulars) @ right_h``."""

    left: np.ndarray
    singulars: np.ndarray
    right_h: np.ndarray


def hermitian_eig(C: np.ndarray, check: bool = True) -> HermitianEigenSystem:
    """Eigen-decompose a Hermitian matrix, eigenvalues sorted descending.

    Parameters
    ----------
    C : (L, L) complex ndarray
        Hermitian to relative tolerance ``1e-10 * ||C||_F``.
    check : bool
        Verify Hermitian symmetry before decomposing.

    Raises
    ------
    ContractViolationError
        If ``C`` is not Hermitian within tolerance.
    """
    C = np.asarray(C)
    if check:
        dev = np.linalg.norm(C - C.conj().T)
        if dev > 1e-10 * max(np.linalg.norm(C), 1e-300):
            raise ContractViolationError(
                f"matrix is not Hermitian: asymmetry {dev:.3e}"
            )
    lam, vecs = np.linalg.eigh(C)
    return HermitianEigenSystem(lam[::-1].copy(), vecs[:, ::-1].copy())


def thin_svd(Y: np.ndarray) -> ThinSVD:
    """Thin SVD with singular values in descending order (LAPACK convention)."""
    P, s, Qh = np.linalg.svd(np.asarray(Y), full_matrices=False)
    return ThinSVD(P, s, Qh)


def solve_sylvester_skew(G: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Solve ``G @ B + B @ G = R`` for Hermitian positive-definite G, skew-Hermitian R.

    Diagonalizing ``G = Q diag(lam) Q^H`` reduces the equation to entrywise
    division by ``lam_i + lam_j``, which is safe because G is positive
    definite.  The solution inherits skew-Hermitian structure from ``R``.

    Raises
    ------
    RankDeficiencyError
        If the smallest eigenvalue of G is at most ``1e-12`` times the largest.
    """
    G = np.asarray(G)
    R = np.asarray(R)
    lam, Q = np.linalg.eigh(0.5 * (G + G.conj().T))
    if lam[0] <= 1e-12 * max(lam[-1], 0.0):
        raise RankDeficiencyError("Gram matrix is numerically singular")
    Rq = Q.conj().T @ R @ Q
    B = Rq / (lam[:, None] + lam[None, :])
    return Q @ B @ Q.conj().T
