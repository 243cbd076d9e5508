import numpy as np
import pytest

from drjadce import (ContractViolationError, RankDeficiencyError, crandn,
                     hermitian_eig, solve_sylvester_skew, thin_svd)


def cofactor_det(C):
    n = C.shape[0]
    if n == 1:
        return C[0, 0]
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(C, 0, axis=0), j, axis=1)
        total += (-1) ** j * C[0, j] * cofactor_det(minor)
    return total


class TestHermitianEig:
    def test_identity(self):
        eig = hermitian_eig(np.eye(3, dtype=complex))
        np.testing.assert_allclose(eig.eigenvalues, [1, 1, 1])

    def test_diagonal(self):
        eig = hermitian_eig(np.diag([4.0, 2.0, 1.0]).astype(complex))
        np.testing.assert_allclose(eig.eigenvalues, [4, 2, 1])
        # eigenvectors are the standard basis up to phase
        np.testing.assert_allclose(np.abs(eig.eigenvectors), np.eye(3), atol=1e-12)

    def test_reconstruction_and_orthonormality(self, rng):
        B = crandn(rng, 6, 6)
        C = B @ B.conj().T
        eig = hermitian_eig(C)
        D, lam = eig.eigenvectors, eig.eigenvalues
        assert np.all(np.diff(lam) <= 1e-12)
        rec = D @ np.diag(lam) @ D.conj().T
        assert np.linalg.norm(rec - C) <= 1e-8 * np.linalg.norm(C)
        assert np.linalg.norm(D.conj().T @ D - np.eye(6)) <= 1e-9

    def test_characteristic_polynomial_oracle(self, rng):
        # brute-force roots of det(C - lam I) for a 3x3 Hermitian matrix
        B = crandn(rng, 3, 3)
        C = B @ B.conj().T
        c2 = np.trace(C)
        minors = sum(
            C[i, i] * C[j, j] - C[i, j] * C[j, i]
            for i in range(3) for j in range(i + 1, 3)
        )
        c0 = cofactor_det(C)
        roots = np.roots([1.0, -c2.real, minors.real, -c0.real])
        expected = np.sort(roots.real)[::-1]
        got = hermitian_eig(C).eigenvalues
        np.testing.assert_allclose(got, expected, rtol=1e-8, atol=1e-10)

    def test_trace_identity(self, rng):
        B = crandn(rng, 5, 5)
        C = B @ B.conj().T
        lam = hermitian_eig(C).eigenvalues
        assert abs(lam.sum() - np.trace(C).real) <= 1e-8 * abs(np.trace(C).real)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_determinant_vs_cofactor(self, rng, n):
        B = crandn(rng, n, n)
        C = B @ B.conj().T + np.eye(n)
        lam = hermitian_eig(C).eigenvalues
        det = cofactor_det(C)
        assert abs(np.prod(lam) - det.real) <= 1e-8 * abs(det.real)

    def test_non_hermitian_rejected(self, rng):
        C = crandn(rng, 4, 4)
        with pytest.raises(ContractViolationError):
            hermitian_eig(C)


class TestThinSVD:
    def test_zero_matrix(self):
        svd = thin_svd(np.zeros((4, 3), dtype=complex))
        np.testing.assert_allclose(svd.singulars, 0.0)

    def test_unitary(self, rng):
        Q, _ = np.linalg.qr(crandn(rng, 5, 5))
        svd = thin_svd(Q)
        np.testing.assert_allclose(svd.singulars, 1.0, atol=1e-12)

    def test_rank_one_outer_product(self, rng):
        u = crandn(rng, 6)
        v = crandn(rng, 4)
        u *= 2.0 / np.linalg.norm(u)
        v *= 3.0 / np.linalg.norm(v)
        svd = thin_svd(np.outer(u, v.conj()))
        assert abs(svd.singulars[0] - 6.0) <= 1e-10
        np.testing.assert_allclose(svd.singulars[1:], 0.0, atol=1e-10)

    def test_reconstruction_and_orthonormality(self, rng):
        Y = crandn(rng, 7, 5)
        svd = thin_svd(Y)
        rec = svd.left @ np.diag(svd.singulars) @ svd.right_h
        assert np.linalg.norm(rec - Y) <= 1e-8 * np.linalg.norm(Y)
        assert np.linalg.norm(svd.left.conj().T @ svd.left - np.eye(5)) <= 1e-9
        assert np.linalg.norm(svd.right_h @ svd.right_h.conj().T - np.eye(5)) <= 1e-9
        assert np.all(np.diff(svd.singulars) <= 0) and np.all(svd.singulars >= 0)


class TestSylvester:
    @staticmethod
    def random_skew(rng, n):
        B = crandn(rng, n, n)
        return B - B.conj().T

    def test_identity_gram(self, rng):
        R = self.random_skew(rng, 3)
        B = solve_sylvester_skew(np.eye(3, dtype=complex), R)
        np.testing.assert_allclose(B, R / 2, atol=1e-12)

    def test_zero_rhs(self, rng):
        G = crandn(rng, 3, 3)
        G = G @ G.conj().T + np.eye(3)
        B = solve_sylvester_skew(G, np.zeros((3, 3), dtype=complex))
        np.testing.assert_allclose(B, 0.0, atol=1e-14)

    def test_kronecker_oracle(self, rng):
        # dense solve of (I (x) G + G^T (x) I) vec(B) = vec(R), column stacking
        G = crandn(rng, 4, 4)
        G = G @ G.conj().T + 0.5 * np.eye(4)
        R = self.random_skew(rng, 4)
        K = np.kron(np.eye(4), G) + np.kron(G.T, np.eye(4))
        B_oracle = np.linalg.solve(K, R.flatten(order="F")).reshape((4, 4), order="F")
        B = solve_sylvester_skew(G, R)
        np.testing.assert_allclose(B, B_oracle, atol=1e-10)

    def test_residual_and_skew_structure(self, rng):
        G = crandn(rng, 5, 5)
        G = G @ G.conj().T + np.eye(5)
        R = self.random_skew(rng, 5)
        B = solve_sylvester_skew(G, R)
        res = G @ B + B @ G - R
        assert np.linalg.norm(res) <= 1e-9 * np.linalg.norm(R)
        assert np.linalg.norm(B + B.conj().T) <= 1e-9 * np.linalg.norm(B)

    def test_singular_gram_rejected(self, rng):
        G = np.diag([1.0, 1.0, 0.0]).astype(complex)
        with pytest.raises(RankDeficiencyError):
            solve_sylvester_skew(G, self.random_skew(rng, 3))
