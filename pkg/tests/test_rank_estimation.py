import numpy as np
import pytest

from drjadce import (cm_criterion, cm_curve, crandn, default_u, estimate_rank,
                     regularized_covariance, substream)
from conftest import sparse_instance_arrays


class TestRegularizedCovariance:
    def test_full_loading_is_identity(self, rng):
        Y = crandn(rng, 6, 10)
        np.testing.assert_allclose(regularized_covariance(Y, 1.0), np.eye(6), atol=1e-14)

    def test_zero_signal(self):
        C = regularized_covariance(np.zeros((5, 7), dtype=complex), 0.5)
        np.testing.assert_allclose(C, 0.5 * np.eye(5), atol=1e-15)

    def test_pure_outer_product(self):
        # constant rank-one columns, no loading: single nonzero entry
        M = 9
        Y = np.zeros((4, M), dtype=complex)
        Y[0] = 1.0
        C = regularized_covariance(Y, 0.0)
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        np.testing.assert_allclose(C, expected, atol=1e-15)

    def test_hermitian_positive_definite(self, rng):
        C = regularized_covariance(crandn(rng, 8, 5), 0.3)
        np.testing.assert_allclose(C, C.conj().T)
        assert np.linalg.eigvalsh(C).min() > 0


class TestPenaltyConstant:
    def test_square_case(self):
        assert default_u(8, 8) == pytest.approx(0.9682233833280655, abs=1e-12)

    def test_thin_limit(self):
        assert default_u(1, 10**6) == pytest.approx(0.6, abs=1e-2)

    def test_reference_shape(self):
        # value for the 256-antenna, 90-symbol configuration, frozen
        assert default_u(256, 90) == pytest.approx(1.0347010335373157, abs=1e-12)


class TestCMCriterion:
    def test_direct_evaluation(self):
        lam = np.array([4.0, 2.0, 1.0, 1.0])
        assert cm_criterion(lam, 1, 0.0, 16) == pytest.approx(-2.249340578475233, abs=1e-12)

    def test_flat_spectrum_uninformative(self):
        lam = np.full(6, 3.0)
        vals = [cm_criterion(lam, r, 0.0, 10) for r in range(1, 6)]
        np.testing.assert_allclose(vals, -6 * np.log(3.0), atol=1e-12)

    def test_flat_spectrum_penalty_decreasing(self):
        lam = np.full(6, 3.0)
        vals = [cm_criterion(lam, r, 1.0, 10) for r in range(1, 6)]
        assert np.all(np.diff(vals) < 0)

    def test_rank_bounds(self):
        lam = np.array([2.0, 1.0, 1.0])
        for bad in (0, 3, 5):
            with pytest.raises(ValueError):
                cm_criterion(lam, bad, 1.0, 4)

    def test_curve_matches_pointwise(self, rng):
        lam = np.sort(np.abs(rng.standard_normal(9)))[::-1] + 0.5
        u, M = 1.3, 32
        curve = cm_curve(lam, u, M)
        assert len(curve) == 8
        np.testing.assert_allclose(
            curve, [cm_criterion(lam, r, u, M) for r in range(1, 9)], atol=1e-12)


class TestEstimateRank:
    def test_exact_low_rank(self, rng):
        # noiseless observation with O(1) scale, tiny loading: exact rank
        for r_true in (2, 4, 7):
            A, X, Y, _ = sparse_instance_arrays(rng, N=40, M=12, L=16, K=r_true)
            sel = estimate_rank(Y, beta=1e-3)
            assert sel.r_hat == r_true

    def test_pure_noise_small_rank(self):
        hits = 0
        for t in range(200):
            Y = crandn(substream(900, t), 40, 256)
            if estimate_rank(Y).r_hat <= 2:
                hits += 1
        assert hits >= 190

    def test_sigma2_hat_definition(self, rng):
        Y = crandn(rng, 10, 30) * 1.7
        sel = estimate_rank(Y, beta=0.2)
        assert sel.sigma2_hat == pytest.approx(sel.eigenvalues[sel.r_hat:].mean())
        assert len(sel.cm_values) == 9
        assert sel.r_hat == int(np.argmax(sel.cm_values)) + 1

    def test_sigma2_hat_noise_limit(self):
        # loaded noise floor approaches beta + (1 - beta) sigma^2 for many antennas
        sigma2, beta = 0.7, 0.38
        Y = np.sqrt(sigma2) * crandn(substream(901), 16, 4096)
        sel = estimate_rank(Y, beta=beta)
        target = beta + (1 - beta) * sigma2
        assert sel.sigma2_hat == pytest.approx(target, rel=0.05)

    def test_argmax_stable(self, rng):
        Y = crandn(rng, 12, 64)
        a = estimate_rank(Y)
        b = estimate_rank(Y)
        assert a.r_hat == b.r_hat
        np.testing.assert_array_equal(a.cm_values, b.cm_values)

    def test_requires_positive_loading(self, rng):
        with pytest.raises(ValueError):
            estimate_rank(crandn(rng, 6, 12), beta=0.0)


def _rank_trial(seed, p_dbm, sigma2, N=120, K=12, L=40, M=128):
    """Desk-scale rank estimate; draws are shared across powers (same seed)."""
    varsig = L * 10 ** ((p_dbm - 30) / 10)
    pathloss = 10 ** (-12.3)
    rng = substream(seed, 78)
    A = crandn(rng, L, N)
    A /= np.linalg.norm(A, axis=0, keepdims=True)
    act = rng.choice(N, K, replace=False)
    Xs = np.zeros((N, M), complex)
    Xs[act] = np.sqrt(varsig * pathloss) * crandn(rng, K, M)
    E = crandn(rng, L, M)
    Y = A @ Xs + np.sqrt(sigma2) * E
    return estimate_rank(Y / np.sqrt(sigma2)).r_hat


class TestPowerTrend:
    def test_success_non_decreasing_in_power(self):
        sigma2 = 10 ** ((-174 + 60 - 30) / 10)
        rates = []
        for p in (-12, -6, 0, 6):
            hits = sum(_rank_trial(t, p, sigma2) == 12 for t in range(30))
            rates.append(hits / 30)
        assert all(b >= a for a, b in zip(rates, rates[1:]))
        assert rates[-1] >= 0.9

    def test_beta_sensitivity_plateau(self):
        # the calibrated default sits on a plateau, not a knife edge
        sigma2 = 10 ** ((-174 + 60 - 30) / 10)
        for beta in (0.32, 0.38, 0.44):
            hits = 0
            for t in range(30):
                rng = substream(4000, t)
                A = crandn(rng, 40, 120)
                A /= np.linalg.norm(A, axis=0, keepdims=True)
                act = rng.choice(120, 12, replace=False)
                Xs = np.zeros((120, 128), complex)
                varsig = 40 * 10 ** ((10 - 30) / 10)
                Xs[act] = np.sqrt(varsig * 10 ** (-12.3)) * crandn(rng, 12, 128)
                Y = A @ Xs + np.sqrt(sigma2) * crandn(rng, 40, 128)
                hits += estimate_rank(Y / np.sqrt(sigma2), beta=beta).r_hat == 12
            assert hits / 30 >= 0.8, f"beta={beta} fell off the plateau"
