import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdmimo.array_model import crandn
from sdmimo.quantization import QuantizerBank, alpha_gaussian, alpha_lloyd_max, quantize_one_bit
from sdmimo.sigma_delta import (
    NOISE_GAIN,
    NOISE_LIMIT,
    analytic_bank,
    calibrate_levels,
    gamma_empirical,
    sd_effective_noise,
    sd_linear_model,
    sd_quantize,
    sd_structure,
    shaped_noise_covariance,
)


def hand_recursion(p_x):
    """Literal scalar loop, the independent oracle for the matrix form."""
    p_r = [p_x[0]]
    for v in p_x[1:]:
        p_r.append(v + NOISE_GAIN * p_r[-1])
    p_r = np.array(p_r)
    return p_r, NOISE_GAIN * p_r


class TestStructure:
    @settings(max_examples=40, deadline=None)
    @given(m=st.integers(1, 12), phi=st.floats(-np.pi, np.pi))
    def test_inverse_identity(self, m, phi):
        st_ = sd_structure(m, phi)
        np.testing.assert_allclose(st_.U_inv() @ st_.U, np.eye(m), atol=1e-12)
        np.testing.assert_allclose(st_.U_inv() @ st_.V, np.exp(-1j * phi) * st_.delay, atol=1e-12)

    def test_u_entries(self):
        st_ = sd_structure(3, 0.5)
        assert st_.U[2, 0] == pytest.approx(np.exp(-1j * 1.0), abs=1e-15)
        assert st_.U[0, 2] == 0

    @settings(max_examples=30, deadline=None)
    @given(m=st.integers(1, 10), phi=st.floats(-np.pi, np.pi), seed=st.integers(0, 2**31))
    def test_defining_identity(self, m, phi, seed):
        rng = np.random.default_rng(seed)
        x = 3 * crandn(rng, (m, 4))
        bank = QuantizerBank(rng.uniform(0.5, 2.0, m))
        y, r = sd_quantize(x, bank, phi)
        st_ = sd_structure(m, phi)
        np.testing.assert_allclose(r, st_.U @ x - st_.V @ y, atol=1e-12)


class TestSdQuantize:
    def test_single_antenna_equals_plain_onebit(self):
        rng = np.random.default_rng(0)
        x = crandn(rng, (1, 1000))
        bank = alpha_gaussian([1.0])
        y_sd, r = sd_quantize(x, bank, 0.7)
        y_1b = quantize_one_bit(x, bank)
        np.testing.assert_array_equal(y_sd, y_1b)
        np.testing.assert_array_equal(r, x)

    def test_vector_and_batch_agree(self):
        rng = np.random.default_rng(1)
        x = crandn(rng, (5, 3))
        bank = alpha_gaussian(np.ones(5))
        y_b, r_b = sd_quantize(x, bank, 0.3)
        for t in range(3):
            y_v, r_v = sd_quantize(x[:, t], bank, 0.3)
            np.testing.assert_array_equal(y_v, y_b[:, t])
            # scalar and vectorized complex products may differ in the last ulp
            np.testing.assert_allclose(r_v, r_b[:, t], atol=1e-13)

    def test_input_power_recursion_on_gaussian_snapshots(self):
        # white Gaussian input; E|r_m|^2 must track the analytic recursion
        M, p = 12, 3.0
        model = sd_linear_model(np.full(M, p))
        bank = analytic_bank(model)
        rng = np.random.default_rng(2)
        x = np.sqrt(p) * crandn(rng, (M, 10**5))
        _, r = sd_quantize(x, bank, np.pi / 4)
        emp = (np.abs(r) ** 2).mean(axis=1)
        assert np.max(np.abs(emp - model.p_r) / model.p_r) < 0.02


class TestLinearModel:
    def test_hand_recursion_three_antennas(self):
        model = sd_linear_model(np.ones(3))
        p_r, p_q = hand_recursion(np.ones(3))
        np.testing.assert_allclose(model.p_r, p_r, atol=1e-12)
        np.testing.assert_allclose(model.p_q, p_q, atol=1e-12)
        # spot values from the scalar loop
        np.testing.assert_allclose(model.p_r, [1.0, 1.5707963268, 1.8966047735], atol=1e-9)
        np.testing.assert_allclose(model.p_q, [0.5707963268, 0.8966047735, 1.0825750381], atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**31), m=st.integers(1, 30))
    def test_matrix_form_equals_loop(self, seed, m):
        rng = np.random.default_rng(seed)
        p_x = rng.uniform(0.1, 5.0, m)
        model = sd_linear_model(p_x)
        p_r, p_q = hand_recursion(p_x)
        np.testing.assert_allclose(model.p_r, p_r, rtol=1e-12)
        np.testing.assert_allclose(model.p_q, p_q, rtol=1e-12)

    def test_single_antenna_base_case(self):
        model = sd_linear_model(np.array([2.0]))
        assert model.p_q[0] == pytest.approx(NOISE_GAIN * 2.0, rel=1e-12)

    def test_limit_value(self):
        # noise power converges to about 1.33x the input power
        model = sd_linear_model(np.ones(100))
        assert NOISE_LIMIT == pytest.approx(1.3298961832, abs=1e-9)
        assert abs(model.p_q[-1] / 1.0 - NOISE_LIMIT) < 1e-6

    def test_monotone_and_bounded_for_constant_input(self):
        model = sd_linear_model(np.full(40, 2.0))
        assert np.all(np.diff(model.p_q) >= -1e-12)
        assert model.p_q[-1] <= NOISE_LIMIT * 2.0 * (1 + 1e-9)

    def test_pi_matrix_entries(self):
        model = sd_linear_model(np.ones(4))
        assert model.Pi[3, 1] == pytest.approx(NOISE_GAIN**2, rel=1e-12)
        assert model.Pi[0, 2] == 0.0

    def test_rejects_bad_power(self):
        with pytest.raises(ValueError):
            sd_linear_model(np.array([1.0, -0.5]))


class TestEffectiveNoise:
    def test_two_antenna_unsteered_difference(self):
        # with phi=0 the second shaped-noise element is q_2 - q_1
        rng = np.random.default_rng(3)
        x = crandn(rng, (2, 100))
        bank = alpha_gaussian([1.0, 1.5])
        y, r = sd_quantize(x, bank, 0.0)
        q = y - r
        eff = sd_effective_noise(y, x)
        np.testing.assert_allclose(eff[0], q[0], atol=1e-12)
        np.testing.assert_allclose(eff[1], q[1] - q[0], atol=1e-12)

    def test_cross_correlations_small_on_white_input(self):
        # validates the diagonal noise model and the neglected input/noise
        # coupling; short array keeps the intrinsic residual inside the gate
        M, p = 4, 5.0
        model = sd_linear_model(np.full(M, p))
        bank = analytic_bank(model)
        rng = np.random.default_rng(4)
        x = np.sqrt(p) * crandn(rng, (M, 10**5))
        y, r = sd_quantize(x, bank, np.pi / 4)
        q = y - r
        qq = np.abs((q[1:] * q[:-1].conj()).mean(axis=1))
        qq_norm = qq / np.sqrt(model.p_q[1:] * model.p_q[:-1])
        assert np.max(qq_norm) < 0.05
        qx = np.abs((x[1:] * q[:-1].conj()).mean(axis=1))
        qx_norm = qx / np.sqrt(p * model.p_q[:-1])
        assert np.max(qx_norm) < 0.05

    def test_shaped_covariance_structure(self):
        model = sd_linear_model(np.ones(3))
        phi = 0.6
        R = shaped_noise_covariance(model, phi)
        st_ = sd_structure(3, phi)
        expected = st_.U_inv() @ np.diag(model.p_q) @ st_.U_inv().conj().T
        np.testing.assert_allclose(R, expected, atol=1e-12)


class TestGammaEmpirical:
    def test_unit_gain_with_analytic_bank(self):
        M, p = 4, 5.0
        model = sd_linear_model(np.full(M, p))
        bank = analytic_bank(model)
        rng = np.random.default_rng(5)
        x = np.sqrt(p) * crandn(rng, (M, 10**5))
        y, r = sd_quantize(x, bank, np.pi / 4)
        gam, imag_resid = gamma_empirical(r, y)
        assert np.all(gam >= 0.98) and np.all(gam <= 1.02)
        assert np.max(imag_resid) < 0.01

    def test_scaled_bank_scales_gain(self):
        M, p = 3, 2.0
        model = sd_linear_model(np.full(M, p))
        bank2 = QuantizerBank(2.0 * analytic_bank(model).alpha)
        rng = np.random.default_rng(6)
        x = np.sqrt(p) * crandn(rng, (M, 2 * 10**4))
        y, r = sd_quantize(x, bank2, 0.0)
        gam, _ = gamma_empirical(r, y)
        # gain is linear in alpha; the loop noise shifts it a little
        assert np.all(gam > 1.6) and np.all(gam < 2.4)

    def test_lloyd_max_bank_gain_below_one(self):
        # Gaussian input at antenna 1 gives gamma = 2/pi exactly in the mean
        rng = np.random.default_rng(7)
        x = crandn(rng, (1, 10**5))
        y, r = sd_quantize(x, alpha_lloyd_max([1.0]), 0.0)
        gam, _ = gamma_empirical(r, y)
        assert gam[0] == pytest.approx(2 / np.pi, rel=0.02)
        # and stays below one down a feedback chain
        M = 6
        p_x = np.ones(M)
        bankM = alpha_lloyd_max(sd_linear_model(p_x).p_r)
        xm = crandn(rng, (M, 10**5))
        ym, rm = sd_quantize(xm, bankM, 0.3)
        gm, _ = gamma_empirical(rm, ym)
        assert np.all(gm < 1.0)

    def test_insufficient_samples_rejected(self):
        r = np.zeros((2, 100), dtype=complex)
        with pytest.raises(ValueError):
            gamma_empirical(r, r)


class TestCalibration:
    def test_calibrated_levels_near_analytic_on_white_input(self):
        M, p = 6, 4.0
        rng = np.random.default_rng(8)
        x = np.sqrt(p) * crandn(rng, (M, 5 * 10**4))
        bank = calibrate_levels(x, np.pi / 4)
        analytic = analytic_bank(sd_linear_model(np.full(M, p))).alpha
        np.testing.assert_allclose(bank.alpha, analytic, rtol=0.05)

    def test_calibrated_levels_restore_unit_gain(self):
        M, p = 8, 4.0
        rng = np.random.default_rng(9)
        x = np.sqrt(p) * crandn(rng, (M, 5 * 10**4))
        bank = calibrate_levels(x, 0.5)
        y, r = sd_quantize(x, bank, 0.5)
        gam, _ = gamma_empirical(r, y)
        assert np.all(np.abs(gam - 1) < 0.02)
