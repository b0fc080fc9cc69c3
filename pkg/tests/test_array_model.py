import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from sdmimo.array_model import (
    ArrayGeometry,
    Scenario,
    crandn,
    draw_channel,
    draw_symbols,
    realization_from_angles,
    redraw_fading,
    rx_covariance_analytic,
    rx_covariance_from_doas,
    steering_matrix,
    steering_vector,
    synthesize_rx,
)


def make_scenario(**kw):
    base = dict(K=2, L=4, theta0=0.0, Theta=np.deg2rad(40), p0=1.0, sigma_n2=1.0)
    base.update(kw)
    return Scenario(**base)


class TestSteeringVector:
    def test_zero_frequency_is_all_ones(self):
        a = steering_vector(ArrayGeometry(4, 0.25), 0.0)
        np.testing.assert_array_equal(a, np.ones(4))

    def test_half_wavelength_endfire(self):
        a = steering_vector(ArrayGeometry(2, 0.5), 1.0)
        np.testing.assert_allclose(a, [1.0, -1.0], atol=1e-12)

    def test_direct_evaluation(self):
        a = steering_vector(ArrayGeometry(3, 0.25), 0.5)
        expected = np.exp(-1j * np.pi * np.arange(3) / 4)
        np.testing.assert_allclose(a, expected, atol=1e-12)

    def test_rejects_u_outside_unit_interval(self):
        with pytest.raises(ValueError):
            steering_vector(ArrayGeometry(4, 0.25), 1.2)
        with pytest.raises(ValueError):
            steering_matrix(ArrayGeometry(4, 0.25), np.array([0.0, -1.01]))

    @settings(max_examples=50, deadline=None)
    @given(
        m=st.integers(1, 16),
        dl=st.floats(0.01, 0.5),
        u=st.floats(-1.0, 1.0),
    )
    def test_norm_is_antenna_count(self, m, dl, u):
        a = steering_vector(ArrayGeometry(m, dl), u)
        assert np.vdot(a, a).real == pytest.approx(m, abs=1e-9)
        assert a[0] == 1.0


class TestDrawChannel:
    def test_single_path_collapse(self):
        scn = make_scenario(K=1, L=1)
        geom = ArrayGeometry(8, 0.25)
        real = draw_channel(scn, geom, 3)
        a = steering_vector(geom, np.sin(real.theta[0, 0]))
        np.testing.assert_allclose(real.G[:, 0], real.h[0, 0] * a, atol=1e-12)

    def test_average_channel_gain(self):
        # Monte Carlo oracle: E||g_k||^2 = M * beta_k
        scn = make_scenario(K=2, L=6, beta=np.array([1.0, 2.5]))
        geom = ArrayGeometry(16, 0.25)
        rng = np.random.default_rng(7)
        n = 10_000
        acc = np.zeros(2)
        for _ in range(n):
            real = draw_channel(scn, geom, rng)
            acc += np.linalg.norm(real.G, axis=0) ** 2 / geom.M
        mean = acc / n
        # ||g||^2/(M beta) is an average of L unit-mean exponentials: var = 1/L
        se = np.sqrt(1.0 / scn.L / n) * scn.beta
        assert np.all(np.abs(mean - scn.beta) < 3 * se * np.array([1, 1]) + 3e-2 * scn.beta)

    def test_deterministic_for_fixed_seed(self):
        scn = make_scenario()
        geom = ArrayGeometry(8, 0.25)
        a = draw_channel(scn, geom, 42)
        b = draw_channel(scn, geom, 42)
        np.testing.assert_array_equal(a.G, b.G)
        np.testing.assert_array_equal(a.theta, b.theta)

    def test_doas_confined_to_sector(self):
        scn = make_scenario(theta0=0.3, Theta=0.2)
        real = draw_channel(scn, ArrayGeometry(4, 0.25), 0)
        assert np.all(np.abs(real.theta - 0.3) <= 0.1 + 1e-12)

    def test_shared_doas_flag(self):
        scn = make_scenario(shared_doas=True)
        real = draw_channel(scn, ArrayGeometry(4, 0.25), 0)
        np.testing.assert_array_equal(real.theta[0], real.theta[1])
        scn2 = make_scenario(shared_doas=False)
        real2 = draw_channel(scn2, ArrayGeometry(4, 0.25), 0)
        assert not np.array_equal(real2.theta[0], real2.theta[1])

    def test_invalid_scenario_rejected(self):
        with pytest.raises(ValueError):
            make_scenario(Theta=0.0)
        with pytest.raises(ValueError):
            make_scenario(L=0)
        with pytest.raises(ValueError):
            make_scenario(beta=np.array([1.0, -1.0]))

    def test_power_control_equalizes_received_power(self):
        scn = make_scenario(K=3, beta=np.array([0.5, 1.0, 4.0]), p0=2.0)
        np.testing.assert_allclose(scn.p * scn.beta, 2.0)

    def test_redraw_fading_keeps_doas(self):
        scn = make_scenario()
        geom = ArrayGeometry(8, 0.25)
        base = draw_channel(scn, geom, 1)
        rng = np.random.default_rng(2)
        fresh = redraw_fading(base, scn, rng)
        np.testing.assert_array_equal(fresh.theta, base.theta)
        assert not np.array_equal(fresh.G, base.G)

    def test_realization_from_angles_matches_steering(self):
        scn = make_scenario()
        geom = ArrayGeometry(8, 0.25)
        base = draw_channel(scn, geom, 1)
        rebuilt = realization_from_angles(scn, geom, base.theta, 5)
        np.testing.assert_allclose(rebuilt.A, base.A, atol=1e-12)


class TestSynthesizeRx:
    def test_noiseless_single_user(self):
        scn = make_scenario(K=1, sigma_n2=1e-30)
        geom = ArrayGeometry(8, 0.25)
        real = draw_channel(scn, geom, 0)
        x = synthesize_rx(real, scn, np.array([1.0 + 0j]), 0)
        np.testing.assert_allclose(x, np.sqrt(scn.p[0]) * real.G[:, 0], atol=1e-12)

    def test_noise_only_power(self):
        scn = make_scenario(sigma_n2=2.0)
        geom = ArrayGeometry(4, 0.25)
        real = draw_channel(scn, geom, 0)
        x = synthesize_rx(real, scn, np.zeros((2, 50_000)), 1)
        power = (np.abs(x) ** 2).mean(axis=1)
        assert np.allclose(power, 2.0, rtol=0.05)
        assert abs(x.mean()) < 0.02

    def test_dimension_mismatch(self):
        scn = make_scenario()
        real = draw_channel(scn, ArrayGeometry(4, 0.25), 0)
        with pytest.raises(ValueError):
            synthesize_rx(real, scn, np.zeros(3), 0)

    def test_sample_covariance_matches_analytic(self):
        # oracle: rx_covariance_analytic; sine-domain draws so the simulated
        # and integral ensembles coincide exactly
        scn = make_scenario(K=2, L=10, theta0=0.25, Theta=0.5, doa_domain="sine")
        geom = ArrayGeometry(6, 0.25)
        rng = np.random.default_rng(11)
        n_chan, n_sym = 1000, 100
        n = n_chan * n_sym
        R = np.zeros((6, 6), dtype=complex)
        for _ in range(n_chan):
            real = draw_channel(scn, geom, rng)
            s = draw_symbols(scn, rng, n_sym)
            x = synthesize_rx(real, scn, s, rng)
            R += x @ x.conj().T
        R /= n
        R_an = rx_covariance_analytic(scn, geom)
        rel = np.linalg.norm(R - R_an) / np.linalg.norm(R_an)
        # dominant fluctuation is the per-channel DoA draw: O(1/sqrt(L*n_chan))
        assert rel < 5 * 3 / np.sqrt(scn.L * n_chan)


class TestRxCovarianceAnalytic:
    def test_point_source_limit(self):
        scn = make_scenario(K=2, Theta=1e-9, sigma_n2=0.5)
        geom = ArrayGeometry(4, 0.25)
        R = rx_covariance_analytic(scn, geom)
        expected = scn.sum_rx_power * np.ones((4, 4)) + 0.5 * np.eye(4)
        np.testing.assert_allclose(R, expected, atol=1e-6)

    def test_broadside_offdiagonal_against_quadrature(self):
        # oracle: direct numeric quadrature of the covariance integral
        scn = make_scenario(K=1, Theta=np.pi / 3, sigma_n2=1e-12)
        scn.Theta = 2 * np.arcsin(0.5)  # delta = 0.5 exactly
        geom = ArrayGeometry(2, 0.25)
        R = rx_covariance_analytic(scn, geom)
        re, _ = integrate.quad(lambda u: np.cos(2 * np.pi * 0.25 * u), -0.5, 0.5)
        im, _ = integrate.quad(lambda u: -np.sin(2 * np.pi * 0.25 * u), -0.5, 0.5)
        np.testing.assert_allclose(R[0, 1], complex(re, im), atol=1e-9)
        assert R[0, 1].real == pytest.approx(0.9003163161571061, abs=1e-9)

    def test_trace_identity(self):
        scn = make_scenario(K=3, theta0=0.4, sigma_n2=0.7, beta=np.array([1.0, 2.0, 0.5]))
        geom = ArrayGeometry(5, 0.25)
        R = rx_covariance_analytic(scn, geom)
        assert np.trace(R).real == pytest.approx(5 * (scn.sum_rx_power + 0.7), rel=1e-9)

    def test_quadrature_matches_closed_form_at_broadside(self):
        scn = make_scenario(K=2, Theta=0.8)
        geom = ArrayGeometry(6, 0.25)
        R_closed = rx_covariance_analytic(scn, geom)
        # force the quadrature path with an almost-symmetric sector
        scn_off = make_scenario(K=2, Theta=0.8, theta0=1e-13)
        R_quad = rx_covariance_analytic(scn_off, geom)
        np.testing.assert_allclose(R_quad, R_closed, atol=1e-9)

    def test_conditional_covariance_diagonal(self):
        scn = make_scenario(K=2, L=7)
        geom = ArrayGeometry(6, 0.25)
        real = draw_channel(scn, geom, 9)
        R = rx_covariance_from_doas(real, scn, geom)
        np.testing.assert_allclose(np.diag(R).real, scn.sum_rx_power + scn.sigma_n2, rtol=1e-12)


class TestComplexGaussianConvention:
    def test_variance_split(self):
        rng = np.random.default_rng(0)
        z = crandn(rng, 200_000)
        assert np.var(z.real) == pytest.approx(0.5, rel=0.02)
        assert np.var(z.imag) == pytest.approx(0.5, rel=0.02)
        assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, rel=0.02)
