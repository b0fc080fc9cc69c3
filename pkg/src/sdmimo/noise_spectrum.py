"""Spatial quantization-noise power density and in-band noise power.

The density at spatial frequency u is rho_q(u) = a(u)^H R a(u) / M for a noise
covariance R; integrating it over the signal sector [-delta, delta] (and
normalizing by the sector width) gives the in-band noise power.  Closed forms
exist for both architectures:

  - standard one-bit, via the linearized arcsine law sin^-1(x) ~ zeta*x;
  - sigma-delta, via the diagonal noise model shaped by U^{-1}.

Every closed form here can be cross-checked against direct quadrature of the
density (:func:`pq_by_quadrature`).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import array_model, quantization, sigma_delta
from .array_model import ArrayGeometry, Scenario


@dataclass(frozen=True)
class SpectrumCurve:
    """Sampled noise power density over a grid of spatial frequencies."""

    u: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        d = np.asarray(self.density, dtype=float)
        if u.shape != d.shape or u.ndim != 1:
            raise ValueError("u and density must be equal-length 1-D arrays")
        if np.any(np.diff(u) <= 0) or u[0] < -1 or u[-1] > 1:
            raise ValueError("u must be strictly increasing within [-1, 1]")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "density", d)


@dataclass(frozen=True)
class ZetaApprox:
    """Slope of the linearized arcsine, sin^-1(x) ~ zeta*x on [0, fit_range]."""

    zeta: float
    fit_range: float

    def __post_init__(self):
        if not 0 < self.fit_range <= 1:
            raise ValueError("fit_range must lie in (0, 1]")
        if self.zeta < 1:
            raise ValueError("zeta must be >= 1 (arcsine lies above the identity)")


def default_u_grid(n: int = 1024) -> np.ndarray:
    return np.linspace(-1.0, 1.0, n)


def rho_q(R: np.ndarray, u: float, geom: ArrayGeometry) -> float:
    """Noise power density a(u)^H R a(u) / M for a Hermitian covariance R."""
    R = np.asarray(R)
    if not np.allclose(R, R.conj().T, atol=1e-8 * max(1.0, np.abs(R).max())):
        raise ValueError("R must be Hermitian")
    a = array_model.steering_vector(geom, u)
    val = a.conj() @ R @ a / geom.M
    if abs(val.imag) > 1e-9 * max(1.0, abs(val.real)):
        raise AssertionError(f"density has non-negligible imaginary part {val.imag:.3e}")
    return float(val.real)


def density_on_grid(R: np.ndarray, u_grid: np.ndarray, geom: ArrayGeometry) -> np.ndarray:
    """Vectorized rho_q over a grid; returns an array matching u_grid."""
    A = array_model.steering_matrix(geom, u_grid)
    return np.einsum("mu,mn,nu->u", A.conj(), np.asarray(R), A).real / geom.M


def fit_zeta(x_max: float) -> ZetaApprox:
    """Least-squares slope of sin^-1(x) ~ zeta*x over [0, x_max].

    zeta = int_0^c x*asin(x) dx / int_0^c x^2 dx, evaluated in closed form.
    """
    c = float(x_max)
    if not 0 < c <= 1:
        raise ValueError("x_max must lie in (0, 1]")
    if c < 1e-3:
        # series of the ratio; avoids cancellation for tiny fit ranges
        return ZetaApprox(zeta=1.0 + c**2 / 10.0 + 3.0 * c**4 / 112.0, fit_range=c)
    num = c**2 * np.arcsin(c) / 2 - (np.arcsin(c) - c * np.sqrt(1 - c**2)) / 4
    return ZetaApprox(zeta=float(num / (c**3 / 3)), fit_range=c)


def zeta_for_scenario(scn: Scenario, geom: ArrayGeometry) -> ZetaApprox:
    """Fit zeta to the largest arcsine argument the scenario produces.

    The fit range is the largest off-diagonal magnitude (max of |Re| and |Im|)
    of the normalized input covariance.
    """
    R = array_model.rx_covariance_analytic(scn, geom)
    d = np.sqrt(np.diag(R).real)
    ups = R / np.outer(d, d)
    mag = np.maximum(np.abs(ups.real), np.abs(ups.imag))
    np.fill_diagonal(mag, 0.0)
    x_max = float(np.clip(mag.max(), 1e-6, 1.0))
    return fit_zeta(x_max)


def _sumsinc2(M: int, d_over_lambda: float, delta: float) -> float:
    """Double sum of sinc^2(2*pi*(d/lambda)*(m-n)*delta) over an M-antenna pair grid."""
    diff = np.arange(-(M - 1), M)
    s = np.sinc(2 * d_over_lambda * diff * delta) ** 2  # np.sinc is sin(pi x)/(pi x)
    return float(np.sum((M - np.abs(diff)) * s))


def pq_onebit_analytic(scn: Scenario, geom: ArrayGeometry, zeta: ZetaApprox) -> float:
    """Closed-form in-band noise power of the standard one-bit array.

    Uses the broadside sector of half-width delta = sin(Theta/2); the numbers
    are invariant to steering the sector, so this loses no generality.
    """
    if zeta.zeta <= 1:
        warnings.warn("zeta <= 1 makes the linearized arcsine degenerate", stacklevel=2)
    delta = float(np.sin(scn.Theta / 2))
    M = geom.M
    z = zeta.zeta
    total = scn.sum_rx_power
    tr_Rx = M * (total + scn.sigma_n2)
    return float(
        (z - 1) * (scn.sigma_n2 + total / M * _sumsinc2(M, geom.d_over_lambda, delta))
        + (np.pi / 2 - z) / M * tr_Rx
    )


def pq_sigmadelta_analytic(noise: sigma_delta.SdNoiseModel, geom: ArrayGeometry, delta: float) -> float:
    """Closed-form in-band noise power of the sigma-delta array (broadside, phi=0).

    (2/M)(Tr R_q - s2_qM)(1 - sinc(2*pi*(d/lambda)*delta)) + s2_qM/M, where the
    last term is the unshaped noise of the final antenna.
    """
    M = noise.p_q.shape[0]
    s2M = noise.sigma_qM2
    snc = float(np.sinc(2 * geom.d_over_lambda * delta))
    return float(2 / M * (noise.trace_Rq - s2M) * (1 - snc) + s2M / M)


def pq_by_quadrature(R: np.ndarray, geom: ArrayGeometry, delta: float, nodes: int = 128) -> float:
    """Sector-average of rho_q over [-delta, delta] by Gauss-Legendre quadrature.

    The independent oracle for both closed forms above.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = delta * x
    dens = density_on_grid(R, u, geom)
    return float(np.sum(w * dens) / 2.0)  # weights sum to 2; /2 gives the average


def analytic_noise_covariance(
    pipeline: str,
    scn: Scenario,
    geom: ArrayGeometry,
    doas: array_model.ChannelRealization | None = None,
) -> np.ndarray:
    """Model quantization-noise covariance for either architecture.

    one-bit: arcsine-law output covariance minus R_x (R_x conditioned on the
    DoA set when one is supplied, the sector-average form otherwise).
    sigma-delta: U^{-1} diag(p_q) U^{-H} from the a-priori linear model; its
    p_x depends only on the per-antenna power, never on the DoA draw.
    """
    if pipeline == "onebit":
        R_x = (
            array_model.rx_covariance_from_doas(doas, scn, geom)
            if doas is not None
            else array_model.rx_covariance_analytic(scn, geom)
        )
        return quantization.onebit_noise_covariance(R_x)
    if pipeline == "sigma_delta":
        p_x = np.full(geom.M, scn.sum_rx_power + scn.sigma_n2)
        model = sigma_delta.sd_linear_model(p_x)
        return sigma_delta.shaped_noise_covariance(model, scn.steering_phase(geom))
    raise ValueError(f"pipeline must be 'onebit' or 'sigma_delta', got {pipeline!r}")


def empirical_spectrum(
    pipeline: str,
    scn: Scenario,
    geom: ArrayGeometry,
    trials: int,
    u_grid: np.ndarray | None = None,
    seed=0,
    input_model: str = "scenario",
    doas: array_model.ChannelRealization | None = None,
    batch: int = 10_000,
) -> SpectrumCurve:
    """Estimate the effective-noise density by running the real quantizer loop.

    Each trial draws one Gaussian snapshot, pushes it through the selected
    pipeline with analytically set levels, and accumulates the covariance of
    the effective noise (y - x for both architectures; for sigma-delta that is
    exactly the shaped noise U^{-1} q).

    ``input_model`` picks the snapshot ensemble:
      - "scenario": CSCG with the scenario covariance (conditioned on ``doas``
        when given) -- the physical received-signal statistics.
      - "white": independent antennas at the scenario per-antenna power -- the
        ensemble the equivalent linear model is defined for; use it to test
        the model's own predictions without the error the model already
        declares out of scope (its neglected input/noise cross-correlation).
    """
    if trials < 1000:
        raise ValueError(f"need at least 1000 trials, got {trials}")
    if pipeline not in ("onebit", "sigma_delta"):
        raise ValueError(f"pipeline must be 'onebit' or 'sigma_delta', got {pipeline!r}")
    if u_grid is None:
        u_grid = default_u_grid()
    M = geom.M
    p_ant = scn.sum_rx_power + scn.sigma_n2

    if input_model == "white":
        chol = np.sqrt(p_ant) * np.eye(M)
    elif input_model == "scenario":
        R_x = (
            array_model.rx_covariance_from_doas(doas, scn, geom)
            if doas is not None
            else array_model.rx_covariance_analytic(scn, geom)
        )
        # tiny diagonal jitter guards the factorization against rounding
        chol = np.linalg.cholesky(R_x + 1e-12 * p_ant * np.eye(M))
    else:
        raise ValueError(f"input_model must be 'scenario' or 'white', got {input_model!r}")

    if pipeline == "sigma_delta":
        model = sigma_delta.sd_linear_model(np.full(M, p_ant))
        bank = sigma_delta.analytic_bank(model)
        phi = scn.steering_phase(geom)
    else:
        bank = quantization.alpha_gaussian(np.full(M, p_ant))

    rng = np.random.default_rng(seed)
    cov = np.zeros((M, M), dtype=complex)
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        x = chol @ array_model.crandn(rng, (M, n))
        if pipeline == "sigma_delta":
            y, _ = sigma_delta.sd_quantize(x, bank, phi)
        else:
            y = quantization.quantize_one_bit(x, bank)
        q = y - x
        cov += q @ q.conj().T
        done += n
    cov /= trials
    return SpectrumCurve(u=np.asarray(u_grid, dtype=float), density=density_on_grid(cov, u_grid, geom))


def crossover_beamwidth_deg(sd: SpectrumCurve, onebit: SpectrumCurve, u_center: float) -> float:
    """Angular width (degrees) of the contiguous region around u_center where
    the sigma-delta density stays below the one-bit density."""
    if not np.array_equal(sd.u, onebit.u):
        raise ValueError("curves must share a grid")
    below = sd.density < onebit.density
    i0 = int(np.argmin(np.abs(sd.u - u_center)))
    if not below[i0]:
        return 0.0
    lo = i0
    while lo > 0 and below[lo - 1]:
        lo -= 1
    hi = i0
    while hi < below.size - 1 and below[hi + 1]:
        hi += 1
    return float(np.degrees(np.arcsin(sd.u[hi]) - np.arcsin(sd.u[lo])))
