"""The angle-steered spatial sigma-delta array and its equivalent linear model.

Antenna m quantizes r_m = x_m + e^{-j*phi}*(r_{m-1} - y_{m-1}): the previous
antenna's quantization error re-enters through a phase-shifted feedback path.
In matrix form r = U x - V y with U the lower-triangular phase accumulator and
V = U - I, which makes y = x + U^{-1} q an exact identity for q = y - r.

The linear model sets each quantizer's level so its Bussgang gain is one; the
per-antenna input and noise powers then follow the geometric recursion
p_r[m] = p_x[m] + (pi/2 - 1) * p_r[m-1], collected in the transfer matrix Pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantization import QuantizerBank, alpha_empirical, alpha_gaussian

# per-stage noise gain of a gain-one one-bit quantizer on Gaussian input
NOISE_GAIN = np.pi / 2 - 1
# limiting noise-to-input power ratio, approx 1.3299
NOISE_LIMIT = NOISE_GAIN / (1 - NOISE_GAIN)


def spatial_delay_matrix(M: int) -> np.ndarray:
    """One-step shift along the array (ones on the first subdiagonal)."""
    return np.diag(np.ones(M - 1), -1) if M > 1 else np.zeros((1, 1))


@dataclass(frozen=True)
class SdStructure:
    """Structural matrices of the feedback array for a given steering phase.

    U accumulates phase-shifted inputs down the array (U[m, n] = e^{-j(m-n)phi}
    for m >= n), V = U - I carries the outputs back, and ``delay`` is the
    one-step shift satisfying U^{-1} = I - e^{-j*phi}*delay exactly.
    """

    U: np.ndarray
    V: np.ndarray
    delay: np.ndarray
    phi: float

    def U_inv(self) -> np.ndarray:
        M = self.U.shape[0]
        return np.eye(M) - np.exp(-1j * self.phi) * self.delay


def sd_structure(M: int, phi: float) -> SdStructure:
    """Build the U/V/delay matrices for an M-antenna array steered by phi."""
    if M < 1:
        raise ValueError("M must be >= 1")
    diff = np.subtract.outer(np.arange(M), np.arange(M))
    U = np.where(diff >= 0, np.exp(-1j * phi * diff), 0.0)
    return SdStructure(U=U, V=U - np.eye(M), delay=spatial_delay_matrix(M), phi=float(phi))


def sd_quantize(x: np.ndarray, bank: QuantizerBank, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Run snapshots through the feedback array; returns (y, r).

    ``x`` has shape (M,) or (M, T).  The recursion is strictly sequential in m
    (the physical feedback order) and vectorized across snapshots.  The outputs
    satisfy r = U x - V y to machine precision.
    """
    x = np.asarray(x, dtype=complex)
    M = x.shape[0]
    if len(bank) != M:
        raise ValueError(f"bank has {len(bank)} levels but x has {M} rows")
    y = np.empty_like(x)
    r = np.empty_like(x)
    fb = np.exp(-1j * phi)
    carried = np.zeros(x.shape[1:], dtype=complex)  # r_{m-1} - y_{m-1}
    for m in range(M):
        rm = x[m] + fb * carried
        am = bank.alpha[m]
        ym = am * (np.where(rm.real >= 0, 1.0, -1.0) + 1j * np.where(rm.imag >= 0, 1.0, -1.0))
        r[m] = rm
        y[m] = ym
        carried = rm - ym
    return y, r


def sd_effective_noise(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Shaped quantization noise y - x (= U^{-1} q exactly).

    Element m equals q_m - e^{-j*phi}*q_{m-1}, the high-pass-shaped error, when
    levels keep the per-quantizer gain at one.
    """
    return np.asarray(y) - np.asarray(x)


@dataclass(frozen=True)
class SdNoiseModel:
    """Per-antenna powers of the equivalent linear model.

    p_r = Pi @ p_x are the quantizer input powers, p_q = (pi/2-1)*p_r the
    effective noise powers, and R_q = diag(p_q) the (diagonal) noise
    covariance the analysis uses.
    """

    p_x: np.ndarray
    p_r: np.ndarray
    p_q: np.ndarray
    Pi: np.ndarray

    @property
    def R_q(self) -> np.ndarray:
        return np.diag(self.p_q)

    @property
    def sigma_qM2(self) -> float:
        """Noise power of the last antenna, the unshaped residual term."""
        return float(self.p_q[-1])

    @property
    def trace_Rq(self) -> float:
        return float(self.p_q.sum())


def noise_transfer_matrix(M: int) -> np.ndarray:
    """Lower-triangular Pi with entries (pi/2-1)^(m-n), mapping p_x to p_r."""
    diff = np.subtract.outer(np.arange(M), np.arange(M))
    return np.where(diff >= 0, NOISE_GAIN**np.maximum(diff, 0), 0.0)


def sd_linear_model(p_x: np.ndarray) -> SdNoiseModel:
    """Equivalent linear model powers for per-antenna input powers p_x."""
    p_x = np.asarray(p_x, dtype=float)
    if p_x.ndim != 1 or np.any(p_x <= 0):
        raise ValueError("p_x must be a 1-D array of positive powers")
    Pi = noise_transfer_matrix(p_x.shape[0])
    p_r = Pi @ p_x
    return SdNoiseModel(p_x=p_x, p_r=p_r, p_q=NOISE_GAIN * p_r, Pi=Pi)


def analytic_bank(model: SdNoiseModel) -> QuantizerBank:
    """Gain-one levels from the a-priori linear model (no data feedback)."""
    return alpha_gaussian(model.p_r)


def shaped_noise_covariance(model: SdNoiseModel, phi: float) -> np.ndarray:
    """Covariance U^{-1} diag(p_q) U^{-H} of the shaped noise y - x."""
    M = model.p_q.shape[0]
    Uinv = sd_structure(M, phi).U_inv()
    return (Uinv * model.p_q) @ Uinv.conj().T


def gamma_empirical(r: np.ndarray, y: np.ndarray, min_snapshots: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Per-antenna equivalent linear gain, mean(r_m y_m*)/mean(|r_m|^2).

    ``r`` and ``y`` have shape (M, T) with T >= min_snapshots.  Returns the
    real part together with the normalized imaginary residual, which should be
    at noise level for circularly symmetric input.
    """
    r = np.asarray(r)
    y = np.asarray(y)
    if r.shape != y.shape or r.ndim != 2:
        raise ValueError("r and y must be equal-shape (M, T) arrays")
    if r.shape[1] < min_snapshots:
        raise ValueError(f"need at least {min_snapshots} snapshots, got {r.shape[1]}")
    num = np.einsum("mt,mt->m", r, y.conj()) / r.shape[1]
    den = np.einsum("mt,mt->m", r, r.conj()).real / r.shape[1]
    g = num / den
    return g.real, np.abs(g.imag)


def calibrate_levels(x: np.ndarray, phi: float, iters: int = 4) -> QuantizerBank:
    """Validation-only empirical level calibration on a snapshot batch.

    Iterates the sample gain-one rule: run the loop, re-estimate each alpha_m
    from the observed quantizer inputs, repeat.  Production level-setting is
    the analytic route (:func:`sd_linear_model` + :func:`analytic_bank`).
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2:
        raise ValueError("x must be an (M, T) snapshot batch")
    p_x = (np.abs(x) ** 2).mean(axis=1)
    bank = analytic_bank(sd_linear_model(p_x))
    for _ in range(iters):
        _, r = sd_quantize(x, bank, phi)
        bank = alpha_empirical(r)
    return bank
