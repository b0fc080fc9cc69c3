"""Per-antenna one-bit quantization, level-setting rules, and the arcsine law.

A one-bit quantizer with output level alpha maps a complex sample to
alpha*sign(Re) + j*alpha*sign(Im); its entire design freedom is the choice of
alpha per antenna.  Three rules are provided:

  - ``alpha_gaussian``: makes the equivalent linear gain (Bussgang gain) equal
    to one for Gaussian input, so output = input + uncorrelated noise.
  - ``alpha_lloyd_max``: minimizes the input/output MSE; the error is then
    uncorrelated with the *output* but not with the input.
  - ``alpha_empirical``: the sample version of the gain-one optimum, usable on
    measured data of any distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# the argument of arcsin may spill past [-1, 1] by rounding only
_ASIN_CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class QuantizerBank:
    """Per-antenna output levels; real and imaginary rails share alpha_m."""

    alpha: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=float))
        if self.alpha.ndim != 1 or np.any(self.alpha <= 0):
            raise ValueError("alpha must be a 1-D array of positive levels")

    def __len__(self) -> int:
        return self.alpha.shape[0]


def _hard_sign(v: np.ndarray) -> np.ndarray:
    # sign(0) := +1 for determinism (a measure-zero event for continuous input)
    return np.where(v >= 0, 1.0, -1.0)


def quantize_one_bit(x: np.ndarray, bank: QuantizerBank) -> np.ndarray:
    """One-bit quantize each antenna: y_m = alpha_m*(sign(Re x_m) + j sign(Im x_m)).

    ``x`` has shape (M,) or (M, T); the bank must hold M levels.
    """
    x = np.asarray(x)
    if x.shape[0] != len(bank):
        raise ValueError(f"bank has {len(bank)} levels but x has {x.shape[0]} rows")
    a = bank.alpha if x.ndim == 1 else bank.alpha[:, None]
    return a * (_hard_sign(x.real) + 1j * _hard_sign(x.imag))


def alpha_gaussian(p_r: np.ndarray) -> QuantizerBank:
    """Gain-one levels for Gaussian input power p_r: alpha = sqrt(pi*p_r)/2."""
    p_r = np.asarray(p_r, dtype=float)
    if np.any(p_r <= 0):
        raise ValueError("input powers must be positive")
    return QuantizerBank(np.sqrt(np.pi * p_r) / 2.0)


def alpha_lloyd_max(p_r: np.ndarray) -> QuantizerBank:
    """MSE-optimal levels for Gaussian input power p_r: alpha = E|Re r| = sqrt(p_r/pi)."""
    p_r = np.asarray(p_r, dtype=float)
    if np.any(p_r <= 0):
        raise ValueError("input powers must be positive")
    return QuantizerBank(np.sqrt(p_r / np.pi))


def alpha_empirical(samples: np.ndarray) -> QuantizerBank:
    """Sample estimate of the gain-one level, alpha_m = mean|Re r_m|^2 / mean|Re r_m|.

    ``samples`` has shape (M, N); at least 10^4 samples per antenna are
    recommended for a stable estimate.
    """
    samples = np.asarray(samples)
    if samples.ndim != 2 or samples.shape[1] == 0:
        raise ValueError("samples must be a nonempty (M, N) array")
    re = np.abs(samples.real)
    denom = re.mean(axis=1)
    if np.any(denom == 0):
        raise ValueError("degenerate samples: an antenna has mean |Re r| = 0")
    return QuantizerBank((re**2).mean(axis=1) / denom)


def arcsine_output_covariance(R_x: np.ndarray) -> np.ndarray:
    """Exact output covariance of one-bit-quantized jointly Gaussian input.

    Valid for levels alpha_m = sqrt(pi*E|x_m|^2)/2.  The arcsine acts
    elementwise, separately on the real and imaginary parts of the normalized
    input covariance; the diagonal comes out as (pi/2)*diag(R_x).
    """
    R_x = np.asarray(R_x)
    d = np.diag(R_x).real
    if np.any(d <= 0):
        raise ValueError("R_x must have a strictly positive diagonal")
    scale = np.sqrt(np.outer(d, d))
    ups_r = R_x.real / scale
    ups_i = R_x.imag / scale
    for ups in (ups_r, ups_i):
        over = np.max(np.abs(ups)) - 1.0
        if over > _ASIN_CLAMP_TOL:
            raise ValueError(f"normalized covariance exceeds 1 by {over:.3e}; R_x is not PSD")
    ups_r = np.clip(ups_r, -1.0, 1.0)
    ups_i = np.clip(ups_i, -1.0, 1.0)
    return scale * (np.arcsin(ups_r) + 1j * np.arcsin(ups_i))


def onebit_noise_covariance(R_x: np.ndarray) -> np.ndarray:
    """Quantization-noise covariance R_y - R_x of the standard one-bit array.

    Exact for Gaussian input with gain-one levels, where y = x + q and q is
    uncorrelated with x.
    """
    return arcsine_output_covariance(R_x) - np.asarray(R_x)
