"""Pilot-based least-squares channel estimation through quantized front ends.

Training sends eta orthogonal DFT pilot columns at amplitude sqrt(p0); the
received block Y = sqrt(p0) G Phi^T + N passes through the selected front end
and the estimate is

    G_hat = (1/(eta*sqrt(p0))) * P_A * Y * conj(Phi),

with P_A = A A^+ the orthogonal projection onto the steering subspace.
"""

from __future__ import annotations

import numpy as np

from . import array_model, quantization, sigma_delta
from .array_model import ArrayGeometry, ChannelRealization, Scenario

_PINV_RCOND = 1e-10  # singular values below rcond * s_max are treated as zero


def dft_pilots(eta: int, K: int) -> np.ndarray:
    """K columns of the eta-point DFT matrix; satisfies Phi^H Phi = eta * I_K."""
    if eta < K:
        raise ValueError(f"training length eta={eta} must be >= K={K}")
    n = np.arange(eta)
    return np.exp(-2j * np.pi * np.outer(n, np.arange(K)) / eta)


def orthogonal_projector(A: np.ndarray, rcond: float = _PINV_RCOND) -> np.ndarray:
    """P_A = A A^+, idempotent and Hermitian projection onto span(A)."""
    return A @ np.linalg.pinv(A, rcond=rcond)


def ls_estimate(
    Y: np.ndarray,
    A: np.ndarray,
    Phi: np.ndarray,
    p0: float,
    eta: int,
    projector: np.ndarray | None = None,
) -> np.ndarray:
    """Least-squares channel estimate from a received training block.

    Pass ``projector`` to reuse a precomputed P_A across trials.
    """
    P_A = orthogonal_projector(A) if projector is None else projector
    return (P_A @ Y @ Phi.conj()) / (eta * np.sqrt(p0))


def training_input_power(scn: Scenario) -> float:
    """Per-antenna power of the unquantized training block.

    Pilots go out at amplitude sqrt(p0) for every user (unlike data, which is
    power controlled), so the received power is p0 * sum_k beta_k + sigma_n2.
    """
    return float(scn.p0 * scn.beta.sum() + scn.sigma_n2)


def quantized_training(
    scn: Scenario,
    geom: ArrayGeometry,
    arch: str,
    Phi: np.ndarray,
    seed,
    realization: ChannelRealization | None = None,
) -> np.ndarray:
    """Received training block through the selected front end.

    The channel (when not supplied) and the training noise are drawn from the
    seed in a fixed order, so the same seed produces identical G and N for
    every ``arch`` -- paired comparisons across front ends come for free.
    Sigma-delta levels are set analytically from the training-phase power,
    which differs from the data phase when power control is uneven.
    """
    if arch not in ("infinite", "onebit", "sigma_delta"):
        raise ValueError(f"arch must be infinite|onebit|sigma_delta, got {arch!r}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    real = array_model.draw_channel(scn, geom, rng) if realization is None else realization
    eta = Phi.shape[0]
    N = np.sqrt(scn.sigma_n2) * array_model.crandn(rng, (geom.M, eta))
    Y = np.sqrt(scn.p0) * real.G @ Phi.T + N
    if arch == "infinite":
        return Y
    p_train = np.full(geom.M, training_input_power(scn))
    if arch == "onebit":
        return quantization.quantize_one_bit(Y, quantization.alpha_gaussian(p_train))
    model = sigma_delta.sd_linear_model(p_train)
    bank = sigma_delta.analytic_bank(model)
    y, _ = sigma_delta.sd_quantize(Y, bank, scn.steering_phase(geom))
    return y
