"""Linear receivers and spectral efficiency under quantized front ends.

The achievable-rate lower bound treats everything except the desired term as
worst-case Gaussian noise:

    S_k = E[ log2(1 + p_k |w_k^H g_k|^2 / Omega_k) ],
    Omega_k = sum_{i != k} p_i |w_k^H g_i|^2 + sigma_n2 ||w_k||^2
              + w_k^H R_eff w_k,

with R_eff the effective quantization-noise covariance of the front end
(zero for infinite resolution, the arcsine form for one-bit, the shaped
diagonal model for sigma-delta).  The closed-form MRC expression and the
steering-phase objective G(phi) live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import array_model, chan_est, noise_spectrum, sigma_delta
from .array_model import ArrayGeometry, ChannelRealization, Scenario

ARCHITECTURES = ("infinite", "onebit", "sigma_delta")


@dataclass(frozen=True)
class SEResult:
    """Per-user and sum spectral efficiency with Monte Carlo error bars."""

    per_user: np.ndarray
    stderr: np.ndarray
    trials: int
    sum_stderr: float

    @property
    def se_sum(self) -> float:
        return float(self.per_user.sum())


def combiner(kind: str, G: np.ndarray) -> np.ndarray:
    """Combining matrix W: the channel itself for MRC, its pseudoinverse-style
    zero-forcer W = G (G^H G)^{-1} for ZF."""
    if kind == "mrc":
        return G.copy()
    if kind == "zf":
        s = np.linalg.svd(G, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            cond = np.inf if s[-1] == 0 else s[0] / s[-1]
            raise ValueError(f"G is rank deficient for ZF (condition number {cond:.3e})")
        GG = G.conj().T @ G
        return G @ np.linalg.inv(GG)
    raise ValueError(f"kind must be 'mrc' or 'zf', got {kind!r}")


def effective_noise_covariance(
    arch: str, scn: Scenario, geom: ArrayGeometry, doas: ChannelRealization | None = None
) -> np.ndarray:
    """Front-end quantization-noise covariance entering Omega."""
    if arch == "infinite":
        return np.zeros((geom.M, geom.M))
    if arch == "onebit":
        return noise_spectrum.analytic_noise_covariance("onebit", scn, geom, doas)
    if arch == "sigma_delta":
        return noise_spectrum.analytic_noise_covariance("sigma_delta", scn, geom, doas)
    raise ValueError(f"arch must be one of {ARCHITECTURES}, got {arch!r}")


def _sinr_per_user(W, G, scn: Scenario, R_eff) -> np.ndarray:
    WG = W.conj().T @ G  # (K, K)
    p = scn.p
    desired = p * np.abs(np.diag(WG)) ** 2
    cross = (np.abs(WG) ** 2) * p[None, :]
    interference = cross.sum(axis=1) - np.diag(cross)
    noise = scn.sigma_n2 * (np.abs(W) ** 2).sum(axis=0)
    quant = np.einsum("mk,mn,nk->k", W.conj(), R_eff, W).real
    return desired / (interference + noise + quant)


def se_simulated(
    kind: str,
    scn: Scenario,
    geom: ArrayGeometry,
    arch: str,
    trials: int,
    seed,
    csi: str = "perfect",
    eta: int | None = None,
    doas: ChannelRealization | None = None,
    redraw_doas: bool = False,
) -> SEResult:
    """Monte Carlo spectral efficiency over channel draws.

    Per trial the fast fading is redrawn over a DoA set that is fixed once
    from the seed (pass ``redraw_doas=True`` to redraw the DoAs each trial,
    or ``doas`` to pin them).  The quantization term in Omega uses the
    analytic covariance for the scenario, not a per-realization estimate.

    With ``csi="ls"`` the combiner is built from a pilot-based least-squares
    channel estimate (quantized through the same front end) while the SINR is
    still evaluated against the true channel.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if kind not in ("mrc", "zf"):
        raise ValueError(f"kind must be 'mrc' or 'zf', got {kind!r}")
    if csi not in ("perfect", "ls"):
        raise ValueError(f"csi must be 'perfect' or 'ls', got {csi!r}")
    if kind == "zf" and geom.M <= scn.K:
        raise ValueError(f"ZF needs M > K, got M={geom.M}, K={scn.K}")

    master = np.random.SeedSequence(seed)
    base = doas if doas is not None else array_model.draw_channel(
        scn, geom, np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0xD0A,)))
    )
    R_eff = effective_noise_covariance(arch, scn, geom, base)
    eta = scn.K if eta is None else eta
    Phi = P_A = None
    if csi == "ls":
        if not base.shared_doas:
            raise ValueError("LS estimation needs the shared steering subspace (shared_doas=True)")
        Phi = chan_est.dft_pilots(eta, scn.K)
        P_A = chan_est.orthogonal_projector(base.shared_A)

    se = np.empty((trials, scn.K))
    skipped = 0
    for t in range(trials):
        chan_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t, 0)))
        aux_rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t, 1)))
        if redraw_doas:
            real = array_model.draw_channel(scn, geom, chan_rng)
        else:
            real = array_model.redraw_fading(base, scn, chan_rng)
        if csi == "perfect":
            G_rx = real.G
        else:
            Y = chan_est.quantized_training(scn, geom, arch, Phi, aux_rng, realization=real)
            proj = chan_est.orthogonal_projector(real.shared_A) if redraw_doas else P_A
            G_rx = chan_est.ls_estimate(Y, real.shared_A, Phi, scn.p0, eta, projector=proj)
        try:
            W = combiner(kind, G_rx)
        except ValueError:
            skipped += 1
            se[t] = np.nan
            continue
        se[t] = np.log2(1.0 + _sinr_per_user(W, real.G, scn, R_eff))

    if skipped > 0.01 * trials:
        raise RuntimeError(f"ZF rank failures in {skipped}/{trials} trials (> 1%)")
    if skipped:
        se = se[~np.isnan(se).any(axis=1)]
    n = se.shape[0]
    per_user = se.mean(axis=0)
    stderr = se.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(scn.K)
    sum_std = se.sum(axis=1).std(ddof=1) / np.sqrt(n) if n > 1 else 0.0
    return SEResult(per_user=per_user, stderr=stderr, trials=n, sum_stderr=float(sum_std))


def se_zf(
    scn: Scenario,
    geom: ArrayGeometry,
    arch: str,
    trials: int,
    seed,
    csi: str = "perfect",
    doas: ChannelRealization | None = None,
) -> SEResult:
    """ZF spectral efficiency.

    With perfect CSI the interference nulls exactly and the per-user SINR
    reduces to p_k / (sigma_n2 ||w_k||^2 + [W^H R_eff W]_kk); the generic
    evaluation computes the same numbers and also covers imperfect CSI.
    """
    return se_simulated("zf", scn, geom, arch, trials, seed, csi=csi, doas=doas)


def se_mrc_closed_form(
    scn: Scenario,
    geom: ArrayGeometry,
    real: ChannelRealization,
    noise: sigma_delta.SdNoiseModel | None = None,
) -> np.ndarray:
    """Closed-form MRC spectral efficiency conditioned on the DoA set.

    Evaluates, per user, log2(1 + signal/denominator) with
      signal        p_k beta_k (|Tr S_kk|^2 + Tr S_kk^2),   S_ik = A_i^H A_k / L
      interference  sum_{i != k} p_i beta_i Tr(S_ik S_ik^H)
      thermal       sigma_n2 Tr S_kk
      quantization  (4/L)(Tr R_q - s2_qM) sum_l sin^2((phi - w_kl)/2) + s2_qM

    where w_kl = 2*pi*(d/lambda)*sin(theta_kl).  Pass ``noise=None`` for the
    unquantized approximation (quantization term dropped).
    """
    K, L = scn.K, scn.L
    phi = scn.steering_phase(geom)
    pb = scn.p * scn.beta  # = p0 under power control
    S = np.empty((K, K), dtype=object)
    for i in range(K):
        for k in range(K):
            S[i, k] = real.A[i].conj().T @ real.A[k] / L
    out = np.empty(K)
    for k in range(K):
        Skk = S[k, k]
        tr = np.trace(Skk)
        signal = pb[k] * (abs(tr) ** 2 + np.trace(Skk @ Skk).real)
        interference = sum(
            pb[i] * np.trace(S[i, k] @ S[i, k].conj().T).real for i in range(K) if i != k
        )
        den = interference + scn.sigma_n2 * tr.real
        if noise is not None:
            w_kl = 2 * np.pi * geom.d_over_lambda * np.sin(real.theta[k])
            shaped = np.sum(np.sin((phi - w_kl) / 2.0) ** 2)
            den += 4 / L * (noise.trace_Rq - noise.sigma_qM2) * shaped + noise.sigma_qM2
        out[k] = np.log2(1.0 + signal / den)
    return out


def g_phi(scn: Scenario, geom: ArrayGeometry, phi: float) -> float:
    """Sector-average shaped-noise factor for steering phase phi.

    G(phi) = 1/2 + (1/(4*pi)) * (d/lambda)^{-1} * (b0 sin(phi) - b1 cos(phi))
             / (delta2 - delta1),
    the continuous-path limit of the per-path average of
    sin^2((phi - 2*pi*(d/lambda)*u)/2) for u uniform over the sector.
    """
    d1, d2 = scn.sector_bounds()
    if d2 <= d1:
        raise ValueError("sector bounds must satisfy delta2 > delta1")
    c = 2 * np.pi * geom.d_over_lambda
    b0 = np.cos(c * d2) - np.cos(c * d1)
    b1 = np.sin(c * d2) - np.sin(c * d1)
    return float(0.5 + (b0 * np.sin(phi) - b1 * np.cos(phi)) / (2 * c * (d2 - d1)))


def g_phi_discrete(u: np.ndarray, geom: ArrayGeometry, phi: float) -> float:
    """Finite-path average (1/L) sum_l sin^2((phi - 2*pi*(d/lambda)*u_l)/2)."""
    u = np.asarray(u, dtype=float)
    return float(np.mean(np.sin((phi - 2 * np.pi * geom.d_over_lambda * u) / 2.0) ** 2))


def phi_star(scn: Scenario, geom: ArrayGeometry, grid_points: int = 720) -> float:
    """Steering phase minimizing G(phi).

    A symmetric sector returns exactly 0; otherwise the closed-form minimizer
    -atan2(b0, b1), verified to beat a dense grid before returning.
    """
    d1, d2 = scn.sector_bounds()
    if abs(d1 + d2) < 1e-12:
        return 0.0
    c = 2 * np.pi * geom.d_over_lambda
    b0 = np.cos(c * d2) - np.cos(c * d1)
    b1 = np.sin(c * d2) - np.sin(c * d1)
    best = float(-np.arctan2(b0, b1))
    grid = np.linspace(-np.pi, np.pi, grid_points, endpoint=False)
    g_grid = 0.5 + (b0 * np.sin(grid) - b1 * np.cos(grid)) / (2 * c * (d2 - d1))
    assert g_phi(scn, geom, best) <= g_grid.min() + 1e-12, "closed-form minimizer lost to the grid"
    return best
