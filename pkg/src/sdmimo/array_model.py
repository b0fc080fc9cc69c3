"""ULA geometry, physical multipath channels, and unquantized array snapshots.

Conventions used throughout the package:
  - Complex Gaussian CN(0, s2) splits its variance evenly, s2/2 per real rail.
  - Spatial frequency u = sin(theta); steering entry m is exp(-j*2*pi*(d/lambda)*u*m).
  - Per-user transmit power is p_k = p0/beta_k (statistics-aware power control),
    so every user arrives at the array with average power p0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: antenna count and normalized element spacing."""

    M: int
    d_over_lambda: float

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"antenna count M must be >= 1, got {self.M}")
        if self.d_over_lambda <= 0:
            raise ValueError(f"d_over_lambda must be > 0, got {self.d_over_lambda}")


@dataclass
class Scenario:
    """Multi-user uplink scenario.

    Angles are radians.  ``theta0`` is the sector center and ``Theta`` the full
    angular spread, so directions of arrival lie in theta0 + [-Theta/2, Theta/2].
    ``phi`` is the sigma-delta steering phase; leave it None to use the default
    2*pi*(d/lambda)*sin(theta0) via :meth:`steering_phase`.

    ``doa_domain`` selects how paths are drawn: "angle" draws theta uniformly
    over the sector (the physical convention), "sine" draws u = sin(theta)
    uniformly over [sin(theta0-Theta/2), sin(theta0+Theta/2)], which is the
    ensemble the analytic covariance integral describes.
    """

    K: int
    L: int
    theta0: float
    Theta: float
    p0: float
    sigma_n2: float
    beta: np.ndarray | None = None
    phi: float | None = None
    shared_doas: bool = True
    doa_domain: str = "angle"

    def __post_init__(self):
        if self.K < 1 or self.L < 1:
            raise ValueError(f"K and L must be >= 1, got K={self.K}, L={self.L}")
        if self.Theta <= 0:
            raise ValueError(f"angular spread Theta must be > 0, got {self.Theta}")
        if self.p0 <= 0 or self.sigma_n2 <= 0:
            raise ValueError("p0 and sigma_n2 must be > 0")
        if self.doa_domain not in ("angle", "sine"):
            raise ValueError(f"doa_domain must be 'angle' or 'sine', got {self.doa_domain!r}")
        if self.beta is None:
            self.beta = np.ones(self.K)
        else:
            self.beta = np.asarray(self.beta, dtype=float)
            if self.beta.shape != (self.K,) or np.any(self.beta <= 0):
                raise ValueError("beta must hold K positive gains")

    @property
    def p(self) -> np.ndarray:
        """Per-user transmit powers p_k = p0/beta_k."""
        return self.p0 / self.beta

    @property
    def sum_rx_power(self) -> float:
        """Total received signal power per antenna, sum_k p_k*beta_k = K*p0."""
        return self.K * self.p0

    def sector_bounds(self) -> tuple[float, float]:
        """(delta1, delta2) = sin of the sector edges."""
        return (np.sin(self.theta0 - self.Theta / 2), np.sin(self.theta0 + self.Theta / 2))

    def steering_phase(self, geom: ArrayGeometry) -> float:
        """phi if set, else the sector-center default 2*pi*(d/lambda)*sin(theta0)."""
        if self.phi is not None:
            return float(self.phi)
        return float(2 * np.pi * geom.d_over_lambda * np.sin(self.theta0))


@dataclass
class ChannelRealization:
    """One Monte Carlo channel draw.

    A has shape (K, M, L) with A[k] the steering matrix of user k (identical
    slices when DoAs are shared), theta holds the per-user DoA angles (K, L),
    h the fast fading (K, L), and G the assembled channel matrix (M, K) with
    g_k = sqrt(beta_k/L) * A_k @ h_k.
    """

    A: np.ndarray
    theta: np.ndarray
    h: np.ndarray
    G: np.ndarray
    shared_doas: bool = True

    @property
    def shared_A(self) -> np.ndarray:
        """The common (M, L) steering matrix; only valid when DoAs are shared."""
        if not self.shared_doas:
            raise ValueError("DoAs are not shared across users")
        return self.A[0]


def steering_vector(geom: ArrayGeometry, u: float) -> np.ndarray:
    """Steering vector for spatial frequency u = sin(theta), |u| <= 1.

    Entry m (0-based) is exp(-j*2*pi*(d/lambda)*u*m); entry 0 is always 1.
    """
    if abs(u) > 1:
        raise ValueError(f"|u| must be <= 1 (u is a sine of a real angle), got {u}")
    return np.exp(-2j * np.pi * geom.d_over_lambda * u * np.arange(geom.M))


def steering_matrix(geom: ArrayGeometry, u: np.ndarray) -> np.ndarray:
    """Stack of steering vectors, shape (M, len(u))."""
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1):
        raise ValueError("all |u| must be <= 1")
    return np.exp(-2j * np.pi * geom.d_over_lambda * np.outer(np.arange(geom.M), u))


def _draw_doas(scn: Scenario, rng: np.random.Generator, size) -> np.ndarray:
    if scn.doa_domain == "sine":
        d1, d2 = scn.sector_bounds()
        return np.arcsin(rng.uniform(d1, d2, size))
    return rng.uniform(scn.theta0 - scn.Theta / 2, scn.theta0 + scn.Theta / 2, size)


def draw_doa_angles(scn: Scenario, seed) -> np.ndarray:
    """Per-user DoA angle sets (K, L), shared rows when scn.shared_doas."""
    rng = _as_rng(seed)
    if scn.shared_doas:
        return np.broadcast_to(_draw_doas(scn, rng, scn.L), (scn.K, scn.L)).copy()
    return _draw_doas(scn, rng, (scn.K, scn.L))


def realization_from_angles(scn: Scenario, geom: ArrayGeometry, theta: np.ndarray, seed) -> ChannelRealization:
    """Channel realization with pinned DoA angles and fresh fast fading."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (scn.K, scn.L):
        raise ValueError(f"theta must have shape (K, L)=({scn.K}, {scn.L}), got {theta.shape}")
    rng = _as_rng(seed)
    A = np.stack([steering_matrix(geom, np.sin(theta[k])) for k in range(scn.K)])
    h = crandn(rng, (scn.K, scn.L))
    G = np.empty((geom.M, scn.K), dtype=complex)
    for k in range(scn.K):
        G[:, k] = np.sqrt(scn.beta[k] / scn.L) * (A[k] @ h[k])
    return ChannelRealization(A=A, theta=theta, h=h, G=G, shared_doas=scn.shared_doas)


def draw_channel(scn: Scenario, geom: ArrayGeometry, seed) -> ChannelRealization:
    """Draw one channel realization; a fixed seed fixes the draw exactly.

    DoAs are i.i.d. uniform over the sector (shared across users when
    scn.shared_doas), fast fading is unit-variance CSCG, and column k of G is
    sqrt(beta_k/L) * A_k @ h_k.
    """
    rng = _as_rng(seed)
    K, L, M = scn.K, scn.L, geom.M
    if scn.shared_doas:
        theta = np.broadcast_to(_draw_doas(scn, rng, L), (K, L)).copy()
        A = np.broadcast_to(steering_matrix(geom, np.sin(theta[0])), (K, M, L)).copy()
    else:
        theta = _draw_doas(scn, rng, (K, L))
        A = np.stack([steering_matrix(geom, np.sin(theta[k])) for k in range(K)])
    h = crandn(rng, (K, L))
    G = np.empty((M, K), dtype=complex)
    for k in range(K):
        G[:, k] = np.sqrt(scn.beta[k] / L) * (A[k] @ h[k])
    return ChannelRealization(A=A, theta=theta, h=h, G=G, shared_doas=scn.shared_doas)


def redraw_fading(real: ChannelRealization, scn: Scenario, rng: np.random.Generator) -> ChannelRealization:
    """Fresh fast fading over a fixed DoA set (one coherence-block redraw)."""
    h = crandn(rng, (scn.K, scn.L))
    G = np.empty_like(real.G)
    for k in range(scn.K):
        G[:, k] = np.sqrt(scn.beta[k] / scn.L) * (real.A[k] @ h[k])
    return ChannelRealization(A=real.A, theta=real.theta, h=h, G=G, shared_doas=real.shared_doas)


def draw_symbols(scn: Scenario, rng: np.random.Generator, n: int, codebook: str = "gaussian") -> np.ndarray:
    """Unit-power symbol vectors, shape (K, n).  QPSK exists for debugging only."""
    if codebook == "gaussian":
        return crandn(rng, (scn.K, n))
    if codebook == "qpsk":
        bits = rng.integers(0, 2, (2, scn.K, n)) * 2 - 1
        return (bits[0] + 1j * bits[1]) / np.sqrt(2.0)
    raise ValueError(f"unknown codebook {codebook!r}")


def synthesize_rx(real: ChannelRealization, scn: Scenario, s: np.ndarray, seed) -> np.ndarray:
    """Unquantized received snapshot(s) x = G P^(1/2) s + n.

    ``s`` has shape (K,) or (K, T); the result matches with M rows.  Receiver
    noise is CSCG with per-antenna power sigma_n2.
    """
    s = np.asarray(s)
    if s.shape[0] != scn.K:
        raise ValueError(f"s must have K={scn.K} rows, got shape {s.shape}")
    rng = _as_rng(seed)
    amp = np.sqrt(scn.p)
    x = real.G @ (amp[:, None] * s if s.ndim == 2 else amp * s)
    n = np.sqrt(scn.sigma_n2) * crandn(rng, x.shape)
    return x + n


def rx_covariance_analytic(scn: Scenario, geom: ArrayGeometry, nodes: int = 256) -> np.ndarray:
    """Ensemble covariance of x for u uniform over the sector.

    R_x = sum_k p_k beta_k * (1/(d2-d1)) * int a(u) a(u)^H du + sigma_n2 * I.
    A sector symmetric about broadside uses the closed sinc form; any other
    sector falls back to Gauss-Legendre quadrature with ``nodes`` points.
    """
    d1, d2 = scn.sector_bounds()
    if d2 <= d1:
        raise ValueError("empty sector: sin(theta0+Theta/2) <= sin(theta0-Theta/2)")
    M = geom.M
    total = scn.sum_rx_power
    if abs(d1 + d2) < 1e-12:
        # broadside: (1/(2*delta)) * int_{-delta}^{delta} e^{-jc(m-n)u} du = sinc(c*(m-n)*delta)
        delta = d2
        c = 2 * np.pi * geom.d_over_lambda
        diff = np.subtract.outer(np.arange(M), np.arange(M))
        R = total * np.sinc(c * diff * delta / np.pi) + 0j
    else:
        x, w = np.polynomial.legendre.leggauss(nodes)
        u = 0.5 * (d2 - d1) * x + 0.5 * (d1 + d2)
        w = w / 2.0  # Jacobian and the 1/(d2-d1) sector average cancel to w/2
        Au = steering_matrix(geom, u)
        R = total * ((Au * w) @ Au.conj().T)
    return R + scn.sigma_n2 * np.eye(M)


def rx_covariance_from_doas(real: ChannelRealization, scn: Scenario, geom: ArrayGeometry) -> np.ndarray:
    """Covariance of x conditioned on the DoA set (fading and symbols averaged).

    R_x|A = sum_k p_k beta_k (1/L) A_k A_k^H + sigma_n2 I.  The diagonal equals
    K*p0 + sigma_n2 for any DoA set because steering entries are unit modulus.
    """
    M = geom.M
    R = np.zeros((M, M), dtype=complex)
    if real.shared_doas:
        A = real.shared_A
        R = scn.sum_rx_power / scn.L * (A @ A.conj().T)
    else:
        pb = scn.p * scn.beta
        for k in range(scn.K):
            R += pb[k] / scn.L * (real.A[k] @ real.A[k].conj().T)
    return R + scn.sigma_n2 * np.eye(M)
