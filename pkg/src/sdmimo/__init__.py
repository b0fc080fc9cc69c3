"""Spatial one-bit sigma-delta (SD) quantization for massive-MIMO uplink arrays.

The package models a uniform linear array whose one-bit quantizers feed their
quantization error to the next antenna through a phase-shifted feedback path,
shaping the quantization noise away from a chosen angular sector.  It provides
the equivalent per-quantizer linear (Bussgang) model, analytic noise spectra
and spectral-efficiency formulas, and Monte Carlo machinery that cross-checks
every closed form by brute force.
"""

from .array_model import (
    ArrayGeometry,
    ChannelRealization,
    Scenario,
    crandn,
    draw_channel,
    rx_covariance_analytic,
    rx_covariance_from_doas,
    steering_matrix,
    steering_vector,
    synthesize_rx,
)
from .quantization import (
    QuantizerBank,
    alpha_empirical,
    alpha_gaussian,
    alpha_lloyd_max,
    arcsine_output_covariance,
    onebit_noise_covariance,
    quantize_one_bit,
)
from .sigma_delta import (
    SdNoiseModel,
    SdStructure,
    gamma_empirical,
    sd_effective_noise,
    sd_linear_model,
    sd_quantize,
    sd_structure,
    shaped_noise_covariance,
)
from .noise_spectrum import (
    SpectrumCurve,
    ZetaApprox,
    analytic_noise_covariance,
    density_on_grid,
    empirical_spectrum,
    fit_zeta,
    pq_by_quadrature,
    pq_onebit_analytic,
    pq_sigmadelta_analytic,
    rho_q,
    zeta_for_scenario,
)
from .receivers import (
    SEResult,
    combiner,
    g_phi,
    g_phi_discrete,
    phi_star,
    se_mrc_closed_form,
    se_simulated,
    se_zf,
)
from .chan_est import dft_pilots, ls_estimate, orthogonal_projector, quantized_training

__version__ = "0.1.0"
