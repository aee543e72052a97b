"""Time-frequency toggle bootstrap for stationary time series."""
from .engine import (
    BootstrapDraw,
    SchemeConfig,
    TFTBootstrap,
    diagnose_meta_assumptions,
    draw_rng,
    resample_lb,
    resample_nswb,
    resample_rb,
    resample_surrogate,
    resample_wb,
    tft_bootstrap,
    with_bootstrap_mean,
)
from .inference import (
    changepoint_bootstrap_test,
    cusum_statistic,
    estimate_changepoint,
    rho_hat,
    sup_brownian_bridge_cdf,
    unit_root_bootstrap_test,
    unit_root_statistics,
    weighted_cusum,
)
from .series_core import (
    FourierCoefficients,
    extend_coefficients,
    forward_coefficients,
    inverse_transform,
    partial_sum_path,
    periodogram,
    sample_autocovariance,
)
from .spectral import (
    Kernel,
    SpectralEstimate,
    bootstrap_long_run_variance,
    estimate_spectral_density,
    flat_top_long_run_variance,
    lattice_weights,
    wrapped_kernel,
)

__version__ = "0.1.0"
