"""percolab: crossing times on weighted grids, noise sensitivity, and
moderate-deviation diagnostics, with exact small-instance oracles."""

from .grid import (
    GridSpec,
    ParameterError,
    WeightConfig,
    config_from_bits,
    edge_count,
    flip_edge,
    sample_config,
)
from .crossing import (
    CrossingResult,
    brute_force_crossing,
    crossing_time,
    enumerate_crossing_paths,
    geodesic_census,
    tau,
    tau_star,
)
from .functionals import RECT_CROSSING, TAU, TAU_STAR, TRIBES, Functional, is_pivotal
from .noise import (
    CapacityError,
    NoiseEstimate,
    bks_statistic,
    estimate_influence,
    estimate_noise_covariance,
    exact_influences,
    resample,
    truth_table,
    walsh_coefficients,
    walsh_noise_covariance,
)
from .tribes import (
    DomainError,
    TribesSpec,
    binomial_pmf,
    binomial_pmf_asymptotic,
    binomial_sf,
    binomial_tail_asymptotic,
    s_quantile_predictor,
    tribes_bks_exact,
    tribes_cdf_exact,
    tribes_influence_exact,
    tribes_quantile_exact,
    tribes_value,
)
from .mdev import (
    chunk_intervals,
    chunk_sandwich_check,
    d_value,
    empirical_quantile,
    gaussian_tail,
    predict_quantiles,
)
from .rng import substream, substream_seed

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "1.0.0"
