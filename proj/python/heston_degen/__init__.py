"""Python access to the degenerate Heston solver and its verification tools."""

from ._core import (
    ConfigError,
    ModelParams,
    OracleError,
    RunConfig,
    ValidityReport,
    WeightParams,
    __version__,
    beta_strict_bound,
    black_scholes,
    black_scholes_heat,
    default_weights,
    heat_convolve,
    imbedding_ratios,
    load_config,
    parse_config,
    price_mc,
    price_pde,
    price_reference,
    run_cli,
    validate,
)

__all__ = [
    "ConfigError",
    "ModelParams",
    "OracleError",
    "RunConfig",
    "ValidityReport",
    "WeightParams",
    "__version__",
    "beta_strict_bound",
    "black_scholes",
    "black_scholes_heat",
    "default_weights",
    "heat_convolve",
    "imbedding_ratios",
    "load_config",
    "parse_config",
    "price_mc",
    "price_pde",
    "price_reference",
    "run_cli",
    "validate",
]
