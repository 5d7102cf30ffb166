"""Barrier-style terminal payoffs under exponential Levy models.

Exact Fourier prices, closed forms in symmetric markets, first-order
corrections near symmetry, power conjugation for skewed markets, NIG
calibration and a Monte Carlo oracle.
"""

from .calibration import NIGFit, ReturnsSeries, esscher_transform, fit_nig_mle, load_returns
from .fourier import (
    ContourSpec,
    MarketSpec,
    PriceResult,
    atm_implied_vol,
    bs_call,
    bs_digital_call,
    bs_implied_vol,
    price_asset_digital_fourier,
    price_call_lewis,
    price_digital_call_fourier,
)
from .levy_core import (
    LevyModel,
    cumulant,
    cumulant_beta_derivative,
    is_symmetric,
    levy_density,
    martingale_gap,
    symmetry_beta,
)
from .montecarlo import mc_price, sample_terminal, verify_conjugation
from .nig import NIGParams, nig_density
from .payoffs import IndicatorAbove, IndicatorBelow, PowerIndicator
from .power import (
    conjugate_price,
    direct_price,
    power_drift,
    price_down_and_in_power,
    surrogate_model,
)
from .shortcut import (
    ApproxConfig,
    SensitivityPair,
    approx_digital,
    approx_grid,
    asset_or_nothing_symmetric,
    digital_symmetric,
    sensitivities,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxConfig", "ContourSpec", "IndicatorAbove", "IndicatorBelow", "LevyModel",
    "MarketSpec", "NIGFit", "NIGParams", "PowerIndicator", "PriceResult", "ReturnsSeries",
    "SensitivityPair", "approx_digital", "approx_grid", "asset_or_nothing_symmetric",
    "atm_implied_vol", "bs_call", "bs_digital_call", "bs_implied_vol", "conjugate_price",
    "cumulant", "cumulant_beta_derivative", "digital_symmetric", "direct_price",
    "esscher_transform", "fit_nig_mle", "is_symmetric", "levy_density", "load_returns",
    "martingale_gap", "mc_price", "nig_density", "power_drift", "price_asset_digital_fourier",
    "price_call_lewis", "price_digital_call_fourier", "price_down_and_in_power",
    "sample_terminal", "sensitivities", "surrogate_model", "symmetry_beta", "verify_conjugation",
]
