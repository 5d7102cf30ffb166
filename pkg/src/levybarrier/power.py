"""Power conjugation for asymmetric markets.

For a tilted jump measure exp(beta y) Pi_0(dy) and any payoff f,

    E f(S_T) = E[ (S_T / (S0 e^{a T}))^{-2 beta} f(S0^2 e^{2 a T} / S_T) ],

with power drift a = -kappa(-2 beta) / (-2 beta), i.e. -psi(2 beta i)/(2 beta).
The surrogate S_T^{-2 beta} is driven by a symmetric (beta = -1/2) Levy
process, which is what lets symmetric shortcuts price power payoffs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import MomentDivergence, ParameterError, StripViolation, UnsupportedVariant
from .fourier import (
    ContourSpec,
    MarketSpec,
    PriceResult,
    _check_market,
    atm_implied_vol,
    exp_weighted_tail,
    price_digital_call_fourier,
)
from .levy_core import NIG, LevyModel, levy_density
from .montecarlo import sample_terminal
from .payoffs import IndicatorAbove, IndicatorBelow, PowerIndicator
from .shortcut import digital_symmetric

REPRODUCTION = "reproduction"
RIGOROUS = "rigorous"


@dataclass(frozen=True)
class ConjugationSpec:
    beta: float
    power_drift: float
    exponent: float


def _require_nig(model: LevyModel):
    if model.variant != NIG:
        raise UnsupportedVariant("power conjugation needs a tilted jump measure (NIG)")


def power_drift(model: LevyModel) -> float:
    """-psi(2 beta i)/(2 beta) for beta != 0, the NIG drift mu for beta = 0."""
    _require_nig(model)
    beta = model.nig.beta
    if beta == 0.0:
        return model.nig.mu
    p = -2.0 * beta
    try:
        k = model.kappa(p)
    except StripViolation as exc:
        raise MomentDivergence(f"E exp({p} X) diverges: {exc}") from exc
    return float(np.real(k)) / p


def conjugation_spec(model: LevyModel) -> ConjugationSpec:
    _require_nig(model)
    beta = model.nig.beta
    return ConjugationSpec(beta, power_drift(model), -2.0 * beta)


def surrogate_model(model: LevyModel) -> LevyModel:
    """Symmetric zero-carry model of log(S_T^{-2 beta}) recentred to a martingale.

    c X for c = -2 beta is NIG(alpha/|c|, beta/c, delta |c|, c mu) and beta/c = -1/2;
    subtracting kappa(c) t from the drift makes exp of it a martingale.
    """
    _require_nig(model)
    p = model.nig
    if p.beta == 0.0:
        raise ParameterError("beta = 0 has no power surrogate (exponent is zero)")
    c = -2.0 * p.beta
    scaled = p.scaled_space(c)
    k = float(np.real(model.kappa(c)))
    return LevyModel.from_nig_params(replace(scaled, mu=scaled.mu - k), 0.0, 0.0)


def surrogate_levy_density(model: LevyModel, y):
    """Levy density of c X (c = -2 beta) transported from the model's density."""
    _require_nig(model)
    c = -2.0 * model.nig.beta
    if c == 0.0:
        raise ParameterError("beta = 0 has no power surrogate")
    y = np.asarray(y, dtype=float)
    return levy_density(model, y / c) / abs(c)


def _weighted(model, T, b, m, above, contour):
    """E[exp(b X_T) 1{X_T > m}] (``above``) or on {X_T < m}; returns (value, err)."""
    val, err, _ = exp_weighted_tail(model, T, b, m, contour)
    if above:
        return val, err
    total = math.exp(T * float(np.real(model.kappa(b)))) if b != 0.0 else 1.0
    return total - val, err


def _closed_lhs(model, market, payoff, contour):
    T, s0 = market.maturity, market.spot
    if isinstance(payoff, IndicatorAbove):
        return _weighted(model, T, 0.0, math.log(payoff.level / s0), True, contour)
    if isinstance(payoff, IndicatorBelow):
        return _weighted(model, T, 0.0, math.log(payoff.level / s0), False, contour)
    if isinstance(payoff, PowerIndicator):
        v, e = _weighted(model, T, payoff.power, math.log(payoff.level / s0), payoff.above, contour)
        scale = s0**payoff.power
        return scale * v, scale * e
    return None


def _closed_rhs(model, market, payoff, spec: ConjugationSpec, contour):
    T, s0 = market.maturity, market.spot
    p, a = spec.exponent, spec.power_drift
    lead = math.exp(-p * a * T)
    if isinstance(payoff, (IndicatorAbove, IndicatorBelow)):
        # reflected price S0 e^{2aT - X} is above the level iff X < m
        m = 2 * a * T - math.log(payoff.level / s0)
        v, e = _weighted(model, T, p, m, isinstance(payoff, IndicatorBelow), contour)
        return lead * v, lead * e
    if isinstance(payoff, PowerIndicator):
        m = 2 * a * T - math.log(payoff.level / s0)
        k = payoff.power
        scale = lead * s0**k * math.exp(2 * k * a * T)
        v, e = _weighted(model, T, p - k, m, not payoff.above, contour)
        return scale * v, scale * e
    return None


def direct_price(model: LevyModel, market: MarketSpec, payoff, contour: ContourSpec | None = None) -> PriceResult:
    """exp(-rT) E f(S_T) by Fourier for the closed payoff set."""
    _check_market(model, market)
    out = _closed_lhs(model, market, payoff, contour)
    if out is None:
        raise ParameterError(f"no transform route for payoff {payoff!r}")
    disc = market.discount
    return PriceResult(disc * out[0], disc * out[1], "fourier", {"payoff": repr(payoff)})


def conjugate_price(model: LevyModel, market: MarketSpec, payoff, contour: ContourSpec | None = None,
                    n: int = 1_000_000, seed: int = 0) -> PriceResult:
    """Discounted right-hand side of the conjugation identity.

    Closed-set payoffs are integrated by Fourier; other callables go to
    Monte Carlo with ``n`` draws from ``seed``.
    """
    _check_market(model, market)
    spec = conjugation_spec(model)
    T, s0, disc = market.maturity, market.spot, market.discount
    diag = {"exponent": spec.exponent, "power_drift": spec.power_drift,
            "reflection_level": s0 * s0 * math.exp(2 * spec.power_drift * T)}
    out = _closed_rhs(model, market, payoff, spec, contour)
    if out is not None:
        return PriceResult(disc * out[0], disc * out[1], "conjugation", dict(diag, route="fourier"))
    x = sample_terminal(model, T, n, seed)
    s = s0 * np.exp(x)
    vals = np.exp(spec.exponent * (x - spec.power_drift * T)) * payoff(diag["reflection_level"] / s)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return PriceResult(disc * mean, disc * se, "conjugation", dict(diag, route="mc", n=n, seed=seed))


def down_and_in_payoff(model: LevyModel, market: MarketSpec) -> PowerIndicator:
    """(S_T/S0)^{-2 beta} on {S_T < S0 e^{2 a T}}, expressed for spot-level prices.

    The normalisation by S0^{-2 beta} is applied by :func:`price_down_and_in_power`.
    """
    spec = conjugation_spec(model)
    return PowerIndicator(spec.exponent, market.spot * math.exp(2 * spec.power_drift * market.maturity), above=False)


def price_down_and_in_power(model: LevyModel, market: MarketSpec, mode: str = REPRODUCTION,
                            contour: ContourSpec | None = None) -> PriceResult:
    """Terminal down-and-in power contract paying (S_T/S0)^{-2 beta} 1{S_T < S0 e^{2 a T}}.

    By conjugation with f = 1{S_T > S0} its price is exp(-2 beta a T) times the
    digital call struck at S0.

    ``reproduction`` takes that digital from the symmetric shortcut with
    ``market.sigma_atm``.  ``rigorous`` prices the contract exactly by Fourier
    and also reports the exact digital route and the shortcut built from the
    surrogate's own ATM implied volatility.
    """
    _require_nig(model)
    _check_market(model, market)
    spec = conjugation_spec(model)
    T = market.maturity
    weight = math.exp(spec.exponent * spec.power_drift * T)
    diag = {"mode": mode, "exponent": spec.exponent, "power_drift": spec.power_drift,
            "weight": weight, "barrier": market.spot * math.exp(2 * spec.power_drift * T)}
    if mode == REPRODUCTION:
        base = digital_symmetric(market, "call")
        diag["base_digital"] = base.value
        diag["sigma"] = base.diagnostics["sigma"]
        return PriceResult(base.value * weight, base.abs_err * weight, "conjugation", diag)
    if mode != RIGOROUS:
        raise ParameterError(f"mode must be {REPRODUCTION!r} or {RIGOROUS!r}, got {mode!r}")

    payoff = down_and_in_payoff(model, market)
    norm_ = market.spot ** (-spec.exponent)
    exact = direct_price(model, market, payoff, contour)
    x_spot = -(market.rate - market.dividend) * T
    digital = price_digital_call_fourier(model, market, x_spot, contour)
    diag.update(
        exact_digital=digital.value,
        conjugated_digital=digital.value * weight,
    )
    if spec.exponent != 0.0:
        sur = surrogate_model(model)
        sur_spot = (market.spot * math.exp(spec.power_drift * T)) ** spec.exponent
        sur_market = MarketSpec(sur_spot, 0.0, T, 0.0)
        sigma_s = atm_implied_vol(sur, sur_market, contour)
        shortcut = digital_symmetric(MarketSpec(market.spot, market.rate, T, market.dividend), "call", sigma_s)
        diag.update(surrogate_atm_vol=sigma_s, surrogate_shortcut=shortcut.value * weight)
    return PriceResult(norm_ * exact.value, norm_ * exact.abs_err, "conjugation", diag)
