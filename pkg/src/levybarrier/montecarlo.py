"""Seeded Monte Carlo sampler for terminal log-returns.

Random numbers come from numpy's Philox4x32-10 counter-based generator.
Samples are produced in fixed-size chunks; chunk ``i`` of stream ``s`` is
seeded with ``SeedSequence(seed, spawn_key=(s, i))``, so the concatenated
output depends only on (seed, stream, n) and never on the worker count.

NIG draws use the normal variance-mean mixture
X_t = mu t + beta V + sqrt(V) Z,  V ~ IG(mean delta t / gamma, shape (delta t)^2),
with V sampled by the Michael-Schucany-Haas transformation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptySample, ParameterError
from .fourier import MarketSpec, PriceResult
from .levy_core import BLACK_SCHOLES, LevyModel
from .nig import NIGParams

CHUNK = 1 << 16


def _generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(stream, chunk))
    return np.random.Generator(np.random.Philox(ss))


def inverse_gaussian(rng: np.random.Generator, mean: float, shape: float, n: int) -> np.ndarray:
    """Michael-Schucany-Haas sampler for IG(mean, shape)."""
    nu = rng.standard_normal(n)
    y = nu * nu
    m = mean
    x = m + (m * m * y) / (2 * shape) - (m / (2 * shape)) * np.sqrt(4 * m * shape * y + (m * y) ** 2)
    u = rng.random(n)
    return np.where(u <= m / (m + x), x, m * m / x)


def _nig_chunk(params: NIGParams, t, n, seed, stream, chunk):
    rng = _generator(seed, stream, chunk)
    d = params.delta * t
    v = inverse_gaussian(rng, d / params.gamma, d * d, n)
    z = rng.standard_normal(n)
    return params.mu * t + params.beta * v + np.sqrt(v) * z


def _bs_chunk(model: LevyModel, t, n, seed, stream, chunk):
    rng = _generator(seed, stream, chunk)
    s = model.sigma
    drift = (model.rate - model.dividend - 0.5 * s * s) * t
    return drift + s * math.sqrt(t) * rng.standard_normal(n)


def _run_chunks(fn, n, workers):
    sizes = [min(CHUNK, n - i * CHUNK) for i in range((n + CHUNK - 1) // CHUNK)]
    jobs = list(enumerate(sizes))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: fn(j[1], j[0]), jobs))
    else:
        parts = [fn(size, i) for i, size in jobs]
    return np.concatenate(parts)


def sample_nig_terminal(params: NIGParams, t: float, n: int, seed: int, stream: int = 0,
                        workers: int = 1) -> np.ndarray:
    """``n`` i.i.d. draws of X_t for NIG(params); deterministic in (seed, stream)."""
    if not isinstance(params, NIGParams):
        raise ParameterError("params must be NIGParams")
    if t <= 0:
        raise ParameterError(f"horizon must be positive, got {t}")
    if n < 1:
        raise ParameterError(f"sample size must be >= 1, got {n}")
    return _run_chunks(lambda size, i: _nig_chunk(params, t, size, seed, stream, i), n, workers)


def sample_terminal(model: LevyModel, t: float, n: int, seed: int, stream: int = 0,
                    workers: int = 1) -> np.ndarray:
    """Draws of X_t under ``model`` (S_t = S0 exp(X_t))."""
    if model.variant == BLACK_SCHOLES:
        if t <= 0 or n < 1:
            raise ParameterError("need t > 0 and n >= 1")
        return _run_chunks(lambda size, i: _bs_chunk(model, t, size, seed, stream, i), n, workers)
    return sample_nig_terminal(model.nig, t, n, seed, stream, workers)


def _mean_and_se(values):
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        raise EmptySample("no samples")
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return mean, se


def terminal_prices(samples, market: MarketSpec, convention: str = "spot"):
    """Map log-return draws to S_T.

    ``spot``: S_T = S0 exp(X_T), for martingale-drifted models.
    ``forward``: S_T = S0 exp(X_T + (r - q) T), for driftless X.
    """
    x = np.asarray(samples, dtype=float)
    if convention == "spot":
        return market.spot * np.exp(x)
    if convention == "forward":
        return market.spot * np.exp(x + (market.rate - market.dividend) * market.maturity)
    raise ParameterError(f"unknown convention {convention!r}")


def mc_price(payoff, samples, market: MarketSpec, convention: str = "spot") -> PriceResult:
    """Discounted sample mean of ``payoff(S_T)`` with its standard error."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptySample("no samples")
    mean, se = _mean_and_se(payoff(terminal_prices(samples, market, convention)))
    disc = market.discount
    return PriceResult(disc * mean, disc * se, "mc", {"n": int(samples.size), "convention": convention})


@dataclass(frozen=True)
class ConjugationReport:
    lhs: float
    rhs: float
    lhs_se: float
    rhs_se: float
    passed: bool

    @property
    def z_score(self) -> float:
        se = math.hypot(self.lhs_se, self.rhs_se)
        return abs(self.lhs - self.rhs) / se if se > 0 else (0.0 if self.lhs == self.rhs else math.inf)

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "lhs_se": self.lhs_se, "rhs_se": self.rhs_se,
                "z": self.z_score, "passed": self.passed}


def verify_conjugation(model: LevyModel, market: MarketSpec, payoff, n: int = 1_000_000,
                       seed: int = 0, workers: int = 1) -> ConjugationReport:
    """Estimate both sides of E f(S_T) = E[(S_T/(S0 e^{aT}))^{-2b} f(S0^2 e^{2aT}/S_T)].

    The two sides use independent streams; pass iff they agree within three
    combined standard errors.
    """
    from .power import conjugation_spec

    spec = conjugation_spec(model)
    T, s0 = market.maturity, market.spot
    x_l = sample_terminal(model, T, n, seed, stream=0, workers=workers)
    x_r = sample_terminal(model, T, n, seed, stream=1, workers=workers)
    lhs, lhs_se = _mean_and_se(payoff(s0 * np.exp(x_l)))
    s_r = s0 * np.exp(x_r)
    weight = np.exp(spec.exponent * (x_r - spec.power_drift * T))
    reflected = s0 * s0 * math.exp(2 * spec.power_drift * T) / s_r
    rhs, rhs_se = _mean_and_se(weight * payoff(reflected))
    ok = abs(lhs - rhs) <= 3.0 * math.hypot(lhs_se, rhs_se)
    return ConjugationReport(lhs, rhs, lhs_se, rhs_se, bool(ok))
