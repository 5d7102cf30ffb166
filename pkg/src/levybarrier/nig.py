"""Normal Inverse Gaussian parameters, density, moments and Esscher tilt.

Parameters follow the (mu, alpha, delta, beta) ordering: location drift,
tail heaviness, scale and skew.  ``mu`` and ``delta`` are per unit of the
model's time variable, so the law of X_t is NIG(alpha, beta, delta*t, mu*t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import kve

from .errors import ParameterError


@dataclass(frozen=True)
class NIGParams:
    mu: float
    alpha: float
    delta: float
    beta: float

    def __post_init__(self):
        for name in ("mu", "alpha", "delta", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        vals = (self.mu, self.alpha, self.delta, self.beta)
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError(f"NIG parameters must be finite, got {vals}")
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.delta <= 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if abs(self.beta) >= self.alpha:
            raise ParameterError(
                f"|beta| must be strictly below alpha, got beta={self.beta}, alpha={self.alpha}"
            )

    @property
    def gamma(self) -> float:
        """sqrt(alpha^2 - beta^2)."""
        return math.sqrt(self.alpha**2 - self.beta**2)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mu, self.alpha, self.delta, self.beta)

    def scaled_time(self, factor: float) -> "NIGParams":
        """Re-express the parameters for a time unit ``factor`` times longer.

        Daily parameters with ``factor=252`` give per-year parameters.
        """
        if factor <= 0:
            raise ParameterError(f"time factor must be positive, got {factor}")
        return replace(self, mu=self.mu * factor, delta=self.delta * factor)

    def scaled_space(self, c: float) -> "NIGParams":
        """Parameters of c*X for c != 0 (a negative c also flips the skew)."""
        if c == 0 or not math.isfinite(c):
            raise ParameterError(f"space scale must be finite and non-zero, got {c}")
        ac = abs(c)
        return NIGParams(self.mu * c, self.alpha / ac, self.delta * ac, self.beta / c)


def nig_kappa(params: NIGParams, s):
    """Real-argument cumulant log E exp(s X_1), vectorised over complex s."""
    a2 = params.alpha**2
    s = np.asarray(s, dtype=complex)
    return params.mu * s + params.delta * (params.gamma - np.sqrt(a2 - (params.beta + s) ** 2))


def _log_k1(z):
    # kve is exp(z)*K_1(z); log form avoids under/overflow for large z.
    return np.log(kve(1, z)) - z


def nig_logpdf(params: NIGParams, x, t: float = 1.0):
    if t <= 0:
        raise ParameterError(f"horizon must be positive, got {t}")
    a, b = params.alpha, params.beta
    d = params.delta * t
    m = params.mu * t
    x = np.asarray(x, dtype=float)
    dev = x - m
    q = np.hypot(d, dev)
    return (
        math.log(a * d / math.pi)
        + _log_k1(a * q)
        - np.log(q)
        + d * params.gamma
        + b * dev
    )


def nig_density(params: NIGParams, x, t: float = 1.0):
    """Density of X_t at ``x``; strictly positive everywhere."""
    return np.exp(nig_logpdf(params, x, t))


def nig_mean_variance(params: NIGParams, t: float = 1.0) -> tuple[float, float]:
    if t <= 0:
        raise ParameterError(f"horizon must be positive, got {t}")
    g = params.gamma
    mean = t * (params.mu + params.delta * params.beta / g)
    var = t * params.delta * params.alpha**2 / g**3
    return mean, var


def nig_skew_kurtosis(params: NIGParams, t: float = 1.0) -> tuple[float, float]:
    """Skewness and excess kurtosis of X_t."""
    a, b, g = params.alpha, params.beta, params.gamma
    d = params.delta * t
    skew = 3.0 * b / (a * math.sqrt(d * g))
    kurt = 3.0 * (1.0 + 4.0 * b**2 / a**2) / (d * g)
    return skew, kurt


def esscher_shift(params: NIGParams, theta: float) -> NIGParams:
    """Esscher tilt by exp(theta*x): the NIG family is closed, only beta moves."""
    new_beta = params.beta + theta
    if abs(new_beta) >= params.alpha:
        raise ParameterError(
            f"tilted skew {new_beta} leaves (-{params.alpha}, {params.alpha})"
        )
    return replace(params, beta=new_beta)
