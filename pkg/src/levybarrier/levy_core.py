"""Levy cumulant framework for exponential Levy markets.

Two conventions are used throughout:

* ``cumulant(model, z)`` is the Fourier-argument exponent psi with
  E exp(i z X_t) = exp(t psi(z)).
* ``kappa(model, u)`` is the real-argument cumulant kappa(u) = psi(-i u) with
  E exp(u X_t) = exp(t kappa(u)).  The martingale condition reads
  kappa(1) = r - q.

The strip of a model is stored as the admissible range of Im(z) for psi;
the matching range of Re(u) for kappa is ``(-hi, -lo)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import kve

from .errors import DomainError, ParameterError, StripViolation, UnsupportedVariant
from .nig import NIGParams, nig_kappa

BLACK_SCHOLES = "black_scholes"
NIG = "nig"

MARTINGALE_TOL = 1e-10
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class LevyModel:
    """Immutable exponential Levy model under the pricing measure.

    Build instances with :meth:`black_scholes`, :meth:`nig_risk_neutral` or
    :meth:`from_nig_params`.  ``martingale_drift`` records whether the drift
    is derived from (r, q) and therefore moves when the skew changes.
    """

    variant: str
    rate: float
    dividend: float = 0.0
    sigma: float = 0.0
    nig: NIGParams | None = None
    martingale_drift: bool = True
    strip: tuple[float, float] = field(default=(-math.inf, math.inf))

    @classmethod
    def black_scholes(cls, sigma: float, rate: float, dividend: float = 0.0) -> "LevyModel":
        if not sigma >= 0 or not math.isfinite(sigma):
            raise ParameterError(f"sigma must be finite and >= 0, got {sigma}")
        _check_rates(rate, dividend)
        return cls(BLACK_SCHOLES, rate, dividend, sigma=sigma)

    @classmethod
    def nig_risk_neutral(
        cls, alpha: float, beta: float, delta: float, rate: float, dividend: float = 0.0
    ) -> "LevyModel":
        """NIG model whose drift is chosen so that kappa(1) = r - q."""
        _check_rates(rate, dividend)
        if not abs(beta + 1.0) < alpha:
            raise StripViolation(
                f"exp(X) has no finite mean: beta+1={beta + 1.0} outside (-{alpha}, {alpha})",
                bound=alpha,
            )
        gamma = math.sqrt(alpha**2 - beta**2)
        mu = rate - dividend - delta * (gamma - math.sqrt(alpha**2 - (beta + 1.0) ** 2))
        params = NIGParams(mu, alpha, delta, beta)
        return cls(NIG, rate, dividend, nig=params, martingale_drift=True, strip=_nig_strip(params))

    @classmethod
    def from_nig_params(cls, params: NIGParams, rate: float, dividend: float = 0.0) -> "LevyModel":
        """NIG model with the drift taken as given (physical or calibrated input)."""
        _check_rates(rate, dividend)
        return cls(NIG, rate, dividend, nig=params, martingale_drift=False, strip=_nig_strip(params))

    @property
    def beta(self) -> float:
        return symmetry_beta(self)

    @property
    def kappa_strip(self) -> tuple[float, float]:
        """Admissible open range of Re(u) for :meth:`kappa`."""
        lo, hi = self.strip
        return (-hi, -lo)

    def kappa(self, u, check: bool = True):
        """Real-argument cumulant, vectorised over complex ``u``."""
        u = np.asarray(u, dtype=complex)
        if check:
            _check_real_part(self, u.real)
        if self.variant == BLACK_SCHOLES:
            s2 = self.sigma**2
            return (self.rate - self.dividend - 0.5 * s2) * u + 0.5 * s2 * u * u
        return nig_kappa(self.nig, u)

    def kappa_beta_derivative(self, u, check: bool = True):
        """d kappa / d beta at real-argument ``u`` (drift response included)."""
        if self.variant != NIG:
            raise UnsupportedVariant("Black-Scholes model has no jump tilt parameter")
        u = np.asarray(u, dtype=complex)
        if check:
            _check_real_part(self, u.real)
        p = self.nig
        a2, b = p.alpha**2, p.beta
        out = p.delta * ((b + u) / np.sqrt(a2 - (b + u) ** 2) - b / p.gamma)
        if self.martingale_drift:
            out = out + u * _drift_beta_slope(p)
        return out

    def with_beta(self, beta: float) -> "LevyModel":
        """Same model with a different skew; re-drifted when drift is martingale."""
        if self.variant != NIG:
            raise UnsupportedVariant("Black-Scholes model has no jump tilt parameter")
        p = self.nig
        if self.martingale_drift:
            return LevyModel.nig_risk_neutral(p.alpha, beta, p.delta, self.rate, self.dividend)
        return LevyModel.from_nig_params(replace(p, beta=beta), self.rate, self.dividend)

    def symmetrized(self) -> "LevyModel":
        """The beta = -1/2 martingale-drifted instance sharing alpha and delta."""
        if self.variant == BLACK_SCHOLES:
            return self
        p = self.nig
        return LevyModel.nig_risk_neutral(p.alpha, -0.5, p.delta, self.rate, self.dividend)

    def to_dict(self) -> dict:
        if self.variant == BLACK_SCHOLES:
            return {"variant": BLACK_SCHOLES, "sigma": self.sigma, "rate": self.rate,
                    "dividend": self.dividend}
        p = self.nig
        return {
            "variant": NIG,
            "params": {"mu": p.mu, "alpha": p.alpha, "delta": p.delta, "beta": p.beta},
            "drift": "martingale" if self.martingale_drift else "given",
            "rate": self.rate,
            "dividend": self.dividend,
        }


def _check_rates(rate, dividend):
    if not (math.isfinite(rate) and rate >= 0):
        raise ParameterError(f"rate must be finite and >= 0, got {rate}")
    if not (math.isfinite(dividend) and dividend >= 0):
        raise ParameterError(f"dividend must be finite and >= 0, got {dividend}")


def _nig_strip(params: NIGParams) -> tuple[float, float]:
    # sqrt(alpha^2 - (beta + i z)^2) stays off its branch cut iff
    # beta - alpha < Im(z) < beta + alpha.
    return (params.beta - params.alpha, params.beta + params.alpha)


def _drift_beta_slope(p: NIGParams) -> float:
    # d mu / d beta for mu = r - q - delta*(gamma(beta) - sqrt(alpha^2 - (beta+1)^2))
    a2, b = p.alpha**2, p.beta
    return -p.delta * (-b / math.sqrt(a2 - b * b) + (b + 1.0) / math.sqrt(a2 - (b + 1.0) ** 2))


def _check_real_part(model: LevyModel, re_u):
    lo, hi = model.kappa_strip
    re_u = np.atleast_1d(re_u)
    if re_u.size == 0:
        return
    if np.any(re_u <= lo):
        raise StripViolation(
            f"real-argument {re_u.min()} at or below strip bound {lo}", bound=lo
        )
    if np.any(re_u >= hi):
        raise StripViolation(
            f"real-argument {re_u.max()} at or above strip bound {hi}", bound=hi
        )


def cumulant(model: LevyModel, z):
    """Characteristic exponent psi(z), E exp(i z X_t) = exp(t psi(z))."""
    z = np.asarray(z, dtype=complex)
    lo, hi = model.strip
    im = np.atleast_1d(z.imag)
    if np.any(im <= lo):
        raise StripViolation(f"Im(z)={im.min()} at or below strip bound {lo}", bound=lo)
    if np.any(im >= hi):
        raise StripViolation(f"Im(z)={im.max()} at or above strip bound {hi}", bound=hi)
    return model.kappa(1j * z, check=False)


def kappa(model: LevyModel, u):
    return model.kappa(u)


def cumulant_beta_derivative(model: LevyModel, z):
    """d psi / d beta at Fourier argument ``z``.

    With a given drift this is the closed NIG form
    delta*((beta + i z)/sqrt(alpha^2 - (beta + i z)^2) - beta/sqrt(alpha^2 - beta^2)).
    A martingale-drifted model adds i z * d mu/d beta, which is the
    compensated-integral form of the derivative.
    """
    if model.variant != NIG:
        raise UnsupportedVariant("Black-Scholes model has no jump tilt parameter")
    z = np.asarray(z, dtype=complex)
    cumulant(model, z)  # strip check
    return model.kappa_beta_derivative(1j * z, check=False)


def martingale_gap(model: LevyModel) -> float:
    """kappa(1) - (r - q); zero for risk-neutral constructor output."""
    k1 = model.kappa(1.0)
    return float(np.real(k1)) - (model.rate - model.dividend)


def symmetry_beta(model: LevyModel) -> float:
    """Jump tilt beta; the Black-Scholes model counts as symmetric (-1/2)."""
    if model.variant == BLACK_SCHOLES:
        return -0.5
    return model.nig.beta


def is_symmetric(model: LevyModel, tol: float = SYMMETRY_TOL) -> bool:
    return abs(symmetry_beta(model) + 0.5) <= tol


def levy_density(model: LevyModel, y):
    """Levy density exp(beta*y) * (delta*alpha/pi) * K_1(alpha|y|)/|y|."""
    if model.variant != NIG:
        raise UnsupportedVariant("Black-Scholes model has no jump measure")
    y = np.asarray(y, dtype=float)
    if np.any(y == 0):
        raise DomainError("Levy density is undefined at y = 0")
    p = model.nig
    ay = p.alpha * np.abs(y)
    # kve(1, z)*exp(-z) = K_1(z); fold the exponentials to avoid underflow.
    return (p.delta * p.alpha / math.pi) * kve(1, ay) * np.exp(p.beta * y - ay) / np.abs(y)
