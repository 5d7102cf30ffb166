"""Closed-form prices in symmetric markets and their first-order corrections.

When the jump tilt is beta = -1/2 the at-the-money-forward digital call is
exp(-rT) N(-sigma sqrt(T)/2), with sigma the ATM implied volatility.  Away
from symmetry, the digital price I(beta, x) is expanded to first order in
(beta + 1/2) and in the log-moneyness x around that value.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import ConsistencyFailure, DomainError, ApproximationRangeWarning, ParameterError
from .fourier import (
    ContourSpec,
    MarketSpec,
    PriceResult,
    _check_market,
    _pick_v,
    line_integral,
    price_digital_call_fourier,
)
from .levy_core import LevyModel

FD_STEP = 1e-4
FD_REL_TOL = 1e-3


def _sigma(market: MarketSpec, sigma: float | None) -> float:
    s = market.sigma_atm if sigma is None else sigma
    if not (s >= 0 and math.isfinite(s)):
        raise DomainError(f"volatility must be finite and >= 0, got {s}")
    return s


def digital_symmetric(market: MarketSpec, side: str = "call", sigma: float | None = None) -> PriceResult:
    """ATM digital under symmetry; ``sigma`` defaults to ``market.sigma_atm``."""
    s = _sigma(market, sigma)
    disc = market.discount
    p = float(norm.cdf(-0.5 * s * math.sqrt(market.maturity)))
    if side == "call":
        value = disc * p
    elif side == "put":
        value = disc * (1.0 - p)
    else:
        raise ParameterError(f"side must be 'call' or 'put', got {side!r}")
    return PriceResult(value, 0.0, "shortcut", {"side": side, "sigma": s})


def asset_or_nothing_symmetric(market: MarketSpec, sigma: float | None = None) -> PriceResult:
    """Asset-or-nothing with barrier S0^2 in the normalised symmetric market.

    The identity is exact for S0 = 1 with zero carry; the formula is kept
    linear in S0 as stated.
    """
    s = _sigma(market, sigma)
    value = market.spot * market.discount * (1.0 - float(norm.cdf(-0.5 * s * math.sqrt(market.maturity))))
    return PriceResult(value, 0.0, "shortcut", {"barrier": market.spot**2, "sigma": s})


@dataclass(frozen=True)
class SensitivityPair:
    i_beta: float
    i_x: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def negated(self) -> "SensitivityPair":
        return SensitivityPair(-self.i_beta, -self.i_x, dict(self.diagnostics, side="put"))


@dataclass(frozen=True)
class ApproxConfig:
    eps_beta: float = 0.01
    eps_x: float = 0.01

    def __post_init__(self):
        if self.eps_beta < 0 or self.eps_x < 0:
            raise ParameterError("approximation radii must be non-negative")


def _fd(f, h):
    return (f(h) - f(-h)) / (2 * h)


def _rel_gap(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def sensitivities(model: LevyModel, market: MarketSpec, contour: ContourSpec | None = None,
                  side: str = "call", check: bool = True) -> SensitivityPair:
    """d(digital)/d(beta) and d(digital)/dx at beta = -1/2, x = 0.

    The model is replaced by its symmetrised, martingale-drifted instance.
    Both derivatives are contour integrals; with ``check`` they are compared
    with central differences of the Fourier digital and a disagreement above
    1e-3 relative raises :class:`ConsistencyFailure`.
    """
    _check_market(model, market)
    sym = model.symmetrized()
    contour = contour or ContourSpec()
    T = market.maturity
    h = (market.rate - market.dividend) * T
    v = _pick_v(sym, contour, 0.0, 0.5)
    disc = market.discount

    def g_beta(u):
        return T * sym.kappa_beta_derivative(u, check=False) * np.exp(T * sym.kappa(u, check=False) - u * h) / u

    def g_x(u):
        return np.exp(T * sym.kappa(u, check=False) - u * h)

    ib, eb, db = line_integral(g_beta, v, contour)
    ix, ex, dx = line_integral(g_x, v, contour)
    i_beta, i_x = disc * ib, -disc * ix
    diag = {
        "i_beta_err": disc * eb,
        "i_x_err": disc * ex,
        "contour_v": v,
        "nodes": db["nodes"] + dx["nodes"],
        "source_beta": model.beta,
    }
    if check:
        fine = ContourSpec(v=v, rel_tol=1e-13, max_nodes=contour.max_nodes)
        fd_beta = _fd(
            lambda e: price_digital_call_fourier(sym.with_beta(-0.5 + e), market, 0.0, fine).value,
            FD_STEP,
        )
        fd_x = _fd(lambda e: price_digital_call_fourier(sym, market, e, fine).value, FD_STEP)
        gap_b, gap_x = _rel_gap(i_beta, fd_beta), _rel_gap(i_x, fd_x)
        diag.update(fd_beta=fd_beta, fd_x=fd_x, rel_gap_beta=gap_b, rel_gap_x=gap_x)
        if gap_b > FD_REL_TOL or gap_x > FD_REL_TOL:
            raise ConsistencyFailure(
                f"analytic sensitivities ({i_beta}, {i_x}) disagree with finite "
                f"differences ({fd_beta}, {fd_x})"
            )
    pair = SensitivityPair(i_beta, i_x, diag)
    if side == "put":
        return pair.negated()
    return pair


def approx_digital(base: PriceResult, sens: SensitivityPair, beta: float = -0.5, x: float = 0.0,
                   cfg: ApproxConfig | None = None, discount: float | None = None) -> PriceResult:
    """First-order digital price base + (beta+1/2) I_beta + x I_x.

    Queries outside the configured radii emit :class:`ApproximationRangeWarning`
    and are flagged, never refused.  ``discount`` enables the [0, exp(-rT)]
    band flag.
    """
    cfg = cfg or ApproxConfig()
    db = beta + 0.5
    value = base.value
    if db != 0.0:
        value = value + db * sens.i_beta
    if x != 0.0:
        value = value + x * sens.i_x
    slack = 1e-12  # absorbs rounding in beta + 1/2
    in_radius = abs(db) <= cfg.eps_beta + slack and abs(x) <= cfg.eps_x + slack
    if not in_radius:
        warnings.warn(
            f"approximation queried at beta+1/2={db:.4g}, x={x:.4g} outside radii "
            f"({cfg.eps_beta}, {cfg.eps_x})",
            ApproximationRangeWarning,
            stacklevel=2,
        )
    diag = {"beta": beta, "x": x, "in_radius": in_radius, "base": base.value,
            "i_beta": sens.i_beta, "i_x": sens.i_x}
    if discount is not None:
        diag["in_band"] = bool(0.0 <= value <= discount)
    return PriceResult(value, base.abs_err, "approx", diag)


def approx_grid(base: PriceResult, sens: SensitivityPair, eps_beta: float = 0.01, eps_x: float = 0.01,
                n_beta: int = 21, n_x: int = 21, beta0: float = -0.5, x0: float = 0.0):
    """Rows (beta, x, price) over [beta0 +- eps_beta] x [x0 +- eps_x], beta outer."""
    rows = []
    cfg = ApproxConfig(abs(beta0 + 0.5) + eps_beta, abs(x0) + eps_x)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ApproximationRangeWarning)
        for b in np.linspace(beta0 - eps_beta, beta0 + eps_beta, n_beta):
            for x in np.linspace(x0 - eps_x, x0 + eps_x, n_x):
                rows.append((float(b), float(x), approx_digital(base, sens, b, x, cfg).value))
    return rows


def grid_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "x", "price"])
    for b, x, p in rows:
        w.writerow([f"{b:.17g}", f"{x:.17g}", f"{p:.17g}"])
    return buf.getvalue()
