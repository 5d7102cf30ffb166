"""Return-series ingestion, NIG maximum likelihood and Esscher risk-neutralisation."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import kve

from .errors import (
    BoundaryWarning,
    InsufficientData,
    NoRootInBracket,
    OptimizationFailure,
    ParameterError,
    ParseError,
)
from .nig import NIGParams, esscher_shift, nig_kappa, nig_logpdf

MIN_RETURNS = 30
DEFAULT_INIT = NIGParams(0.0, 10.0, 0.01, 0.0)


@dataclass(frozen=True)
class ReturnsSeries:
    values: np.ndarray
    period_label: str = "daily"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ParameterError("returns must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("returns must be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


def _parse_date(text, line):
    try:
        return date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ParseError(f"bad date {text!r}", line) from exc


def load_returns(path, mode: str = "prices", period_label: str = "daily",
                 min_rows: int | None = None) -> ReturnsSeries:
    """Read ``date,close`` (prices) or ``date,logret`` (logreturns) CSV.

    A header row is optional.  Dates, when present, must be strictly
    increasing; they are not used otherwise.  ``min_rows`` overrides the
    default minimum (31 prices or 30 returns).
    """
    if mode not in ("prices", "logreturns"):
        raise ParameterError(f"mode must be 'prices' or 'logreturns', got {mode!r}")
    values, dates = [], []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            cell = row[-1].strip()
            try:
                num = float(cell)
            except ValueError:
                if lineno == 1 and not values:
                    continue  # header
                raise ParseError(f"cannot parse number {cell!r}", lineno) from None
            if not math.isfinite(num):
                raise ParseError(f"non-finite value {cell!r}", lineno)
            if mode == "prices" and num <= 0:
                raise ParseError(f"price must be positive, got {num}", lineno)
            if len(row) > 1:
                d = _parse_date(row[0], lineno)
                if dates and d <= dates[-1]:
                    raise ParseError(f"dates not increasing at {d}", lineno)
                dates.append(d)
            values.append(num)
    need = min_rows if min_rows is not None else (MIN_RETURNS + 1 if mode == "prices" else MIN_RETURNS)
    if len(values) < need:
        raise InsufficientData(f"need at least {need} rows, got {len(values)}")
    arr = np.asarray(values, dtype=float)
    if mode == "prices":
        arr = np.diff(np.log(arr))
    return ReturnsSeries(arr, period_label)


def moment_init(x) -> NIGParams:
    """Method-of-moments NIG start.

    With skew s and excess kurtosis k, rho = beta/alpha solves
    s^2/k = 3 rho^2/(1 + 4 rho^2); then delta*gamma = 3(1 + 4 rho^2)/k and
    gamma^2 = delta*gamma / (var (1 - rho^2)).  Falls back to a fixed start
    when 3k <= 5 s^2 or k <= 0.
    """
    x = np.asarray(x, dtype=float)
    m, var = float(x.mean()), float(x.var())
    if var <= 0:
        return DEFAULT_INIT
    z = (x - m) / math.sqrt(var)
    s = float(np.mean(z**3))
    k = float(np.mean(z**4)) - 3.0
    if k <= 0 or 3.0 * k <= 5.0 * s * s:
        return DEFAULT_INIT
    r = s * s / k
    rho2 = r / (3.0 - 4.0 * r)
    dg = 3.0 * (1.0 + 4.0 * rho2) / k
    gamma = math.sqrt(dg / (var * (1.0 - rho2)))
    alpha = gamma / math.sqrt(1.0 - rho2)
    beta = math.copysign(math.sqrt(rho2) * alpha, s)
    delta = dg / gamma
    mu = m - delta * beta / gamma
    return NIGParams(mu, alpha, delta, beta)


def _natural_grad(x, mu, alpha, delta, beta):
    """Per-observation gradient of log f w.r.t. (mu, alpha, delta, beta)."""
    d = x - mu
    q = np.hypot(delta, d)
    gamma = math.sqrt(alpha * alpha - beta * beta)
    z = alpha * q
    # d/dz log K_1(z) = -K_0/K_1 - 1/z
    dlk = -kve(0, z) / kve(1, z) - 1.0 / z
    g_mu = -dlk * alpha * d / q + d / (q * q) - beta
    g_alpha = 1.0 / alpha + dlk * q + delta * alpha / gamma
    g_delta = 1.0 / delta + dlk * alpha * delta / q - delta / (q * q) + gamma
    g_beta = -delta * beta / gamma + d
    return np.stack([g_mu, g_alpha, g_delta, g_beta])


def _from_theta(th):
    mu, beta, log_delta, log_gamma = th
    gamma = math.exp(log_gamma)
    return mu, math.hypot(beta, gamma), math.exp(log_delta), beta


def _to_theta(p: NIGParams):
    return np.array([p.mu, p.beta, math.log(p.delta), math.log(p.gamma)])


@dataclass
class NIGFit:
    params: NIGParams
    loglik: float
    grad_norm: float
    stderr: dict
    n_obs: int
    iterations: int
    trace: list = field(default_factory=list, repr=False)


def fit_nig_mle(returns: ReturnsSeries, init: NIGParams | None = None,
                max_iter: int = 500, gtol: float = 1e-9) -> NIGFit:
    """Maximum likelihood NIG fit by BFGS in unconstrained coordinates.

    Coordinates are (mu, beta, log delta, log gamma) with
    alpha = sqrt(beta^2 + gamma^2), on data standardised to zero mean and unit
    variance.  ``stderr`` holds asymptotic standard errors from the observed
    information.
    """
    x = returns.values if isinstance(returns, ReturnsSeries) else np.asarray(returns, dtype=float)
    n = x.size
    if n < MIN_RETURNS:
        raise InsufficientData(f"need at least {MIN_RETURNS} returns, got {n}")
    loc, scale = float(x.mean()), float(x.std())
    if scale <= 0:
        raise OptimizationFailure("returns have zero variance")
    z = (x - loc) / scale
    start = moment_init(z) if init is None else _standardise(init, loc, scale)

    def objective(th):
        mu, alpha, delta, beta = _from_theta(th)
        p = NIGParams(mu, alpha, delta, beta)
        return -float(np.mean(nig_logpdf(p, z)))

    def gradient(th):
        mu, alpha, delta, beta = _from_theta(th)
        g = _natural_grad(z, mu, alpha, delta, beta).mean(axis=1)
        gamma = math.exp(th[3])
        # chain rule: alpha = hypot(beta, gamma)
        return -np.array([
            g[0],
            g[3] + g[1] * beta / alpha,
            g[2] * delta,
            g[1] * gamma * gamma / alpha,
        ])

    trace = []
    res = minimize(
        objective, _to_theta(start), jac=gradient, method="BFGS",
        callback=lambda th: trace.append(objective(th)),
        options={"gtol": gtol, "maxiter": max_iter},
    )
    if not np.all(np.isfinite(res.x)):
        raise OptimizationFailure(f"optimizer diverged: {res.message}")
    gnorm = float(np.linalg.norm(gradient(res.x)))
    if not res.success and gnorm > 1e-6:
        raise OptimizationFailure(f"MLE did not converge ({res.message}); |grad|={gnorm:.3g}")
    mu, alpha, delta, beta = _from_theta(res.x)
    fitted = _unstandardise(NIGParams(mu, alpha, delta, beta), loc, scale)
    if abs(fitted.beta) >= 0.99 * fitted.alpha:
        warnings.warn(
            f"fitted |beta|={abs(fitted.beta):.4g} within 1% of alpha={fitted.alpha:.4g}",
            BoundaryWarning, stacklevel=2,
        )
    stderr = _stderr(x, fitted)
    loglik = float(np.sum(nig_logpdf(fitted, x)))
    return NIGFit(fitted, loglik, gnorm, stderr, n, int(res.nit), trace)


def _standardise(p: NIGParams, loc, scale):
    # (X - loc)/scale ~ NIG(alpha*scale, beta*scale, delta/scale, (mu - loc)/scale)
    return NIGParams((p.mu - loc) / scale, p.alpha * scale, p.delta / scale, p.beta * scale)


def _unstandardise(p: NIGParams, loc, scale):
    return NIGParams(p.mu * scale + loc, p.alpha / scale, p.delta * scale, p.beta / scale)


def observed_information(x, p: NIGParams, rel_step: float = 1e-5) -> np.ndarray:
    """Negative Hessian of the total log-likelihood in (mu, alpha, delta, beta)."""
    theta = np.array(p.as_tuple())
    hess = np.empty((4, 4))
    for j in range(4):
        h = rel_step * max(abs(theta[j]), 1e-3 * p.delta)
        up, dn = theta.copy(), theta.copy()
        up[j] += h
        dn[j] -= h
        hess[:, j] = (_natural_grad(x, *up).sum(axis=1) - _natural_grad(x, *dn).sum(axis=1)) / (2 * h)
    hess = 0.5 * (hess + hess.T)
    return -hess


def _stderr(x, p: NIGParams) -> dict:
    info = observed_information(x, p)
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    except np.linalg.LinAlgError:
        se = np.full(4, math.nan)
    return dict(zip(("mu", "alpha", "delta", "beta"), map(float, se)))


def _mean_exp_gap(p: NIGParams, b: float, r: float, q: float) -> float:
    return float(np.real(nig_kappa(NIGParams(p.mu, p.alpha, p.delta, b), 1.0))) - (r - q)


def esscher_transform(params: NIGParams, r: float, q: float = 0.0) -> NIGParams:
    """Risk-neutral NIG parameters via the Esscher tilt beta -> beta + theta*.

    theta* solves kappa_{beta+theta}(1) = r - q on the bracket where
    beta + theta and beta + theta + 1 both stay inside (-alpha, alpha).
    """
    a = params.alpha
    if abs(params.beta + 1.0) < a and abs(_mean_exp_gap(params, params.beta, r, q)) <= 1e-15:
        return params
    lo, hi = -a, a - 1.0
    if not lo < hi:
        raise NoRootInBracket(f"alpha={a} leaves no room for a finite exponential moment")
    eps = 1e-12 * a
    lo_b, hi_b = lo + eps, hi - eps
    grid = np.linspace(lo_b, hi_b, 65)
    vals = np.array([_mean_exp_gap(params, b, r, q) for b in grid])
    if np.any(np.diff(vals) <= 0):
        raise NoRootInBracket("martingale map is not monotone on the bracket",
                              float(vals[0]), float(vals[-1]))
    if not vals[0] < 0 < vals[-1]:
        raise NoRootInBracket(
            f"no martingale tilt: gap ranges over [{vals[0]:.4g}, {vals[-1]:.4g}]",
            float(vals[0]), float(vals[-1]),
        )
    b_star = brentq(lambda b: _mean_exp_gap(params, b, r, q), lo_b, hi_b,
                    xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return esscher_shift(params, b_star - params.beta)
