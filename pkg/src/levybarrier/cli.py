"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 input/parse error, 3 numerical failure
(including a failed verification).  Numeric JSON output uses 17 significant
digits with a fixed field order.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from importlib import resources
from pathlib import Path

from .calibration import esscher_transform, fit_nig_mle, load_returns
from .errors import (
    ConsistencyFailure,
    InsufficientData,
    InversionFailure,
    LevyError,
    MomentDivergence,
    NoRootInBracket,
    OptimizationFailure,
    ParameterError,
    ParseError,
    QuadratureFailure,
    StripViolation,
    UnsupportedVariant,
)
from .fourier import MarketSpec, price_digital_call_fourier
from .levy_core import (
    BLACK_SCHOLES,
    MARTINGALE_TOL,
    NIG,
    LevyModel,
    is_symmetric,
    levy_density,
    martingale_gap,
)
from .nig import NIGParams
from .payoffs import IndicatorAbove
from .power import RIGOROUS, REPRODUCTION, price_down_and_in_power
from .shortcut import (
    ApproxConfig,
    SensitivityPair,
    approx_digital,
    approx_grid,
    asset_or_nothing_symmetric,
    digital_symmetric,
    grid_csv,
    sensitivities,
)

NUMERICAL = (QuadratureFailure, StripViolation, NoRootInBracket, OptimizationFailure,
             ConsistencyFailure, InversionFailure, MomentDivergence)

# Published reference values compared by ``reproduce-paper``.
PUBLISHED = {
    "f0": 0.4449,
    "g0": 0.5539,
    "beta_star": -4.18,
    "i_beta": 0.2621,
    "i_x": 7.3212,
    "power_price": 0.4516,
}
PUBLISHED_SENSITIVITIES = SensitivityPair(PUBLISHED["i_beta"], PUBLISHED["i_x"], {"source": "published"})


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- JSON -----------------------------------------------------------------

def _fmt(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float) or hasattr(obj, "dtype"):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return _fmt(obj)


def _emit(obj, out):
    out.write(dumps(obj) + "\n")


# --- input files ----------------------------------------------------------

def _read_json(ref: str) -> dict:
    """Read a JSON file, or bundled data via ``bundled:NAME``."""
    try:
        if ref.startswith("bundled:"):
            text = resources.files("levybarrier").joinpath("data", ref[8:] + ".json").read_text()
        else:
            text = Path(ref).read_text(encoding="utf-8")
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {ref}: {exc}") from exc


def model_from_dict(d: dict) -> LevyModel:
    """Build a model from its JSON description.

    NIG files carry ``params`` (mu, alpha, delta, beta), ``drift`` ("given" or
    "martingale") and an optional ``annualization_factor`` applied to mu and
    delta (default 1, i.e. parameters already per model time unit).
    """
    try:
        variant = d["variant"]
        rate = float(d["rate"])
        dividend = float(d.get("dividend", 0.0))
        if variant == BLACK_SCHOLES:
            return LevyModel.black_scholes(float(d["sigma"]), rate, dividend)
        if variant == NIG:
            p = d["params"]
            params = NIGParams(float(p.get("mu", 0.0)), float(p["alpha"]), float(p["delta"]), float(p["beta"]))
            factor = float(d.get("annualization_factor", 1.0))
            if factor != 1.0:
                params = params.scaled_time(factor)
            drift = d.get("drift", "given")
            if drift == "martingale":
                return LevyModel.nig_risk_neutral(params.alpha, params.beta, params.delta, rate, dividend)
            if drift == "given":
                return LevyModel.from_nig_params(params, rate, dividend)
            raise ParseError(f"unknown drift {drift!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LevyError):
            raise
        raise ParseError(f"malformed model description: {exc!r}") from exc
    raise ParseError(f"unknown model variant {d.get('variant')!r}")


def market_from_dict(d: dict) -> MarketSpec:
    try:
        return MarketSpec(
            spot=float(d["spot"]),
            rate=float(d["rate"]),
            maturity=float(d["maturity"]),
            dividend=float(d.get("dividend", 0.0)),
            sigma_atm=float(d.get("sigma_atm", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LevyError):
            raise
        raise ParseError(f"malformed market description: {exc!r}") from exc


def load_model(ref):
    return model_from_dict(_read_json(ref))


def load_market(ref):
    return market_from_dict(_read_json(ref))


# --- commands -------------------------------------------------------------

def _cmd_calibrate(args, out):
    series = load_returns(args.returns, args.mode, min_rows=args.min_rows)
    fit = fit_nig_mle(series)
    rn = esscher_transform(fit.params, args.rate, args.dividend)
    model = LevyModel.from_nig_params(rn, args.rate, args.dividend)
    _emit({
        "n_obs": fit.n_obs,
        "physical": _params_dict(fit.params),
        "stderr": fit.stderr,
        "loglik": fit.loglik,
        "grad_norm": fit.grad_norm,
        "risk_neutral": _params_dict(rn),
        "martingale_gap": martingale_gap(model),
        "rate": args.rate,
        "dividend": args.dividend,
    }, out)
    return 0


def _params_dict(p: NIGParams):
    return {"mu": p.mu, "alpha": p.alpha, "delta": p.delta, "beta": p.beta}


def _cmd_price(args, out):
    market = load_market(args.market)
    if args.product == "asset-or-nothing":
        res = asset_or_nothing_symmetric(market)
    elif args.product == "power-down-in":
        res = price_down_and_in_power(load_model(args.model), market, args.mode)
    else:
        method = args.method or "exact"
        if method == "shortcut":
            if args.x != 0.0:
                raise ParameterError("the shortcut prices only the at-the-money digital (x = 0)")
            res = digital_symmetric(market, args.side)
        else:
            model = load_model(args.model)
            if method == "exact":
                res = price_digital_call_fourier(model, market, args.x, side=args.side)
            else:
                sens = sensitivities(model, market, side=args.side)
                base = digital_symmetric(market, args.side)
                beta = model.beta if args.beta is None else args.beta
                res = approx_digital(base, sens, beta, args.x, discount=market.discount)
    _emit(res.to_dict(), out)
    return 0


def _need(args, name):
    if getattr(args, name) is None:
        raise UsageError(f"--{name} is required for this command")
    return getattr(args, name)


def _cmd_sensitivities(args, out):
    model, market = load_model(args.model), load_market(args.market)
    s = sensitivities(model, market, side=args.side)
    _emit({"i_beta": s.i_beta, "i_x": s.i_x, "side": args.side, "diagnostics": s.diagnostics}, out)
    return 0


def _cmd_grid(args, out):
    market = load_market(args.market)
    if args.published_coefficients:
        sens = PUBLISHED_SENSITIVITIES
    else:
        sens = sensitivities(load_model(_need(args, "model")), market)
    base = digital_symmetric(market, "call")
    rows = approx_grid(base, sens, args.eps_beta, args.eps_x, args.points, args.points)
    text = grid_csv(rows)
    if args.out == "-":
        out.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        _emit({"rows": len(rows), "out": args.out, "i_beta": sens.i_beta, "i_x": sens.i_x}, out)
    return 0


def _cmd_verify(args, out):
    model = load_model(args.model)
    if args.check == "martingale":
        gap = martingale_gap(model)
        report = {"check": "martingale", "gap": gap, "tolerance": MARTINGALE_TOL,
                  "passed": abs(gap) <= MARTINGALE_TOL}
    elif args.check == "symmetry":
        report = {"check": "symmetry", "beta": model.beta, "symmetric": is_symmetric(model)}
        if model.variant == NIG:
            ys = [0.1, 0.3, 1.0]
            errs = [abs(float(levy_density(model, y) / (math.exp(-y) * levy_density(model, -y))) - 1.0)
                    for y in ys]
            report["max_rel_violation"] = max(errs)
        report["passed"] = report["symmetric"]
    else:
        from .montecarlo import verify_conjugation

        market = load_market(args.market) if args.market else MarketSpec(1.0, model.rate, 1.0, model.dividend)
        rep = verify_conjugation(model, market, IndicatorAbove(market.spot), args.n, args.seed)
        report = dict({"check": "conjugation", "n": args.n, "seed": args.seed}, **rep.to_dict())
    _emit(report, out)
    return 0 if report["passed"] else 3


def _within(computed, target, tol, relative=False):
    gap = abs(computed - target)
    return gap <= (tol * abs(target) if relative else tol)


def reproduce_rows():
    """Recompute the published reference values; returns a list of row dicts."""
    market = load_market("bundled:reference_market")
    physical = load_model("bundled:reference_physical")
    risk_neutral = load_model("bundled:reference_risk_neutral")
    rows = []

    def row(name, computed, target, tol, relative=False, note=""):
        ok = _within(computed, target, tol, relative)
        rows.append({"quantity": name, "published": target, "computed": computed,
                     "tolerance": tol, "relative": relative,
                     "status": "match" if ok else ("discrepancy" if note else "MISMATCH"),
                     "note": note})

    row("f0", digital_symmetric(market, "call").value, PUBLISHED["f0"], 5e-5)
    row("g0", digital_symmetric(market, "put").value, PUBLISHED["g0"], 5e-5)
    rn = esscher_transform(physical.nig, market.rate, market.dividend)
    row("beta_star", rn.beta, PUBLISHED["beta_star"], 0.01)
    for label, factor in (("per-unit", 1.0), ("annualised x252", 252.0)):
        p = risk_neutral.nig.scaled_time(factor)
        m = LevyModel.from_nig_params(p, market.rate, market.dividend)
        s = sensitivities(m, market)
        note = "sign reconciled by finite differences; magnitude compared"
        row(f"I_beta [{label}]", abs(s.i_beta), PUBLISHED["i_beta"], 0.05, True, note)
        row(f"I_x [{label}]", abs(s.i_x), PUBLISHED["i_x"], 0.05, True, note)
    power = price_down_and_in_power(risk_neutral, market, REPRODUCTION)
    row("power_price", power.value, PUBLISHED["power_price"], 1e-4)
    return rows


def _cmd_reproduce(args, out):
    rows = reproduce_rows()
    if args.json:
        _emit(rows, out)
        return 0
    out.write(f"{'quantity':<26}{'published':>12}{'computed':>22}{'tol':>10}  status\n")
    for r in rows:
        tol = f"{r['tolerance']:.0e}" + ("r" if r["relative"] else "")
        out.write(f"{r['quantity']:<26}{r['published']:>12.6g}{r['computed']:>22.12g}{tol:>10}  {r['status']}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="levybarrier", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("calibrate", help="fit NIG to returns and risk-neutralise")
    c.add_argument("--returns", required=True)
    c.add_argument("--mode", choices=["prices", "logreturns"], default="prices")
    c.add_argument("--rate", type=float, required=True)
    c.add_argument("--dividend", type=float, default=0.0)
    c.add_argument("--min-rows", type=int, default=None)
    c.set_defaults(func=_cmd_calibrate)

    pr = sub.add_parser("price", help="price a contract")
    psub = pr.add_subparsers(dest="product", parser_class=_Parser)
    d = psub.add_parser("digital")
    d.add_argument("--side", choices=["call", "put"], default="call")
    g = d.add_mutually_exclusive_group()
    g.add_argument("--exact", dest="method", action="store_const", const="exact")
    g.add_argument("--shortcut", dest="method", action="store_const", const="shortcut")
    g.add_argument("--approx", dest="method", action="store_const", const="approx")
    d.add_argument("--model")
    d.add_argument("--market", required=True)
    d.add_argument("--x", type=float, default=0.0)
    d.add_argument("--beta", type=float, default=None, help="skew for --approx (default: model's)")
    d.set_defaults(func=_cmd_price)
    a = psub.add_parser("asset-or-nothing")
    a.add_argument("--market", required=True)
    a.set_defaults(func=_cmd_price)
    w = psub.add_parser("power-down-in")
    w.add_argument("--model", required=True)
    w.add_argument("--market", required=True)
    w.add_argument("--mode", choices=[REPRODUCTION, RIGOROUS], default=REPRODUCTION)
    w.set_defaults(func=_cmd_price)

    s = sub.add_parser("sensitivities", help="I_beta and I_x at the symmetric point")
    s.add_argument("--model", required=True)
    s.add_argument("--market", required=True)
    s.add_argument("--side", choices=["call", "put"], default="call")
    s.set_defaults(func=_cmd_sensitivities)

    gr = sub.add_parser("grid", help="approximate digital prices over a (beta, x) grid as CSV")
    gr.add_argument("--model")
    gr.add_argument("--market", required=True)
    gr.add_argument("--eps-beta", type=float, default=0.01)
    gr.add_argument("--eps-x", type=float, default=0.01)
    gr.add_argument("--points", type=int, default=21)
    gr.add_argument("--published-coefficients", action="store_true",
                    help="use the published I_beta, I_x instead of computing them")
    gr.add_argument("--out", required=True, help="CSV path or '-' for stdout")
    gr.set_defaults(func=_cmd_grid)

    v = sub.add_parser("verify", help="martingale, symmetry or conjugation checks")
    v.add_argument("check", choices=["conjugation", "martingale", "symmetry"])
    v.add_argument("--model", required=True)
    v.add_argument("--market")
    v.add_argument("--n", type=int, default=1_000_000)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=_cmd_verify)

    rp = sub.add_parser("reproduce-paper", help="recompute the published numerical example")
    rp.add_argument("--json", action="store_true")
    rp.set_defaults(func=_cmd_reproduce)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            raise UsageError("missing command")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
        return args.func(args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n{parser.format_usage()}")
        return 1
    except NUMERICAL as exc:
        err.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return 3
    except (ParseError, ParameterError, InsufficientData, UnsupportedVariant, LevyError, OSError) as exc:
        err.write(f"input error: {type(exc).__name__}: {exc}\n")
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
