from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from scipy import stats

from levybarrier import LevyModel, NIGParams, esscher_transform, fit_nig_mle, load_returns, martingale_gap
from levybarrier.calibration import ReturnsSeries, moment_init
from levybarrier.errors import InsufficientData, NoRootInBracket, ParseError
from levybarrier.montecarlo import sample_nig_terminal


def _write(tmp_path, lines, name="data.csv"):
    p = tmp_path / name
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def test_three_prices_give_two_returns(tmp_path):
    p = _write(tmp_path, ["date,close", "2020-01-01,100", "2020-01-02,101", "2020-01-03,100"])
    with pytest.raises(InsufficientData):
        load_returns(p)
    r = load_returns(p, min_rows=3)
    assert r.values == pytest.approx([math.log(1.01), -math.log(1.01)], rel=1e-15)


def test_constant_prices_give_zero_returns(tmp_path):
    rows = [f"2020-02-{d:02d},50.5" for d in range(1, 29)] + [f"2020-03-{d:02d},50.5" for d in range(1, 5)]
    r = load_returns(_write(tmp_path, rows))
    assert len(r) == 31
    assert np.all(r.values == 0.0)


def test_parse_error_reports_line(tmp_path):
    p = _write(tmp_path, ["date,close", "2010-01-01,1", "2010-01-04,abc"])
    with pytest.raises(ParseError, match="line 3"):
        load_returns(p, min_rows=1)


def test_non_increasing_dates_rejected(tmp_path):
    p = _write(tmp_path, ["2010-01-02,1", "2010-01-01,2"])
    with pytest.raises(ParseError, match="line 2"):
        load_returns(p, min_rows=1)


def test_logreturns_mode_without_header(tmp_path):
    vals = np.linspace(-0.01, 0.01, 30)
    p = _write(tmp_path, [f"{v:.17g}" for v in vals])
    assert np.array_equal(load_returns(p, "logreturns").values, vals)


def test_moment_init_close_to_truth():
    p = NIGParams(0.001, 40.0, 0.01, -8.0)
    x = sample_nig_terminal(p, 1.0, 200_000, seed=5)
    init = moment_init(x)
    assert init.alpha == pytest.approx(40.0, rel=0.3)
    assert init.beta == pytest.approx(-8.0, rel=0.5)


def test_mle_recovers_parameters():
    truth = NIGParams(0.001, 40.0, 0.01, -8.0)
    x = sample_nig_terminal(truth, 1.0, 50_000, seed=11)
    fit = fit_nig_mle(ReturnsSeries(x))
    for name in ("mu", "alpha", "delta", "beta"):
        z = (getattr(fit.params, name) - getattr(truth, name)) / fit.stderr[name]
        assert abs(z) < 3, (name, z)
    assert fit.grad_norm < 1e-6
    assert all(b <= a + 1e-12 for a, b in zip(fit.trace, fit.trace[1:]))


def test_mle_beats_perturbations():
    x = stats.norminvgauss(2.0, -0.5, loc=0.0, scale=1.0).rvs(size=2000, random_state=3)
    fit = fit_nig_mle(x)
    from levybarrier.nig import nig_logpdf

    best = float(np.sum(nig_logpdf(fit.params, x)))
    for d in ([1.02, 1, 1, 1], [1, 1.02, 1, 1], [1, 1, 1.02, 1], [1, 1, 1, 0.9]):
        q = NIGParams(fit.params.mu + 0.01 * (d[0] - 1), fit.params.alpha * d[1],
                      fit.params.delta * d[2], fit.params.beta * d[3])
        assert float(np.sum(nig_logpdf(q, x))) < best


def test_mle_on_gaussian_data_is_near_gaussian():
    rng = np.random.default_rng(0)
    x = rng.normal(0.0, 0.01, 20_000)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_nig_mle(x)
    from scipy.integrate import quad
    from levybarrier.nig import nig_logpdf

    g = stats.norm(0.0, 0.01)
    kl = quad(lambda y: g.pdf(y) * (g.logpdf(y) - float(nig_logpdf(fit.params, y))), -0.08, 0.08, limit=200)[0]
    assert kl < 1e-3


def test_too_few_returns():
    with pytest.raises(InsufficientData):
        fit_nig_mle(np.zeros(10))


def test_esscher_reaches_martingale(physical_params):
    rn = esscher_transform(physical_params, 0.0012)
    gap = martingale_gap(LevyModel.from_nig_params(rn, 0.0012))
    assert abs(gap) < 1e-10
    assert (rn.mu, rn.alpha, rn.delta) == (physical_params.mu, physical_params.alpha, physical_params.delta)
    assert rn.beta == pytest.approx(-4.0198, abs=1e-4)


def test_esscher_idempotent(physical_params):
    once = esscher_transform(physical_params, 0.0012)
    assert esscher_transform(once, 0.0012) == once


def test_esscher_no_root():
    # drift so large that no tilt can bring kappa(1) down to r
    p = NIGParams(5.0, 3.0, 0.01, 0.0)
    with pytest.raises(NoRootInBracket):
        esscher_transform(p, 0.0)
