from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from levybarrier import NIGParams, nig_density
from levybarrier.errors import ParameterError
from levybarrier.nig import esscher_shift, nig_mean_variance, nig_skew_kurtosis


def _scipy_nig(p: NIGParams, t=1.0):
    d = p.delta * t
    return stats.norminvgauss(p.alpha * d, p.beta * d, loc=p.mu * t, scale=d)


@pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
def test_density_matches_scipy(physical_params, t):
    x = np.linspace(-0.05, 0.05, 41)
    ref = _scipy_nig(physical_params, t).pdf(x)
    assert np.allclose(nig_density(physical_params, x, t), ref, rtol=1e-10, atol=0)


def test_density_integrates_to_one_and_moments(physical_params):
    f = lambda x: nig_density(physical_params, x)
    mean, var = nig_mean_variance(physical_params)
    sd = math.sqrt(var)
    lo, hi = mean - 40 * sd, mean + 40 * sd
    assert quad(f, lo, hi, limit=200, points=[mean])[0] == pytest.approx(1.0, abs=1e-10)
    m1 = quad(lambda x: x * f(x), lo, hi, limit=200, points=[mean])[0]
    m2 = quad(lambda x: (x - mean) ** 2 * f(x), lo, hi, limit=200, points=[mean])[0]
    assert m1 == pytest.approx(mean, rel=1e-8)
    assert m2 == pytest.approx(var, rel=1e-8)


def test_mean_example(physical_params):
    mean, _ = nig_mean_variance(physical_params)
    assert mean == pytest.approx(0.0018 - 0.0085 * 9.22 / physical_params.gamma, rel=1e-14)
    assert mean == pytest.approx(2.05e-4, abs=5e-6)


def test_skew_kurtosis_match_scipy(physical_params):
    _, _, s, k = _scipy_nig(physical_params).stats("mvsk")
    skew, kurt = nig_skew_kurtosis(physical_params)
    assert skew == pytest.approx(float(s), rel=1e-10)
    assert kurt == pytest.approx(float(k), rel=1e-10)


def test_mode_below_mean_for_negative_skew(physical_params):
    res = minimize_scalar(lambda x: -float(nig_density(physical_params, x)),
                          bracket=(-0.01, 0.0, 0.01), method="golden", tol=1e-10)
    mean, _ = nig_mean_variance(physical_params)
    assert res.x > mean
    assert nig_density(physical_params, res.x) >= nig_density(physical_params, mean)


def test_density_positive_far_in_tails(physical_params):
    d = nig_density(physical_params, np.array([-5.0, 5.0]))
    assert np.all(np.isfinite(d))
    assert np.all(d >= 0)


def test_esscher_shift_examples(physical_params):
    assert esscher_shift(physical_params, 0.0) == physical_params
    assert esscher_shift(physical_params, 5.04).beta == pytest.approx(-4.18, abs=1e-12)
    with pytest.raises(ParameterError):
        esscher_shift(physical_params, 60.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20))
def test_esscher_shift_composes(a, b):
    p = NIGParams(0.0018, 49.99, 0.0085, -9.22)
    try:
        two = esscher_shift(esscher_shift(p, a), b)
    except ParameterError:
        return
    assert two.beta == pytest.approx(esscher_shift(p, a + b).beta, abs=1e-12)


def test_esscher_tilt_is_exponential_reweighting(physical_params):
    theta = 3.0
    tilted = esscher_shift(physical_params, theta)
    x = np.linspace(-0.03, 0.03, 7)
    norm = quad(lambda y: math.exp(theta * y) * nig_density(physical_params, y), -1, 1,
                limit=200, points=[0.0])[0]
    ref = np.exp(theta * x) * nig_density(physical_params, x) / norm
    assert np.allclose(nig_density(tilted, x), ref, rtol=1e-9)


@pytest.mark.parametrize("bad", [
    dict(mu=0.0, alpha=-1.0, delta=1.0, beta=0.0),
    dict(mu=0.0, alpha=1.0, delta=0.0, beta=0.0),
    dict(mu=0.0, alpha=1.0, delta=1.0, beta=1.0),
    dict(mu=math.nan, alpha=1.0, delta=1.0, beta=0.0),
])
def test_invalid_parameters(bad):
    with pytest.raises(ParameterError):
        NIGParams(**bad)


def test_scaling_helpers(physical_params):
    yearly = physical_params.scaled_time(252)
    assert (yearly.mu, yearly.delta) == pytest.approx((0.0018 * 252, 0.0085 * 252))
    c = -2.0
    sp = physical_params.scaled_space(c)
    x = np.array([-0.02, 0.0, 0.03])
    assert np.allclose(nig_density(sp, x), nig_density(physical_params, x / c) / abs(c), rtol=1e-12)
