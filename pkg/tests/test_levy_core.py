from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from levybarrier import (
    LevyModel,
    NIGParams,
    cumulant,
    cumulant_beta_derivative,
    is_symmetric,
    levy_density,
    martingale_gap,
    symmetry_beta,
)
from levybarrier.errors import DomainError, StripViolation, UnsupportedVariant


def test_cumulant_vanishes_at_zero(rn_model):
    assert cumulant(rn_model, 0.0) == 0
    assert cumulant(LevyModel.black_scholes(0.3, 0.01), 0.0) == 0


def test_black_scholes_exponent_matches_gaussian():
    m = LevyModel.black_scholes(0.25, 0.03, 0.01)
    z = 1.7
    drift = 0.03 - 0.01 - 0.5 * 0.25**2
    assert cumulant(m, z) == pytest.approx(1j * z * drift - 0.5 * 0.25**2 * z * z, rel=1e-14)


def test_nig_exponent_matches_characteristic_function():
    # Monte-Carlo free oracle: numerical Fourier transform of the density
    from levybarrier import nig_density

    p = NIGParams(0.1, 3.0, 0.8, -0.7)
    m = LevyModel.from_nig_params(p, 0.0)
    z = 0.9
    re = quad(lambda x: math.cos(z * x) * nig_density(p, x), -60, 60, limit=400)[0]
    im = quad(lambda x: math.sin(z * x) * nig_density(p, x), -60, 60, limit=400)[0]
    assert np.exp(cumulant(m, z)) == pytest.approx(re + 1j * im, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-30, 30),
    st.floats(-0.45, 0.45),
)
def test_conjugate_symmetry(re, frac):
    m = LevyModel.from_nig_params(NIGParams(0.0018, 49.99, 0.0085, -4.18), 0.0012)
    lo, hi = m.strip
    im = 0.5 * (lo + hi) + frac * (hi - lo)
    z = complex(re, im)
    lhs = cumulant(m, -z.conjugate())
    assert lhs == pytest.approx(np.conj(cumulant(m, z)), rel=1e-12, abs=1e-15)


def test_strip_edges_raise(rn_model):
    lo, hi = rn_model.strip
    assert (lo, hi) == pytest.approx((-4.18 - 49.99, -4.18 + 49.99))
    with pytest.raises(StripViolation):
        cumulant(rn_model, complex(0.0, hi))
    with pytest.raises(StripViolation):
        cumulant(rn_model, complex(1.0, lo))
    cumulant(rn_model, complex(0.0, hi - 1e-9))


def test_beta_derivative_spec_point():
    m = LevyModel.from_nig_params(NIGParams(0.0, 2.0, 1.0, 0.0), 0.0)
    assert cumulant_beta_derivative(m, -1j) == pytest.approx(1 / math.sqrt(3), rel=1e-14)
    assert cumulant_beta_derivative(m, 0.0) == 0


@pytest.mark.parametrize("martingale", [False, True])
def test_beta_derivative_matches_finite_differences(martingale):
    rng = np.random.default_rng(3)
    if martingale:
        m = LevyModel.nig_risk_neutral(12.0, -2.0, 0.4, 0.02)
    else:
        m = LevyModel.from_nig_params(NIGParams(0.01, 12.0, 0.4, -2.0), 0.02)
    h = 1e-6
    up, dn = m.with_beta(-2.0 + h), m.with_beta(-2.0 - h)
    lo, hi = m.strip
    for _ in range(20):
        z = complex(rng.uniform(-20, 20), rng.uniform(lo + 1, hi - 1))
        fd = (cumulant(up, z) - cumulant(dn, z)) / (2 * h)
        assert cumulant_beta_derivative(m, z) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_beta_derivative_black_scholes_unsupported():
    with pytest.raises(UnsupportedVariant):
        cumulant_beta_derivative(LevyModel.black_scholes(0.2, 0.0), 0.3)


def test_martingale_gap_examples(physical_params, rn_model):
    bs = LevyModel.black_scholes(0.2741, 0.0012)
    assert abs(martingale_gap(bs)) < 1e-17
    assert abs(martingale_gap(rn_model)) < 1e-4
    raw = LevyModel.from_nig_params(physical_params, 0.0012)
    assert martingale_gap(raw) == pytest.approx(-9e-4, abs=5e-5)
    assert martingale_gap(LevyModel.nig_risk_neutral(49.99, -4.18, 0.0085, 0.0012)) == pytest.approx(0, abs=1e-15)


def test_risk_neutral_needs_exponential_moment():
    with pytest.raises(StripViolation):
        LevyModel.nig_risk_neutral(2.0, 1.5, 0.1, 0.0)


def test_symmetry_flags(rn_model, sym_model):
    assert is_symmetric(sym_model)
    assert not is_symmetric(rn_model)
    assert is_symmetric(LevyModel.black_scholes(0.2, 0.0))
    assert symmetry_beta(rn_model) == -4.18


@pytest.mark.parametrize("beta, holds", [(-0.5, True), (-0.4, False)])
def test_levy_density_symmetry_condition(beta, holds):
    m = LevyModel.nig_risk_neutral(49.99, beta, 0.0085, 0.0012)
    y = np.array([0.01, 0.05, 0.2, 0.5])
    ratio = levy_density(m, y) / (np.exp(-y) * levy_density(m, -y))
    assert np.allclose(ratio, 1.0, rtol=1e-12, atol=0) == holds


def test_levy_density_undefined_at_zero(rn_model):
    with pytest.raises(DomainError):
        levy_density(rn_model, 0.0)


def test_levy_density_small_jump_integrability():
    m = LevyModel.from_nig_params(NIGParams(0.0, 2.0, 1.0, -0.5), 0.0)
    f = lambda y: y * y * levy_density(m, y)
    vals = [quad(f, eps, 1)[0] + quad(f, -1, -eps)[0] for eps in (1e-2, 1e-4, 1e-6)]
    # y^2 nu(y) -> 2 delta/pi near 0, so the cutoff error is linear in eps
    assert abs(vals[2] - vals[1]) == pytest.approx(2 / math.pi * 1e-4, rel=0.02)
    assert abs(vals[1] - vals[0]) / abs(vals[2] - vals[1]) == pytest.approx(100, rel=0.05)
    assert math.isfinite(vals[-1])


@pytest.mark.parametrize("u", [-1.0, 0.5, 1.0])
def test_cumulant_matches_levy_khintchine(u):
    p = NIGParams(0.05, 2.0, 1.0, -0.5)
    m = LevyModel.from_nig_params(p, 0.0)
    mean = p.mu + p.delta * p.beta / p.gamma
    f = lambda y: (math.exp(u * y) - 1 - u * y) * float(levy_density(m, y))
    jumps = quad(f, -120, 0, limit=400)[0] + quad(f, 0, 120, limit=400)[0]
    assert complex(m.kappa(u)).real == pytest.approx(u * mean + jumps, rel=1e-8)
