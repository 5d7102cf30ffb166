from __future__ import annotations

import pytest

from levybarrier import LevyModel, MarketSpec, NIGParams

RATE = 0.0012


@pytest.fixture
def market():
    return MarketSpec(1.0, RATE, 1.0, 0.0, sigma_atm=0.2741)


@pytest.fixture
def physical_params():
    return NIGParams(0.0018, 49.99, 0.0085, -9.22)


@pytest.fixture
def rn_model():
    return LevyModel.from_nig_params(NIGParams(0.0018, 49.99, 0.0085, -4.18), RATE)


@pytest.fixture
def sym_model():
    return LevyModel.nig_risk_neutral(49.99, -0.5, 0.0085, RATE)
