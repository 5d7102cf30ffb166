from __future__ import annotations

import io
import json

import numpy as np
import pytest

from levybarrier.cli import dumps, run
from levybarrier.montecarlo import sample_nig_terminal
from levybarrier.nig import NIGParams

MARKET = "bundled:reference_market"
RN = "bundled:reference_risk_neutral"


def _run(args):
    out, err = io.StringIO(), io.StringIO()
    code = run(args, out, err)
    return code, out.getvalue(), err.getvalue()


def test_shortcut_digital_json():
    code, out, _ = _run(["price", "digital", "--side", "call", "--shortcut", "--market", MARKET])
    assert code == 0
    res = json.loads(out)
    assert res["method"] == "shortcut"
    assert "abs_err" in res
    assert res["value"] == pytest.approx(0.4449, abs=1e-4)


def test_output_byte_identical():
    args = ["price", "digital", "--exact", "--model", RN, "--market", MARKET, "--x", "0.01"]
    assert _run(args)[1] == _run(args)[1]


def test_exact_and_put_prices_sum_to_discount():
    c = json.loads(_run(["price", "digital", "--model", RN, "--market", MARKET])[1])["value"]
    p = json.loads(_run(["price", "digital", "--side", "put", "--model", RN, "--market", MARKET])[1])["value"]
    assert c + p == pytest.approx(np.exp(-0.0012), abs=1e-15)


def test_verify_martingale_on_esscher_model():
    code, out, _ = _run(["verify", "martingale", "--model", "bundled:esscher_model"])
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_martingale_fails_on_physical():
    code, out, _ = _run(["verify", "martingale", "--model", "bundled:reference_physical"])
    assert code == 3 and json.loads(out)["passed"] is False


def test_verify_conjugation_seeded():
    args = ["verify", "conjugation", "--model", RN, "--n", "100000", "--seed", "3"]
    code, out, _ = _run(args)
    assert code == 0
    assert out == _run(args)[1]


def test_power_and_asset_or_nothing():
    code, out, _ = _run(["price", "power-down-in", "--model", RN, "--market", MARKET])
    assert code == 0 and json.loads(out)["method"] == "conjugation"
    code, out, _ = _run(["price", "asset-or-nothing", "--market", MARKET])
    assert code == 0 and json.loads(out)["diagnostics"]["barrier"] == 1


def test_sensitivities_command():
    code, out, _ = _run(["sensitivities", "--model", RN, "--market", MARKET])
    res = json.loads(out)
    assert code == 0 and res["diagnostics"]["rel_gap_x"] < 1e-3


def test_grid_command(tmp_path):
    path = tmp_path / "grid.csv"
    code, _, _ = _run(["grid", "--published-coefficients", "--market", MARKET,
                       "--eps-beta", "0.02", "--eps-x", "0.01", "--points", "5", "--out", str(path)])
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "beta,x,price" and len(lines) == 26


def test_calibrate_command(tmp_path):
    x = sample_nig_terminal(NIGParams(0.0018, 49.99, 0.0085, -9.22), 1.0, 3000, seed=1)
    p = tmp_path / "r.csv"
    p.write_text("logret\n" + "".join(f"{v:.17g}\n" for v in x))
    code, out, err = _run(["calibrate", "--returns", str(p), "--mode", "logreturns", "--rate", "0.0012"])
    assert code == 0, err
    res = json.loads(out)
    assert abs(res["martingale_gap"]) < 1e-10
    assert set(res["stderr"]) == {"mu", "alpha", "delta", "beta"}


def test_reproduce_table_rows():
    code, out, _ = _run(["reproduce-paper", "--json"])
    assert code == 0
    names = [r["quantity"] for r in json.loads(out)]
    for key in ("f0", "g0", "beta_star", "power_price"):
        assert key in names
    assert any(n.startswith("I_beta") for n in names) and any(n.startswith("I_x") for n in names)


@pytest.mark.parametrize("args, code", [
    ([], 1),
    (["price"], 1),
    (["price", "digital", "--bogus"], 1),
    (["price", "digital", "--market", "/nonexistent.json", "--shortcut"], 2),
    (["calibrate", "--returns", "/nonexistent.csv", "--rate", "0"], 2),
])
def test_exit_codes(args, code):
    assert _run(args)[0] == code


def test_malformed_model_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"variant": "nig", "params": {"alpha": 1.0}, "rate": 0.0}))
    assert _run(["price", "digital", "--model", str(p), "--market", MARKET])[0] == 2


def test_numerical_failure_exit_code(tmp_path):
    p = tmp_path / "m.json"
    # alpha too small for exp(X) to have a mean: no martingale drift exists
    p.write_text(json.dumps({"variant": "nig", "params": {"alpha": 0.8, "delta": 0.1, "beta": 0.5},
                             "drift": "martingale", "rate": 0.0012}))
    code, _, err = _run(["price", "digital", "--model", str(p), "--market", MARKET])
    assert code == 3 and "StripViolation" in err


def test_dumps_seventeen_digits():
    assert dumps({"b": 0.1, "a": [1, True, None]}) == '{"b": 0.10000000000000001, "a": [1, true, null]}'
