import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from qfsc.cli import check_rng, main, sweep_cutoff
from qfsc.config import ConfigError, config_from_dict, load_config, parse_complex_array

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_bundled_default_matches_repo_copy():
    a, b = load_config(), load_config(CONFIGS / "default.toml")
    assert a.to_dict() == b.to_dict()
    assert (a.d, a.bins, a.cutoff, a.kind) == (1, 2, 10, "gauge")


def test_parse_complex_array():
    np.testing.assert_array_equal(parse_complex_array(["1+2i", 3, "-0.5j"], "x"), [1 + 2j, 3, -0.5j])
    with pytest.raises(ConfigError):
        parse_complex_array(["abc"], "x")
    with pytest.raises(ConfigError):
        parse_complex_array([[1, 2], [3]], "x")
    with pytest.raises(ConfigError):
        parse_complex_array([True], "x")


@pytest.mark.parametrize("raw,msg", [
    ({"bogus": {}}, "unknown section"),
    ({"model": {"d": 1, "colour": 2}}, "unknown key"),
    ({"model": {"d": 1.5}}, "integer"),
    ({"model": {"cutoff": 1}}, "cutoff"),
    ({"state": {"kind": "thermal"}}, "kind"),
    ({"state": {"T": [[1, 0], [0, 1]]}}, "dimension"),
    ({"state": {"T": 0.0}}, "not injective"),
    ({"state": {"T": -1.0}}, "not positive"),
    ({"state": {"kind": "squeezed", "P": -0.2}}, "P is not positive"),
    ({"functions": {"f": [1, 2, 3]}}, "entries"),
    ({"run": {"seed": -1}}, "seed"),
])
def test_config_validation(raw, msg):
    with pytest.raises(ConfigError, match=msg):
        config_from_dict(raw)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(_write(tmp_path, "[model\n"))


def test_rng_streams_are_name_dependent():
    a = check_rng(1, "x").normal(size=3)
    np.testing.assert_array_equal(a, check_rng(1, "x").normal(size=3))
    assert not np.allclose(a, check_rng(1, "y").normal(size=3))


def test_check_squeezed_config_passes(tmp_path):
    out = tmp_path / "r.json"
    assert main(["check", "--config", str(CONFIGS / "squeezed.toml"), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["summary"]["failed"] == 0
    assert set(rep) == {"version", "seed", "config", "checks", "summary", "timestamp"}
    assert {"name", "paper_ref", "status", "max_deviation", "tolerance", "params", "details"} <= set(rep["checks"][0])


def test_fock_state_rejected_with_exit_2(tmp_path, capsys):
    assert main(["check", "--config", str(CONFIGS / "fock_strict.toml"), "--out", str(tmp_path / "r.json")]) == 2
    assert "T not injective in bin 1" in capsys.readouterr().err


def test_non_symplectic_config_fails_with_exit_1(tmp_path):
    out = tmp_path / "r.json"
    assert main(["check", "--config", str(CONFIGS / "scaled.toml"), "--out", str(out)]) == 1
    status = {c["name"]: c["status"] for c in json.loads(out.read_text())["checks"]}
    assert status["phase_space.symplectic"] == "fail"


def test_usage_errors():
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["check", "--seed", "-3"]) == 2


def test_expect_command(capsys, tmp_path):
    out = tmp_path / "e.json"
    assert main(["expect", "--word", "W(f)*W(f)", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["exact"][0] == pytest.approx(1.0)
    assert res["diff"] <= 1e-8
    assert main(["expect", "--word", "W(f) +"]) == 2
    assert "position" in capsys.readouterr().err
    assert main(["expect", "--word", "W(q)"]) == 2
    assert main(["expect"]) == 2


def test_modular_command(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["modular", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["closed_form_max_diff"] <= 1e-10
    assert res["s_squared_deviation"] <= 1e-12
    assert "delta^1/2" in capsys.readouterr().out


def _sweep(args, capsys):
    assert main(["sweep", *args]) == 0
    return list(csv.reader(io.StringIO(capsys.readouterr().out)))


def test_sweep_header_and_empty(capsys):
    assert _sweep(["--values", ""], capsys) == [["bins", "cutoff", "quantity", "value"]]


def test_sweep_bins_residual_decreases(capsys):
    rows = _sweep(["--dimension", "bins", "--values", "2,4"], capsys)
    res = [float(r[3]) for r in rows[1:] if r[2] == "exp_residual"]
    cf = [float(r[3]) for r in rows[1:] if r[2] == "exp_residual_closed_form"]
    assert res[1] < res[0]
    np.testing.assert_allclose(res, cf, rtol=1e-6)


def test_sweep_cutoff_monotone(capsys):
    rows = _sweep(["--dimension", "cutoff", "--values", "6,8"], capsys)
    weyl = [float(r[3]) for r in rows[1:] if r[2] == "weyl_action_deviation"]
    assert weyl[1] < weyl[0]


def test_sweep_cutoff_cap():
    assert sweep_cutoff(16, 10) == 6
    assert sweep_cutoff(4, 10) == 10


def test_martingale_command(tmp_path, capsys):
    out = tmp_path / "mg.json"
    assert main(["martingale", "--bins", "2,4", "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["roundtrip_error"] <= 1e-10
    assert res["residuals"][1]["residual"] < res["residuals"][0]["residual"]
