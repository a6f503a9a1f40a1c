import json

import jsonschema
import pytest

from toruslab import report
from toruslab.cli import EXIT_INVARIANT, EXIT_PASS, EXIT_SOLVER, EXIT_USAGE, cli_run, parse_grid
from toruslab.config import DEFAULTS, ConfigError, config_hash, load_config, parse_config


def test_zoo_list(capsys):
    code, _ = cli_run(["zoo", "list"])
    assert code == EXIT_PASS
    out = capsys.readouterr().out
    for name in ("clifford", "bimr", "nonisotropic", "homogeneous"):
        assert name in out


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--surface", "nosuch"],
        ["verify", "--surface", "clifford", "--grid", "15x16"],
        ["verify", "--surface", "clifford", "--grid", "axb"],
        ["spectrum"],
        ["frobnicate"],
        ["verify", "--surface", "clifford", "--suite", "nosuch"],
        ["variation", "--surface", "clifford", "--direction", "omega2", "--grid", "16x16"],
        ["verify", "--surface", "homogeneous", "--params", "radii=1"],
    ],
)
def test_usage_errors(argv):
    assert cli_run(argv)[0] == EXIT_USAGE


def test_grid_parsing():
    assert parse_grid("64x32") == (64, 32)
    assert parse_grid("16") == (16, 16)


def test_analyze_clifford_in_s4(tmp_path):
    out = tmp_path / "r.json"
    csv_path = tmp_path / "r.csv"
    code, doc = cli_run(["analyze", "--surface", "clifford", "--ambient", "4", "--grid", "64x64",
                         "--out", str(out), "--csv", str(csv_path)])
    assert code == EXIT_PASS
    assert doc["spectrum"]["index"] == 6
    saved = json.loads(out.read_text())
    report.validate(saved)
    assert saved["config_hash"] == config_hash(DEFAULTS)
    assert {s["name"] for s in saved["suites"]} == {"structure", "jacobi", "sections", "variation"}
    assert csv_path.read_text().startswith("suite,check,value")


def test_verify_bimr_sections():
    code, doc = cli_run(["verify", "--surface", "bimr", "--suite", "sections", "--grid", "32x32"])
    assert code == EXIT_PASS
    checks = doc["suites"][0]["checks"]
    residuals = [c for c in checks if c["relation"] == "<" and c["limit"] <= 1e-8]
    assert residuals and all(c["value"] < 1e-8 for c in residuals)


def test_report_is_deterministic(tmp_path):
    argv = ["verify", "--surface", "clifford", "--suite", "structure", "--grid", "16x16"]
    a = cli_run(argv + ["--out", str(tmp_path / "a.json")])
    b = cli_run(argv + ["--out", str(tmp_path / "b.json")])
    assert a[0] == b[0] == EXIT_PASS
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()


def test_spectrum_command_and_export(tmp_path, capsys):
    trip = tmp_path / "k.txt"
    code, doc = cli_run(["spectrum", "--surface", "bimr", "--grid", "12x12", "--num-eigs", "30", "--export", str(trip)])
    assert code == EXIT_PASS
    assert doc["spectrum"]["index"] == 8
    assert trip.read_text().startswith("# format toruslab-triplet 1")
    assert "index 8" in capsys.readouterr().out


def test_variation_command():
    code, doc = cli_run(["variation", "--surface", "nonisotropic", "--direction", "omega2", "--grid", "32x32"])
    assert code == EXIT_PASS
    v = doc["variation"]
    assert -2 < v["fd"] / v["norm2"] < 0


def test_invariant_failure_exit_code(tmp_path):
    cfg = tmp_path / "strict.cfg"
    cfg.write_text("residual_tol = 1e-30\n")
    code, doc = cli_run(["verify", "--surface", "clifford", "--suite", "structure", "--grid", "16x16", "--config", str(cfg)])
    assert code == EXIT_INVARIANT
    assert doc["passed"] is False


def test_solver_failure_exit_code(tmp_path):
    cfg = tmp_path / "solver.cfg"
    cfg.write_text("dense_max_dim = 0\nmaxiter = 2\niter_tol = 1e-14\n")
    code, _ = cli_run(["spectrum", "--surface", "bimr", "--grid", "16x16", "--config", str(cfg)])
    assert code == EXIT_SOLVER


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no_such_key = 3\n")
    assert cli_run(["verify", "--surface", "clifford", "--grid", "16x16", "--config", str(cfg)])[0] == EXIT_USAGE


def test_config_parsing():
    cfg = parse_config("# comment\nseed = 7\nsigma = 1e5  # penalty\n\nnum_eigs=12\n")
    assert cfg["seed"] == 7 and cfg["sigma"] == 1e5 and cfg["num_eigs"] == 12
    assert cfg["null_tol"] == DEFAULTS["null_tol"]
    with pytest.raises(ConfigError):
        parse_config("seed = seven")
    with pytest.raises(ConfigError):
        parse_config("seed 7")
    with pytest.raises(ConfigError):
        load_config(None, {"bogus": 1})


def test_config_hash():
    a = config_hash(DEFAULTS)
    assert a == config_hash(dict(DEFAULTS)) and len(a) == 64
    assert config_hash({**DEFAULTS, "seed": 1}) != a


def test_report_schema_rejects_incomplete_documents():
    doc = report.build_report({"name": "clifford", "ambient": 3}, (8, 8), DEFAULTS, [])
    bad = dict(doc)
    del bad["config_hash"]
    with pytest.raises(jsonschema.ValidationError):
        report.validate(bad)
    with pytest.raises(jsonschema.ValidationError):
        report.validate({**doc, "schema_version": "0"})
