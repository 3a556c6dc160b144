import json

import numpy as np
import pytest
import yaml

from nvbath.cli import format_value, main, table_text, write_results
from nvbath.config import load_config
from nvbath.scenarios import ResultTable, RunResult, run_scenario

TWO_LEVEL_SWEEP = """\
scenario: two-level
units:
  frequency: rad/us
model:
  rabi: 1.0
  detuning: 0.0
  gamma1: 1.0
  a_e: [0.001, 0.0, 0.0005]
sweep:
  parameter: model.zeeman
  values: {start: 0.001, stop: 0.004, num: 4}
"""

SQUEEZE = """\
scenario: squeeze
units:
  frequency: rad/us
model:
  rabi: 0.5
  detuning: 2.0
  gamma1: 1.0
  coupling: 0.01
  n_nuclei: 100
"""

SMALL_CPT = """\
scenario: cpt
preset: togan2011
ensemble:
  n: 2
experiment:
  readout_rabi: [3.2]
grids:
  detuning: [-0.2, 0.0, 0.2]
  rabi: [1.0, 2.0]
  time: [0.0, 100.0]
  readout: [-0.5, 0.0, 0.5]
"""


def _write(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_two_level_schema():
    res = run_scenario(load_config(TWO_LEVEL_SWEEP))
    t = res.table("rates")
    assert t.columns[:7] == ["zeeman", "gamma_phi_analytic", "gamma_phi_numeric",
                             "gamma_1_analytic", "gamma_1_numeric", "T1", "T2"]
    assert t.rows.shape == (4, len(t.columns))
    np.testing.assert_allclose(t.column("zeeman"), [0.001, 0.002, 0.003, 0.004])
    np.testing.assert_allclose(t.column("T1"), 1 / (2 * t.column("gamma_1_numeric")))


def test_single_point_sweep_gives_single_row():
    cfg = load_config(SQUEEZE + "sweep:\n  parameter: model.rabi\n  values: [0.5]\n")
    t = run_scenario(cfg).table("coefficients")
    assert t.rows.shape[0] == 1
    assert t.column("p11")[0] == pytest.approx(1 / 70)


def test_noise_scenario_includes_oracle():
    cfg = load_config("scenario: noise\npreset: togan2011\nexperiment:\n  zeeman_prep: 0.0\n"
                      "ensemble:\n  n: 6\n")
    res = run_scenario(cfg)
    lattice = res.table("lattice")
    assert lattice.columns == ["h", "p_analytic", "p_bruteforce"]
    assert lattice.rows.shape == (7, 3)
    summary = res.summary["noise"]
    assert {"h_star", "sigma_ratio", "tv_distance"} <= set(summary)
    assert summary["tv_distance"] <= 0.05


def test_cpt_scenario_tables():
    res = run_scenario(load_config(SMALL_CPT))
    names = [t.name for t in res.tables]
    assert names == ["ey_population", "n14_rabi", "n14_trace", "c13_weights", "fluorescence"]
    assert res.table("ey_population").header.startswith("delta:rad_per_us,Ey_population:dimensionless")
    assert res.table("fluorescence").rows.shape == (3, 6)
    assert set(res.summary) == {"cpt", "n14", "c13", "dip_width"}


def test_table_validation_and_format():
    with pytest.raises(ValueError):
        ResultTable("bad", ["a", "b"], ["us"], [[1.0, 2.0]])
    t = ResultTable("t", ["x", "y"], ["us", "dimensionless"], [[0.1, np.inf]])
    assert table_text(t) == "x:us,y:dimensionless\n0.10000000000000001,inf\n"
    assert float(format_value(1 / 3)) == 1 / 3


def test_empty_table_list_writes_summary_only(tmp_path):
    paths = write_results(RunResult([], {}), tmp_path / "out", "json", {"version": "x"})
    assert [p.name for p in paths] == ["summary.json"]
    assert json.loads(paths[0].read_text())["metadata"] == {"version": "x"}


def test_run_is_byte_identical(tmp_path):
    cfg = _write(tmp_path, TWO_LEVEL_SWEEP)
    assert main(["run", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    for name in ("rates.csv", "summary.yaml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    summary = yaml.safe_load((tmp_path / "a" / "summary.yaml").read_text())
    assert summary["metadata"]["scenario"] == "two-level"
    assert len(summary["metadata"]["config_sha256"]) == 64


def test_workers_from_environment(tmp_path, monkeypatch):
    cfg = _write(tmp_path, TWO_LEVEL_SWEEP)
    monkeypatch.setenv("NVBATH_WORKERS", "2")
    assert main(["run", cfg, "--out", str(tmp_path / "env")]) == 0
    monkeypatch.setenv("NVBATH_WORKERS", "many")
    assert main(["run", cfg, "--out", str(tmp_path / "bad")]) == 2


def test_validate_and_presets(tmp_path, capsys):
    assert main(["validate", _write(tmp_path, SQUEEZE)]) == 0
    assert "valid squeeze configuration" in capsys.readouterr().out
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "togan2011" in out and "model.gamma_ce" in out


def test_exit_codes(tmp_path):
    assert main(["validate", _write(tmp_path, "scenario: nope\n", "bad.yaml")]) == 2
    resonant = SQUEEZE.replace("detuning: 2.0", "detuning: 0.0")
    assert main(["run", _write(tmp_path, resonant, "res.yaml"), "--out", str(tmp_path / "r")]) == 3
    assert main(["run", str(tmp_path / "absent.yaml")]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", _write(tmp_path, SQUEEZE, "sq.yaml"), "--out", str(blocker / "sub")]) == 4
