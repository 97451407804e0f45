"""Config layering/validation and the command-line pipelines."""

from __future__ import annotations

import csv
import hashlib
import json

import pytest

import phasetip
from phasetip import cli, config
from phasetip.errors import ConfigError

# Fast Monte Carlo settings: tiny batch, short horizon, explicit
# collapse level (skips the bisection), coarse invariant measure.
_MC_ARGS = [
    "montecarlo", "--preset", "fig3",
    "experiment.n_runs=3", "experiment.horizon=60",
    "experiment.r_collapse=2.608984375",
    "measure.j_points=200", "measure.t_final=30",
    "measure.n_grid=64", "measure.n_bins=16",
]

_RECORD_HEADER = ["run", "t1_yr", "r_pre", "r_post", "N_b", "P_b",
                  "phi_b", "kind", "rescues", "converged_pre"]


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ----------------------------------------------------------------------
# Config assembly and validation
# ----------------------------------------------------------------------

def test_preset_merges_over_defaults():
    cfg = config.load_config(preset="fig3")
    assert cfg["model"]["kind"] == "rma"
    assert cfg["model"]["r"] == 2.47
    assert cfg["climate"]["r_low"] == 1.6
    assert cfg["climate"]["r_high"] == 2.7
    assert cfg["measure"]["r"] == 2.47
    # untouched defaults survive the merge
    assert cfg["experiment"]["n_runs"] == 1000
    assert cfg["integrator"]["rel_tol"] == 1e-8


def test_every_preset_validates_and_names_a_command():
    for name in config.PRESETS:
        cfg = config.load_config(preset=name)
        assert cfg["model"]["kind"] in ("rma", "may")
        assert config.PRESET_COMMAND[name] in cli._COMMANDS


def test_layering_order_file_overrides_flag_wins(tmp_path):
    cfg_file = tmp_path / "c.yaml"
    cfg_file.write_text("model:\n  r: 2.2\nexperiment:\n  seed: 5\n")
    cfg = config.load_config(path=str(cfg_file), preset="fig2a",
                             overrides=("experiment.seed=7",), seed=9)
    assert cfg["model"]["r"] == 2.2          # file beats preset
    assert cfg["experiment"]["seed"] == 9    # --seed beats override


def test_build_model_applies_parameter_overrides():
    cfg = config.load_config(preset="fig2a", overrides=("model.delta=2.0",))
    model = config.build_model(cfg)
    assert model.delta == 2.0
    assert model.r == 2.47


def test_missing_required_keys_are_listed():
    with pytest.raises(ConfigError, match="model.kind"):
        config.load_config()
    with pytest.raises(ConfigError, match="model.r"):
        config.load_config()


@pytest.mark.parametrize("override,fragment", [
    ("climate.rho=1.5", "climate.rho"),
    ("nosuch.key=1", "unknown config key 'nosuch'"),
    ("model.q=100", "model.q"),
    ("experiment.n_runs=2.5", "experiment.n_runs"),
    ("experiment.x0=[1]", "experiment.x0"),
    ("model.kind=lotka", "model.kind"),
])
def test_bad_values_name_the_dotted_key(override, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        config.load_config(preset="fig3", overrides=(override,))


def test_override_parsing_requires_dotted_assignment():
    with pytest.raises(ConfigError, match="section.key=value"):
        config.parse_override("noequals")
    with pytest.raises(ConfigError, match="dotted"):
        config.parse_override("model=3")
    parts, value = config.parse_override("climate.rho=0.3")
    assert parts == ["climate", "rho"]
    assert value == 0.3


def test_unknown_preset_lists_available():
    with pytest.raises(ConfigError, match="fig1a"):
        config.load_config(preset="fig99")


def test_out_dir_precedence(monkeypatch, tmp_path):
    cfg = config.default_config()
    monkeypatch.delenv(config.OUT_DIR_ENV, raising=False)
    assert config.resolve_out_dir("flagged", cfg) == "flagged"
    cfg["output"]["dir"] = "from-config"
    assert config.resolve_out_dir(None, cfg) == "from-config"
    cfg["output"]["dir"] = None
    monkeypatch.setenv(config.OUT_DIR_ENV, str(tmp_path))
    assert config.resolve_out_dir(None, cfg) == str(tmp_path)
    monkeypatch.delenv(config.OUT_DIR_ENV)
    assert config.resolve_out_dir(None, cfg).endswith("phasetip-out")


# ----------------------------------------------------------------------
# Exit codes
# ----------------------------------------------------------------------

def test_missing_config_exits_2(tmp_path, capsys):
    code = cli.run_command(["equilibria", "--out-dir", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err
    assert "model.kind" in err and "model.r" in err


def test_invalid_override_exits_2(tmp_path, capsys):
    code = cli.run_command(["montecarlo", "--preset", "fig3",
                            "--out-dir", str(tmp_path), "climate.rho=1.5"])
    assert code == 2
    assert "climate.rho" in capsys.readouterr().err


def test_unknown_subcommand_exits_2(capsys):
    assert cli.run_command(["frobnicate"]) == 2


def test_runtime_failure_exits_1(tmp_path, capsys):
    # r = 1.0 sits below the oscillation onset: no cycle to extract.
    code = cli.run_command(["cycle", "--preset", "fig2a",
                            "--out-dir", str(tmp_path), "model.r=1.0"])
    assert code == 1
    assert "NoCycleError" in capsys.readouterr().err
    assert not (tmp_path / "manifest.json").exists()


def test_version_flag_exits_0(capsys):
    assert cli.run_command(["--version"]) == 0
    assert phasetip.__version__ in capsys.readouterr().out


# ----------------------------------------------------------------------
# Cheap pipelines end to end
# ----------------------------------------------------------------------

def test_equilibria_pipeline_writes_manifest(tmp_path):
    code = cli.run_command(["equilibria", "--preset", "fig2a",
                            "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _read_rows(tmp_path / "equilibria.csv")
    assert rows[0] == cli._EQ_HEADER
    assert [row[0] for row in rows[1:]] == ["e0", "e1", "e2", "e3"]

    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "equilibria"
    assert manifest["preset"] == "fig2a"
    assert manifest["seed"] == 0
    assert manifest["version"] == phasetip.__version__
    assert manifest["backend"] in ("python", "fast")
    for entry in manifest["outputs"]:
        blob = (tmp_path / entry["name"]).read_bytes()
        assert hashlib.sha256(blob).hexdigest() == entry["sha256"]
        assert blob.count(b"\n") == entry["rows"] + 1


def test_cycle_pipeline_floats_round_trip(tmp_path):
    code = cli.run_command(["cycle", "--preset", "fig2a",
                            "--out-dir", str(tmp_path)])
    assert code == 0
    rows = _read_rows(tmp_path / "cycle_meta.csv")
    assert rows[0] == ["r", "period_yr", "closure_error",
                       "anchor_N", "anchor_P"]
    for cell in rows[1]:
        assert repr(float(cell)) == cell
    assert float(rows[1][1]) == pytest.approx(11.8508726, abs=1e-4)


def test_simulate_pipeline_constant_r(tmp_path):
    code = cli.run_command(["simulate", "--preset", "fig2a",
                            "--out-dir", str(tmp_path),
                            "simulate.t_final=5"])
    assert code == 0
    rows = _read_rows(tmp_path / "timeseries.csv")
    assert rows[0] == ["t_yr", "r", "N", "P"]
    assert len(rows) > 50
    assert {row[1] for row in rows[1:]} == {"2.47"}


def test_out_dir_env_var_is_used(tmp_path, monkeypatch):
    monkeypatch.setenv(config.OUT_DIR_ENV, str(tmp_path / "sub"))
    code = cli.run_command(["equilibria", "--preset", "fig2b"])
    assert code == 0
    assert (tmp_path / "sub" / "manifest.json").exists()


# ----------------------------------------------------------------------
# Monte Carlo pipeline: schema and byte-level determinism
# ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def mc_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("mc_a")
    code = cli.run_command(_MC_ARGS + ["--out-dir", str(out)])
    assert code == 0
    return out


def test_records_csv_schema(mc_out):
    rows = _read_rows(mc_out / "records.csv")
    assert rows[0] == _RECORD_HEADER
    assert len(rows) == 1 + 3
    assert [row[0] for row in rows[1:]] == ["0", "1", "2"]
    for row in rows[1:]:
        assert row[7] in ("B", "P", "")
        assert row[9] in ("true", "false")


def test_expected_outputs_present(mc_out):
    manifest = json.loads((mc_out / "manifest.json").read_text())
    names = {entry["name"] for entry in manifest["outputs"]}
    assert {"records.csv", "hist_phase.csv", "hist_time.csv",
            "hist_rpost.csv", "example_run.csv", "example_signal.csv",
            "measure_window.csv", "measure_bins.csv",
            "overlay_cycle.csv", "overlay_threshold.csv"} <= names
    assert manifest["summary"]["n_runs"] == 3
    assert manifest["summary"]["r_collapse"] == 2.608984375


def test_outputs_are_lf_only(mc_out):
    for path in mc_out.iterdir():
        assert b"\r" not in path.read_bytes(), path.name


def test_montecarlo_rerun_is_byte_identical(mc_out, tmp_path):
    code = cli.run_command(_MC_ARGS + ["--out-dir", str(tmp_path)])
    assert code == 0
    names = sorted(p.name for p in mc_out.iterdir())
    assert names == sorted(p.name for p in tmp_path.iterdir())
    for name in names:
        assert (mc_out / name).read_bytes() == \
            (tmp_path / name).read_bytes(), name
