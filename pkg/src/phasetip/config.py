"""Experiment configuration: defaults, named presets, file loading.

A configuration is a plain nested dict with a fixed schema.  Values
come from four layers, later layers winning: built-in defaults, a
named preset, a YAML file, and command-line ``a.b=value`` overrides.
The merged tree is validated strictly — unknown keys and out-of-range
values are rejected with the offending dotted key in the message.
"""

from __future__ import annotations

import copy
import math
import os

import yaml

from . import models
from .climate import ClimateConfig
from .errors import ConfigError
from .ode_core import IntegratorConfig

__all__ = [
    "DEFAULTS",
    "PRESETS",
    "PRESET_COMMAND",
    "REQUIRED_KEYS",
    "default_config",
    "load_config",
    "parse_override",
    "validate_config",
    "build_model",
    "build_integrator",
    "build_climate",
    "resolve_out_dir",
    "OUT_DIR_ENV",
]

OUT_DIR_ENV = "PHASETIP_OUT_DIR"

# ----------------------------------------------------------------------
# Schema: defaults plus per-key constraints
# ----------------------------------------------------------------------

# None defaults mark nullable keys; their expected type when present is
# given in _NULLABLE below.
DEFAULTS: dict = {
    "model": {
        "kind": None,            # "rma" | "may" (required)
        "r": None,               # prey growth rate 1/yr (required)
        # optional parameter overrides; None = family default
        "c": None, "alpha": None, "beta": None, "mu": None, "nu": None,
        "chi": None, "delta": None,              # rma only
        "s": None, "q": None, "epsilon": None,   # may only
    },
    "integrator": {
        "rel_tol": 1e-8,
        "abs_tol_n": 1e-10,
        "abs_tol_p": 1e-13,
        "max_step": 1.0,
        "max_time": 2000.0,
    },
    "climate": {
        "r_low": None,           # required by climate-driven commands
        "r_high": None,
        "rho": 0.2,
        "distribution": "uniform",
    },
    "experiment": {
        "x0": [3.0, 0.002],
        "n_runs": 1000,
        "seed": 0,
        "horizon": 5000.0,
        "r_collapse": None,      # None = locate by bisection
    },
    "cycle": {
        "transient": 500.0,
        "n_samples": 512,
        "return_tol": 1e-6,
    },
    "measure": {
        "r": None,               # None = model.r
        "j_points": 10000,
        "t_final": 100.0,
        "eps": 0.1,
        "n_grid": 512,
        "n_bins": 64,
    },
    "basin": {
        "r_threshold": None,     # None = model.r
        "max_back_time": 300.0,
        "max_segment": 0.01,
    },
    "simulate": {
        "t_final": 100.0,
        "sample_dt": 0.05,
        "use_climate": False,
    },
    "scan1d": {
        "r_min": 1.0,
        "r_max": 2.8,
        "step": 0.01,
        "n_samples": 256,
    },
    "regionmap": {
        "second_name": "delta",
        "r_min": 0.0,
        "r_max": 3.0,
        "r_steps": 150,
        "second_min": 1.5,
        "second_max": 3.2,
        "second_steps": 100,
    },
    "biregion": {
        "second_name": "delta",
        "r2_min": 0.0,
        "r2_max": 3.0,
        "r2_steps": 60,
        "second_min": 1.5,
        "second_max": 3.2,
        "second_steps": 40,
        "path_r2_min": 1.6,
        "path_step": 0.01,
        "portraits": [],
    },
    "gstrip": {
        "r1": None,
        "r2": None,
        "step": 0.01,
    },
    "output": {
        "dir": None,
        "hist_bins": 64,
    },
}

REQUIRED_KEYS = ("model.kind", "model.r")

# Expected type of nullable keys when a value is present.
_NULLABLE = {
    "model.kind": str,
    "model.r": float,
    "model.c": float, "model.alpha": float, "model.beta": float,
    "model.mu": float, "model.nu": float,
    "model.chi": float, "model.delta": float,
    "model.s": float, "model.q": float, "model.epsilon": float,
    "climate.r_low": float,
    "climate.r_high": float,
    "experiment.r_collapse": float,
    "measure.r": float,
    "basin.r_threshold": float,
    "gstrip.r1": float,
    "gstrip.r2": float,
    "output.dir": str,
}

_RMA_ONLY = ("chi", "delta")
_MAY_ONLY = ("s", "q", "epsilon")


# ----------------------------------------------------------------------
# Presets: one per reproduced figure, overridable by file and flags
# ----------------------------------------------------------------------

PRESETS: dict[str, dict] = {
    # one-parameter attractor scans
    "fig1a": {
        "model": {"kind": "rma", "r": 2.0},
        "scan1d": {"r_min": 1.0, "r_max": 2.8, "step": 0.01},
    },
    "fig1b": {
        "model": {"kind": "may", "r": 2.0},
        "scan1d": {"r_min": 1.0, "r_max": 4.0, "step": 0.01},
    },
    # phase portraits: cycle + threshold + equilibria at one r
    "fig2a": {"model": {"kind": "rma", "r": 2.47}},
    "fig2b": {"model": {"kind": "may", "r": 2.0}},
    # Monte Carlo tipping experiments
    "fig3": {
        "model": {"kind": "rma", "r": 2.47},
        "climate": {"r_low": 1.6, "r_high": 2.7},
        "measure": {"r": 2.47},
    },
    "fig4": {
        "model": {"kind": "rma", "r": 2.47},
        "climate": {"r_low": 1.6, "r_high": 2.5},
        "measure": {"r": 2.47},
    },
    "fig5": {
        "model": {"kind": "may", "r": 3.3},
        "climate": {"r_low": 2.0, "r_high": 3.3},
        "measure": {"r": 3.3},
    },
    # two-parameter attractor census maps
    "fig6a": {
        "model": {"kind": "rma", "r": 2.0},
        "regionmap": {"second_name": "delta", "r_min": 0.0, "r_max": 3.0,
                      "r_steps": 150, "second_min": 1.5, "second_max": 3.2,
                      "second_steps": 100},
    },
    "fig6b": {
        "model": {"kind": "may", "r": 2.0},
        "regionmap": {"second_name": "q", "r_min": 0.0, "r_max": 4.0,
                      "r_steps": 150, "second_min": 120.0,
                      "second_max": 280.0, "second_steps": 100},
    },
    # basin-instability region maps with path scans and portraits
    "fig7": {
        "model": {"kind": "rma", "r": 2.47},
        "biregion": {"second_name": "delta", "r2_min": 0.0, "r2_max": 3.0,
                     "r2_steps": 60, "second_min": 1.5, "second_max": 3.2,
                     "second_steps": 40, "path_r2_min": 1.6,
                     "path_step": 0.01, "portraits": [2.05, 1.923, 1.8]},
    },
    "fig8": {
        "model": {"kind": "may", "r": 3.3},
        "biregion": {"second_name": "q", "r2_min": 0.0, "r2_max": 4.0,
                     "r2_steps": 60, "second_min": 120.0,
                     "second_max": 280.0, "second_steps": 40,
                     "path_r2_min": 2.0, "path_step": 0.01,
                     "portraits": [2.82, 2.41, 2.0]},
    },
    # cycle-family strips split by one threshold, with two-level runs
    "fig9a": {
        "model": {"kind": "rma", "r": 2.5},
        "gstrip": {"r1": 2.5, "r2": 1.6, "step": 0.01},
        "climate": {"r_low": 1.6, "r_high": 2.5, "distribution": "binary"},
    },
    "fig9b": {
        "model": {"kind": "may", "r": 3.3},
        "gstrip": {"r1": 3.3, "r2": 2.0, "step": 0.01},
        "climate": {"r_low": 2.0, "r_high": 3.3, "distribution": "binary"},
    },
}

# The subcommand whose outputs reproduce each figure.
PRESET_COMMAND = {
    "fig1a": "scan1d", "fig1b": "scan1d",
    "fig2a": "basin", "fig2b": "basin",
    "fig3": "montecarlo", "fig4": "montecarlo", "fig5": "montecarlo",
    "fig6a": "regionmap", "fig6b": "regionmap",
    "fig7": "biregion", "fig8": "biregion",
    "fig9a": "gstrip", "fig9b": "gstrip",
}


# ----------------------------------------------------------------------
# Merging and overrides
# ----------------------------------------------------------------------

def default_config() -> dict:
    return copy.deepcopy(DEFAULTS)


def _merge(base: dict, extra: dict, prefix: str = "") -> None:
    """Recursively overlay ``extra`` onto ``base`` in place."""
    for key, value in extra.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{path}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(
                    f"'{path}' must be a section (mapping), got "
                    f"{type(value).__name__}")
            _merge(base[key], value, prefix=f"{path}.")
        else:
            base[key] = value


def parse_override(text: str) -> tuple[list[str], object]:
    """Parse one ``section.key=value`` command-line override."""
    if "=" not in text:
        raise ConfigError(
            f"override {text!r} is not of the form section.key=value")
    key, _, raw = text.partition("=")
    parts = key.strip().split(".")
    if len(parts) < 2 or not all(parts):
        raise ConfigError(
            f"override key {key!r} must be a dotted path like climate.rho")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError:
        value = raw
    return parts, value


def _apply_override(cfg: dict, parts: list[str], value) -> None:
    node = cfg
    for i, part in enumerate(parts[:-1]):
        path = ".".join(parts[: i + 1])
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config key '{path}'")
        node = node[part]
    leaf = parts[-1]
    path = ".".join(parts)
    if leaf not in node:
        raise ConfigError(f"unknown config key '{path}'")
    if isinstance(node[leaf], dict):
        raise ConfigError(f"'{path}' is a section, not a value")
    node[leaf] = value


def load_config(path: str | None = None, preset: str | None = None,
                overrides: tuple[str, ...] = (), seed: int | None = None
                ) -> dict:
    """Assemble and validate one configuration.

    Layering: defaults < preset < file < overrides < --seed flag.
    """
    cfg = default_config()
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: "
                f"{', '.join(sorted(PRESETS))}")
        _merge(cfg, copy.deepcopy(PRESETS[preset]))
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                loaded = yaml.safe_load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}")
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(
                f"config file {path} must hold a mapping at top level")
        _merge(cfg, loaded)
    for text in overrides:
        parts, value = parse_override(text)
        _apply_override(cfg, parts, value)
    if seed is not None:
        cfg["experiment"]["seed"] = seed
    validate_config(cfg)
    return cfg


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------

def _coerce_number(cfg: dict, section: str, key: str) -> None:
    v = cfg[section][key]
    if isinstance(v, bool):
        return
    if isinstance(v, int):
        cfg[section][key] = float(v)


def _require(cond: bool, key: str, constraint: str, value) -> None:
    if not cond:
        raise ConfigError(f"{key}: {constraint} (got {value!r})")


def _check_type(cfg: dict) -> None:
    for section, body in cfg.items():
        for key, value in body.items():
            path = f"{section}.{key}"
            if value is None:
                if path in _NULLABLE:
                    continue
                raise ConfigError(f"{path}: value may not be null")
            default = DEFAULTS[section][key]
            expected: type | tuple
            if default is None:
                expected = _NULLABLE[path]
            else:
                expected = type(default)
            if expected is float:
                if isinstance(value, bool) or not isinstance(
                        value, (int, float)):
                    raise ConfigError(
                        f"{path}: expected a number, got "
                        f"{type(value).__name__}")
                cfg[section][key] = float(value)
            elif expected is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(
                        f"{path}: expected an integer, got "
                        f"{type(value).__name__}")
            elif expected is bool:
                if not isinstance(value, bool):
                    raise ConfigError(
                        f"{path}: expected true/false, got "
                        f"{type(value).__name__}")
            elif expected is str:
                if not isinstance(value, str):
                    raise ConfigError(
                        f"{path}: expected a string, got "
                        f"{type(value).__name__}")
            elif expected is list:
                if not isinstance(value, (list, tuple)):
                    raise ConfigError(
                        f"{path}: expected a list, got "
                        f"{type(value).__name__}")


def validate_config(cfg: dict) -> None:
    """Full strict validation; raises ConfigError naming the key."""
    missing = [k for k in REQUIRED_KEYS
               if cfg[k.split(".")[0]][k.split(".")[1]] is None]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))
    _check_type(cfg)

    mod_ = cfg["model"]
    _require(mod_["kind"] in ("rma", "may"), "model.kind",
             "must be 'rma' or 'may'", mod_["kind"])
    _require(math.isfinite(mod_["r"]) and mod_["r"] > 0, "model.r",
             "must be a positive finite growth rate", mod_["r"])
    other = _MAY_ONLY if mod_["kind"] == "rma" else _RMA_ONLY
    for key in other:
        if mod_[key] is not None:
            raise ConfigError(
                f"model.{key} does not apply to kind '{mod_['kind']}'")

    integ = cfg["integrator"]
    try:
        IntegratorConfig(rel_tol=integ["rel_tol"],
                         abs_tol_n=integ["abs_tol_n"],
                         abs_tol_p=integ["abs_tol_p"],
                         max_step=integ["max_step"],
                         max_time=integ["max_time"])
    except ValueError as exc:
        raise ConfigError(f"integrator: {exc}")

    clim = cfg["climate"]
    if clim["r_low"] is not None or clim["r_high"] is not None:
        if clim["r_low"] is None or clim["r_high"] is None:
            raise ConfigError(
                "climate.r_low and climate.r_high must be given together")
        ClimateConfig(r_low=clim["r_low"], r_high=clim["r_high"],
                      rho=clim["rho"], distribution=clim["distribution"])
    else:
        _require(0.0 < clim["rho"] <= 1.0, "climate.rho",
                 "must be in (0, 1]", clim["rho"])
        _require(clim["distribution"] in ("uniform", "binary"),
                 "climate.distribution", "must be 'uniform' or 'binary'",
                 clim["distribution"])

    exp = cfg["experiment"]
    x0 = exp["x0"]
    _require(len(x0) == 2 and all(
        isinstance(v, (int, float)) and not isinstance(v, bool)
        and math.isfinite(v) and v >= 0 for v in x0),
        "experiment.x0", "must be [N, P] with finite nonnegative entries",
        x0)
    cfg["experiment"]["x0"] = [float(x0[0]), float(x0[1])]
    _require(exp["n_runs"] >= 1, "experiment.n_runs", "must be >= 1",
             exp["n_runs"])
    _require(exp["seed"] >= 0, "experiment.seed", "must be >= 0",
             exp["seed"])
    _require(exp["horizon"] > 0, "experiment.horizon", "must be positive",
             exp["horizon"])
    if exp["r_collapse"] is not None:
        _require(math.isfinite(exp["r_collapse"]), "experiment.r_collapse",
                 "must be finite (omit to locate automatically)",
                 exp["r_collapse"])

    cyc = cfg["cycle"]
    _require(cyc["transient"] >= 0, "cycle.transient", "must be >= 0",
             cyc["transient"])
    _require(cyc["n_samples"] >= 16, "cycle.n_samples", "must be >= 16",
             cyc["n_samples"])
    _require(cyc["return_tol"] > 0, "cycle.return_tol", "must be positive",
             cyc["return_tol"])

    mea = cfg["measure"]
    if mea["r"] is not None:
        _require(mea["r"] > 0, "measure.r", "must be positive", mea["r"])
    _require(mea["j_points"] >= 1, "measure.j_points", "must be >= 1",
             mea["j_points"])
    _require(mea["t_final"] > 0, "measure.t_final", "must be positive",
             mea["t_final"])
    _require(0 < mea["eps"] < math.pi, "measure.eps",
             "must be in (0, pi)", mea["eps"])
    _require(mea["n_grid"] >= 8, "measure.n_grid", "must be >= 8",
             mea["n_grid"])
    _require(mea["n_bins"] >= 4, "measure.n_bins", "must be >= 4",
             mea["n_bins"])

    bas = cfg["basin"]
    if bas["r_threshold"] is not None:
        _require(bas["r_threshold"] > 0, "basin.r_threshold",
                 "must be positive", bas["r_threshold"])
    _require(bas["max_back_time"] > 0, "basin.max_back_time",
             "must be positive", bas["max_back_time"])
    _require(bas["max_segment"] > 0, "basin.max_segment",
             "must be positive", bas["max_segment"])

    sim = cfg["simulate"]
    _require(sim["t_final"] > 0, "simulate.t_final", "must be positive",
             sim["t_final"])
    _require(sim["sample_dt"] > 0, "simulate.sample_dt", "must be positive",
             sim["sample_dt"])

    sc = cfg["scan1d"]
    _require(sc["r_max"] > sc["r_min"], "scan1d.r_max",
             "must exceed scan1d.r_min", sc["r_max"])
    _require(sc["step"] > 0, "scan1d.step", "must be positive", sc["step"])
    _require(sc["n_samples"] >= 16, "scan1d.n_samples", "must be >= 16",
             sc["n_samples"])

    for section in ("regionmap", "biregion"):
        body = cfg[section]
        _require(body["second_name"] in ("delta", "q"),
                 f"{section}.second_name", "must be 'delta' or 'q'",
                 body["second_name"])
        _require(body["second_max"] > body["second_min"],
                 f"{section}.second_max",
                 f"must exceed {section}.second_min", body["second_max"])
        _require(body["second_steps"] >= 2, f"{section}.second_steps",
                 "must be >= 2", body["second_steps"])

    rm = cfg["regionmap"]
    _require(rm["r_max"] > rm["r_min"], "regionmap.r_max",
             "must exceed regionmap.r_min", rm["r_max"])
    _require(rm["r_steps"] >= 2, "regionmap.r_steps", "must be >= 2",
             rm["r_steps"])

    br = cfg["biregion"]
    _require(br["r2_max"] > br["r2_min"], "biregion.r2_max",
             "must exceed biregion.r2_min", br["r2_max"])
    _require(br["r2_steps"] >= 2, "biregion.r2_steps", "must be >= 2",
             br["r2_steps"])
    _require(br["path_step"] > 0, "biregion.path_step", "must be positive",
             br["path_step"])
    _require(br["path_r2_min"] > 0, "biregion.path_r2_min",
             "must be positive", br["path_r2_min"])
    for i, v in enumerate(br["portraits"]):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v <= 0:
            raise ConfigError(
                f"biregion.portraits[{i}]: must be a positive growth rate "
                f"(got {v!r})")
    br["portraits"] = [float(v) for v in br["portraits"]]

    gs = cfg["gstrip"]
    if gs["r1"] is not None and gs["r2"] is not None:
        _require(gs["r1"] > gs["r2"], "gstrip.r1",
                 "must exceed gstrip.r2", gs["r1"])
    _require(gs["step"] > 0, "gstrip.step", "must be positive", gs["step"])

    out = cfg["output"]
    _require(out["hist_bins"] >= 4, "output.hist_bins", "must be >= 4",
             out["hist_bins"])


# ----------------------------------------------------------------------
# Builders from a validated config
# ----------------------------------------------------------------------

def build_model(cfg: dict):
    """Construct the frozen model named by the config."""
    m = cfg["model"]
    shared = {k: m[k] for k in ("c", "alpha", "beta", "mu", "nu")
              if m[k] is not None}
    try:
        if m["kind"] == "rma":
            base = models.rma_lynx_hare(m["r"])
            extra = {k: m[k] for k in _RMA_ONLY if m[k] is not None}
        else:
            base = models.may_lynx_hare(m["r"])
            extra = {k: m[k] for k in _MAY_ONLY if m[k] is not None}
        if shared or extra:
            import dataclasses
            base = dataclasses.replace(base, **shared, **extra)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}")
    return base


def build_integrator(cfg: dict) -> IntegratorConfig:
    integ = cfg["integrator"]
    return IntegratorConfig(rel_tol=integ["rel_tol"],
                            abs_tol_n=integ["abs_tol_n"],
                            abs_tol_p=integ["abs_tol_p"],
                            max_step=integ["max_step"],
                            max_time=integ["max_time"])


def build_climate(cfg: dict, t_max: float | None = None) -> ClimateConfig:
    clim = cfg["climate"]
    if clim["r_low"] is None or clim["r_high"] is None:
        raise ConfigError(
            "climate.r_low and climate.r_high are required for this command")
    return ClimateConfig(
        r_low=clim["r_low"], r_high=clim["r_high"], rho=clim["rho"],
        t_max=(cfg["experiment"]["horizon"] if t_max is None else t_max),
        distribution=clim["distribution"])


def resolve_out_dir(flag_value: str | None, cfg: dict) -> str:
    """Output directory: flag > config > environment > ./phasetip-out."""
    if flag_value:
        return flag_value
    if cfg["output"]["dir"]:
        return cfg["output"]["dir"]
    env = os.environ.get(OUT_DIR_ENV)
    if env:
        return env
    return os.path.join(os.curdir, "phasetip-out")
