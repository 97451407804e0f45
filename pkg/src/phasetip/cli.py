"""Command line front end: orchestration and deterministic CSV output.

Every subcommand reads one validated configuration (preset and/or
file plus ``section.key=value`` overrides), writes a fixed set of CSV
files into the output directory, and finishes with an atomically
written ``manifest.json`` carrying the resolved config, the seed, and
a sha256 digest per output file.  Identical config + seed give
byte-identical CSV bodies.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys

import numpy as np

from . import __version__, basins, climate, config, cycles, models, ode_core, scan, tipping
from .errors import ConfigError, PhasetipError

__all__ = ["main", "run_command"]

_HIST_PHASE = "hist_phase.csv"
_HIST_TIME = "hist_time.csv"
_HIST_RPOST = "hist_rpost.csv"

_RECORD_HEADER = ["run", "t1_yr", "r_pre", "r_post", "N_b", "P_b",
                  "phi_b", "kind", "rescues", "converged_pre"]


# ----------------------------------------------------------------------
# Serialization helpers
# ----------------------------------------------------------------------

def _fmt(v) -> str:
    """Deterministic cell text: shortest round-trip repr for floats."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(out_dir: str, name: str, header: list[str], rows) -> dict:
    """Write one CSV (UTF-8, LF) and return its manifest entry."""
    path = os.path.join(out_dir, name)
    n = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
            n += 1
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return {"name": name, "sha256": digest.hexdigest(), "rows": n}


def _json_safe(value):
    """Recursively replace non-finite floats (JSON has no inf/nan)."""
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    return value


def _write_manifest(out_dir: str, command: str, preset: str | None,
                    cfg: dict, outputs: list[dict],
                    run_errors: list[dict], summary: dict) -> None:
    """Atomic manifest write: full content to a temp file, then rename."""
    manifest = {
        "artifact": "phasetip",
        "version": __version__,
        "command": command,
        "preset": preset,
        "seed": cfg["experiment"]["seed"],
        "backend": ode_core.backend_name(),
        "config": _json_safe(cfg),
        "outputs": outputs,
        "run_errors": run_errors,
        "summary": _json_safe(summary),
    }
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(round((hi - lo) / step))
    n = max(n, 1)
    return lo + step * np.arange(n + 1)


def _membership_rows(cyc, boundary) -> list[str]:
    """Per-sample membership of a cycle against one threshold."""
    signed, outside = basins._signed_distances(cyc, boundary)
    band = np.abs(signed) < basins._BAND_HALF_WIDTH
    out = []
    for k in range(len(signed)):
        if band[k]:
            out.append("indeterminate")
        elif outside[k]:
            out.append("outside")
        else:
            out.append("inside")
    return out


def _cycle_rows(cyc):
    phis = cyc.phases()
    for k in range(cyc.n_samples):
        yield (cyc.times[k], cyc.samples[k, 0], cyc.samples[k, 1], phis[k])


def _equilibria_rows(model):
    for e in models.equilibria(model):
        yield (e.label, e.n, e.p,
               e.eigenvalues[0].real, e.eigenvalues[0].imag,
               e.eigenvalues[1].real, e.eigenvalues[1].imag,
               e.stability.value, e.ecological)


_EQ_HEADER = ["label", "N", "P", "eig1_re_per_yr", "eig1_im_per_yr",
              "eig2_re_per_yr", "eig2_im_per_yr", "stability", "ecological"]


def _hist_rows(values: np.ndarray, kinds: list[str], lo: float, hi: float,
               n_bins: int):
    """Histogram rows (bin_lo, bin_hi, count_all, count_b, count_p)."""
    values = np.asarray(values, dtype=float)
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, n_bins + 1)
    kinds_arr = np.array(kinds) if kinds else np.array([], dtype=str)
    all_counts, _ = np.histogram(values, bins=edges)
    b_counts, _ = np.histogram(values[kinds_arr == "B"], bins=edges) \
        if len(values) else (np.zeros(n_bins, dtype=int), None)
    p_counts, _ = np.histogram(values[kinds_arr == "P"], bins=edges) \
        if len(values) else (np.zeros(n_bins, dtype=int), None)
    for k in range(n_bins):
        yield (edges[k], edges[k + 1], int(all_counts[k]),
               int(b_counts[k]), int(p_counts[k]))


def _signal_rows(signal: climate.ClimateSignal):
    for i in range(signal.n_epochs):
        yield (signal.start_times[i], signal.durations[i],
               signal.levels[i], signal.epoch_type(i))


_SIGNAL_HEADER = ["start_yr", "duration_yr", "r_value", "type"]


def _piecewise_timeseries(model, signal: climate.ClimateSignal, x0,
                          t_end: float, dt: float, cfg):
    """Rows (t_yr, r, N, P) of the forced system sampled uniformly."""
    rows = []
    state = (float(x0[0]), float(x0[1]))
    grid = np.arange(0.0, t_end + 0.5 * dt, dt)
    for i in range(signal.n_epochs):
        t0 = float(signal.start_times[i])
        t1 = min(float(signal.start_times[i] + signal.durations[i]), t_end)
        if t0 >= t_end:
            break
        frozen = model.with_r(float(signal.levels[i]))
        traj = ode_core.integrate(frozen, state, t0, t1, cfg)
        ts = grid[(grid >= t0 - 1e-12) & (grid < t1 - 1e-12)]
        if len(ts):
            states = traj.sample(ts)
            for t, (n, p) in zip(ts, states):
                rows.append((t, float(signal.levels[i]), n, p))
        state = tuple(traj.final_state)
        if t1 >= t_end:
            rows.append((t1, float(signal.levels[i]), state[0], state[1]))
            break
    return rows


def _records_rows(records):
    for rec in records:
        yield (rec.run_index, rec.t_tip, rec.r_pre, rec.r_post,
               rec.x_b[0], rec.x_b[1], rec.phase, rec.kind,
               rec.rescues, rec.converged_pre)


def _measure_outputs(out_dir, model, cfg, int_cfg, prefix=""):
    """Invariant-measure CSV pair for the cycle at measure.r."""
    mea = cfg["measure"]
    r_m = mea["r"] if mea["r"] is not None else cfg["model"]["r"]
    cyc = cycles.find_limit_cycle(
        model.with_r(r_m), int_cfg, transient=cfg["cycle"]["transient"],
        n_samples=cfg["cycle"]["n_samples"],
        return_tol=cfg["cycle"]["return_tol"])
    meas = cycles.invariant_measure(
        cyc, j_points=mea["j_points"], t_final=mea["t_final"],
        eps=mea["eps"], n_grid=mea["n_grid"], n_bins=mea["n_bins"],
        cfg=int_cfg)
    outputs = [
        _write_csv(out_dir, prefix + "measure_window.csv",
                   ["phi_rad", "mass"],
                   zip(meas.phi_grid, meas.window_mass)),
        _write_csv(out_dir, prefix + "measure_bins.csv",
                   ["bin_lo_rad", "bin_hi_rad", "mass"],
                   zip(meas.bin_edges[:-1], meas.bin_edges[1:],
                       meas.bin_mass)),
    ]
    return outputs, cyc


# ----------------------------------------------------------------------
# Subcommand implementations
# ----------------------------------------------------------------------

def _cmd_simulate(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    sim = cfg["simulate"]
    x0 = cfg["experiment"]["x0"]
    t_final = sim["t_final"]
    outputs = []
    if sim["use_climate"]:
        clim = config.build_climate(cfg, t_max=t_final)
        rng = tipping._run_rng(cfg["experiment"]["seed"], 0)
        signal = climate.sample_signal(clim, rng)
        outputs.append(_write_csv(out_dir, "signal.csv", _SIGNAL_HEADER,
                                  _signal_rows(signal)))
        rows = _piecewise_timeseries(model, signal, x0, t_final,
                                     sim["sample_dt"], int_cfg)
    else:
        traj = ode_core.integrate(model, x0, 0.0, t_final, int_cfg)
        grid = np.arange(0.0, t_final + 0.5 * sim["sample_dt"],
                         sim["sample_dt"])
        grid = grid[grid <= t_final]
        states = traj.sample(grid)
        rows = [(t, model.r, s[0], s[1]) for t, s in zip(grid, states)]
    outputs.insert(0, _write_csv(out_dir, "timeseries.csv",
                                 ["t_yr", "r", "N", "P"], rows))
    return outputs, [], {"t_final": t_final}


def _cmd_equilibria(cfg, out_dir, workers):
    model = config.build_model(cfg)
    outputs = [_write_csv(out_dir, "equilibria.csv", _EQ_HEADER,
                          _equilibria_rows(model))]
    return outputs, [], {"r": model.r}


def _find_cycle(cfg, model, int_cfg, r=None):
    return cycles.find_limit_cycle(
        model if r is None else model.with_r(r), int_cfg,
        transient=cfg["cycle"]["transient"],
        n_samples=cfg["cycle"]["n_samples"],
        return_tol=cfg["cycle"]["return_tol"])


def _cmd_cycle(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    cyc = _find_cycle(cfg, model, int_cfg)
    outputs = [
        _write_csv(out_dir, "cycle.csv", ["t_yr", "N", "P", "phi_rad"],
                   _cycle_rows(cyc)),
        _write_csv(out_dir, "cycle_meta.csv",
                   ["r", "period_yr", "closure_error", "anchor_N", "anchor_P"],
                   [(cyc.r, cyc.period, cyc.closure_error,
                     cyc.anchor[0], cyc.anchor[1])]),
    ]
    summary = {"r": cyc.r, "period_yr": cyc.period,
               "closure_error": cyc.closure_error}
    return outputs, [], summary


def _cmd_measure(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    outputs, cyc = _measure_outputs(out_dir, model, cfg, int_cfg)
    summary = {"r": cyc.r, "period_yr": cyc.period,
               "j_points": cfg["measure"]["j_points"]}
    return outputs, [], summary


def _cmd_basin(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    bas = cfg["basin"]
    r_t = bas["r_threshold"] if bas["r_threshold"] is not None \
        else cfg["model"]["r"]
    cyc = _find_cycle(cfg, model, int_cfg)
    boundary = basins.allee_threshold(
        model.with_r(r_t), int_cfg, max_back_time=bas["max_back_time"],
        max_segment=bas["max_segment"])
    verdict = basins.classify_basin_instability(cyc, boundary)
    interval = basins.unstable_phase_interval(cyc, verdict)
    mem = _membership_rows(cyc, boundary)
    phis = cyc.phases()
    cyc_rows = [(cyc.times[k], cyc.samples[k, 0], cyc.samples[k, 1],
                 phis[k], mem[k]) for k in range(cyc.n_samples)]
    phi_lo = interval.lo if interval is not None else float("nan")
    phi_hi = interval.hi if interval is not None else float("nan")
    width = interval.width if interval is not None else float("nan")
    outputs = [
        _write_csv(out_dir, "cycle.csv",
                   ["t_yr", "N", "P", "phi_rad", "membership"], cyc_rows),
        _write_csv(out_dir, "threshold.csv", ["N", "P"],
                   map(tuple, boundary.polyline)),
        _write_csv(out_dir, "equilibria.csv", _EQ_HEADER,
                   _equilibria_rows(model)),
        _write_csv(out_dir, "basin_meta.csv",
                   ["r_cycle", "r_threshold", "class", "fraction_outside",
                    "phi_lo_rad", "phi_hi_rad", "width_rad"],
                   [(cyc.r, r_t, verdict.label.value,
                     verdict.fraction_outside, phi_lo, phi_hi, width)]),
    ]
    summary = {"r_cycle": cyc.r, "r_threshold": r_t,
               "class": verdict.label.value,
               "fraction_outside": verdict.fraction_outside}
    return outputs, [], summary


def _overlay_outputs(out_dir, cfg, model, int_cfg, mc):
    """Portrait overlays for tipping figures: cycle + smallest basin."""
    outputs = []
    if cfg["measure"]["r"] is not None:
        meas_out, cyc = _measure_outputs(out_dir, model, cfg, int_cfg)
        outputs.extend(meas_out)
        outputs.append(_write_csv(
            out_dir, "overlay_cycle.csv", ["t_yr", "N", "P", "phi_rad"],
            _cycle_rows(cyc)))
    r_low = cfg["climate"]["r_low"]
    try:
        boundary = basins.allee_threshold(
            model.with_r(r_low), int_cfg,
            max_back_time=cfg["basin"]["max_back_time"],
            max_segment=cfg["basin"]["max_segment"])
    except PhasetipError:
        return outputs
    outputs.append(_write_csv(out_dir, "overlay_threshold.csv", ["N", "P"],
                              map(tuple, boundary.polyline)))
    return outputs


def _example_run_outputs(out_dir, cfg, model, int_cfg, mc):
    """Re-integrate the first tipped run densely for time-series panels."""
    exp = cfg["experiment"]
    tipped = [rec for rec in mc.records if rec.tipped]
    rec = min(tipped, key=lambda rec: rec.run_index) if tipped else None
    run_index = rec.run_index if rec is not None else 0
    rng = tipping._run_rng(exp["seed"], run_index)
    clim = config.build_climate(cfg, t_max=exp["horizon"])
    signal = climate.sample_signal(clim, rng)
    if rec is not None and math.isfinite(rec.t_death):
        t_end = min(exp["horizon"], rec.t_death + 20.0)
    elif rec is not None:
        t_end = min(exp["horizon"], rec.t_tip + 200.0)
    else:
        t_end = min(exp["horizon"], 200.0)
    rows = _piecewise_timeseries(model, signal, exp["x0"], t_end,
                                 cfg["simulate"]["sample_dt"], int_cfg)
    return [
        _write_csv(out_dir, "example_signal.csv", _SIGNAL_HEADER,
                   _signal_rows(signal)),
        _write_csv(out_dir, "example_run.csv", ["t_yr", "r", "N", "P"],
                   rows),
    ], run_index


def _experiment_from_config(cfg, model, int_cfg):
    exp = cfg["experiment"]
    return tipping.ExperimentConfig(
        model=model,
        climate=config.build_climate(cfg, t_max=exp["horizon"]),
        x0=tuple(exp["x0"]),
        n_runs=exp["n_runs"],
        seed=exp["seed"],
        horizon=exp["horizon"],
        r_collapse=exp["r_collapse"],
        integrator=int_cfg,
    )


def _cmd_montecarlo(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    experiment = _experiment_from_config(cfg, model, int_cfg)
    mc = tipping.run_monte_carlo(experiment, n_workers=workers)

    tipped = mc.tipped()
    phases = np.array([rec.phase for rec in tipped])
    times = np.array([rec.t_tip for rec in tipped])
    rposts = np.array([rec.r_post for rec in tipped])
    kinds = [rec.kind for rec in tipped]
    n_bins = cfg["output"]["hist_bins"]
    t_hi = float(times.max()) if len(times) else experiment.horizon
    outputs = [
        _write_csv(out_dir, "records.csv", _RECORD_HEADER,
                   _records_rows(mc.records)),
        _write_csv(out_dir, _HIST_PHASE,
                   ["bin_lo_rad", "bin_hi_rad", "count_all", "count_b",
                    "count_p"],
                   _hist_rows(phases, kinds, 0.0, 2.0 * math.pi, n_bins)),
        _write_csv(out_dir, _HIST_TIME,
                   ["bin_lo_yr", "bin_hi_yr", "count_all", "count_b",
                    "count_p"],
                   _hist_rows(times, kinds, 0.0, t_hi, n_bins)),
        _write_csv(out_dir, _HIST_RPOST,
                   ["bin_lo", "bin_hi", "count_all", "count_b", "count_p"],
                   _hist_rows(rposts, kinds,
                              experiment.climate.r_low,
                              experiment.climate.r_high, n_bins)),
    ]
    example_out, example_index = _example_run_outputs(
        out_dir, cfg, model, int_cfg, mc)
    outputs.extend(example_out)
    outputs.extend(_overlay_outputs(out_dir, cfg, model, int_cfg, mc))
    run_errors = [{"run": i, "error": msg} for i, msg in mc.errors]
    counts = mc.counts_by_kind()
    summary = {
        "r_collapse": mc.r_collapse,
        "n_runs": experiment.n_runs,
        "n_tipped": mc.n_tipped,
        "n_b": counts["B"],
        "n_p": counts["P"],
        "example_run": example_index,
    }
    return outputs, run_errors, summary


def _cmd_scan1d(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    sc = cfg["scan1d"]
    rs = _grid(sc["r_min"], sc["r_max"], sc["step"])
    rs = rs[rs > 0]
    result = scan.one_param_scan(model, rs, int_cfg,
                                 n_samples=sc["n_samples"])
    branch_rows = (
        (result.r_values[i], result.kinds[i], result.labels[i],
         result.n_min[i], result.n_max[i], result.p_min[i],
         result.p_max[i], result.period[i])
        for i in range(len(result.r_values)))
    eq_rows = ((b.r, b.label, b.n, b.p, b.stability, b.ecological)
               for b in result.branches)
    outputs = [
        _write_csv(out_dir, "branch.csv",
                   ["r", "kind", "label", "n_min", "n_max", "p_min",
                    "p_max", "period_yr"], branch_rows),
        _write_csv(out_dir, "equilibria_branches.csv",
                   ["r", "label", "N", "P", "stability", "ecological"],
                   eq_rows),
    ]
    run_errors = [{"run": i, "error": msg} for i, msg in result.errors]
    n_cycles = sum(1 for k in result.kinds if k == "cycle")
    summary = {"n_points": len(result.r_values), "n_cycles": n_cycles}
    return outputs, run_errors, summary


def _cmd_regionmap(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    rm = cfg["regionmap"]
    second = rm["second_name"]
    if not hasattr(model, second):
        raise ConfigError(
            f"regionmap.second_name: model kind "
            f"'{cfg['model']['kind']}' has no parameter {second!r}")
    rs = np.linspace(rm["r_min"], rm["r_max"], rm["r_steps"])
    seconds = np.linspace(rm["second_min"], rm["second_max"],
                          rm["second_steps"])
    result = scan.two_param_region_map(model, rs, seconds, second,
                                       cfg=int_cfg)
    rows = ((rs[i], seconds[j], result.labels[i, j])
            for i in range(len(rs)) for j in range(len(seconds)))
    outputs = [_write_csv(out_dir, "grid.csv", ["r", second, "class"],
                          rows)]
    summary = {"n_cells": int(len(rs) * len(seconds))}
    return outputs, [], summary


def _cmd_biregion(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    br = cfg["biregion"]
    second = br["second_name"]
    if not hasattr(model, second):
        raise ConfigError(
            f"biregion.second_name: model kind "
            f"'{cfg['model']['kind']}' has no parameter {second!r}")
    p1_r = cfg["model"]["r"]
    r2s = np.linspace(br["r2_min"], br["r2_max"], br["r2_steps"])
    seconds = np.linspace(br["second_min"], br["second_max"],
                          br["second_steps"])
    grid_map = basins.bi_region_map(model, p1_r, r2s, seconds, second,
                                    cfg=int_cfg)
    rows = ((r2s[i], seconds[j], grid_map.labels[i, j])
            for i in range(len(r2s)) for j in range(len(seconds)))
    outputs = [_write_csv(out_dir, "grid.csv", ["r2", second, "class"],
                          rows)]

    # Path scan at the model's own second-parameter value: unstable
    # phase range of Gamma(p1) against theta(r2) as r2 recedes from r1.
    cyc = _find_cycle(cfg, model, int_cfg)
    path_rows = []
    for r2 in _grid(br["path_r2_min"], p1_r, br["path_step"]):
        r2 = float(min(r2, p1_r))
        try:
            boundary = basins.allee_threshold(
                model.with_r(r2), int_cfg,
                max_back_time=cfg["basin"]["max_back_time"],
                max_segment=cfg["basin"]["max_segment"])
            verdict = basins.classify_basin_instability(cyc, boundary)
        except PhasetipError:
            path_rows.append((r2, "NotApplicable", float("nan"),
                              float("nan"), float("nan")))
            continue
        interval = basins.unstable_phase_interval(cyc, verdict)
        if interval is None:
            path_rows.append((r2, verdict.label.value, float("nan"),
                              float("nan"), float("nan")))
        else:
            path_rows.append((r2, verdict.label.value, interval.lo,
                              interval.hi, interval.width))
    outputs.append(_write_csv(
        out_dir, "path_phases.csv",
        ["r2", "class", "phi_lo_rad", "phi_hi_rad", "width_rad"],
        path_rows))

    portrait_rows = []
    for k, r2 in enumerate(br["portraits"], start=1):
        boundary = basins.allee_threshold(
            model.with_r(r2), int_cfg,
            max_back_time=cfg["basin"]["max_back_time"],
            max_segment=cfg["basin"]["max_segment"])
        verdict = basins.classify_basin_instability(cyc, boundary)
        mem = _membership_rows(cyc, boundary)
        phis = cyc.phases()
        cyc_rows = [(cyc.times[i], cyc.samples[i, 0], cyc.samples[i, 1],
                     phis[i], mem[i]) for i in range(cyc.n_samples)]
        outputs.append(_write_csv(
            out_dir, f"portrait{k}_cycle.csv",
            ["t_yr", "N", "P", "phi_rad", "membership"], cyc_rows))
        outputs.append(_write_csv(
            out_dir, f"portrait{k}_threshold.csv", ["N", "P"],
            map(tuple, boundary.polyline)))
        portrait_rows.append((k, r2, verdict.label.value,
                              verdict.fraction_outside))
    if portrait_rows:
        outputs.append(_write_csv(
            out_dir, "portraits.csv",
            ["index", "r2", "class", "fraction_outside"], portrait_rows))
    summary = {"p1_r": p1_r, "p1_second": getattr(model, second),
               "second_name": second}
    return outputs, [], summary


def _cmd_gstrip(cfg, out_dir, workers):
    model = config.build_model(cfg)
    int_cfg = config.build_integrator(cfg)
    gs = cfg["gstrip"]
    if gs["r1"] is None or gs["r2"] is None:
        raise ConfigError("gstrip.r1 and gstrip.r2 are required")
    family = cycles.cycle_family(model, gs["r2"], gs["r1"],
                                 step=gs["step"], cfg=int_cfg,
                                 n_samples=cfg["cycle"]["n_samples"])
    boundary = basins.allee_threshold(
        model.with_r(gs["r2"]), int_cfg,
        max_back_time=cfg["basin"]["max_back_time"],
        max_segment=cfg["basin"]["max_segment"])
    part = basins.g_strip_partition(family, boundary)
    strip_rows = []
    for k, cyc in enumerate(family):
        phis = cyc.phases()
        out_mask = part.outside_masks[k]
        ind_mask = part.indeterminate_masks[k]
        for i in range(cyc.n_samples):
            region = ("indeterminate" if ind_mask[i]
                      else "unstable" if out_mask[i] else "stable")
            strip_rows.append((cyc.r, cyc.samples[i, 0], cyc.samples[i, 1],
                               phis[i], region))
    outputs = [
        _write_csv(out_dir, "strip.csv",
                   ["r", "N", "P", "phi_rad", "region"], strip_rows),
        _write_csv(out_dir, "threshold.csv", ["N", "P"],
                   map(tuple, boundary.polyline)),
        _write_csv(out_dir, "strip_meta.csv", ["r", "fraction_outside"],
                   zip(part.r_values, part.fractions_outside)),
    ]
    run_errors: list[dict] = []
    summary = {"r1": gs["r1"], "r2": gs["r2"],
               "n_cycles": len(family)}
    if cfg["climate"]["r_low"] is not None:
        experiment = _experiment_from_config(cfg, model, int_cfg)
        mc = tipping.run_monte_carlo(experiment, n_workers=workers)
        outputs.append(_write_csv(out_dir, "records.csv", _RECORD_HEADER,
                                  _records_rows(mc.records)))
        run_errors = [{"run": i, "error": msg} for i, msg in mc.errors]
        summary["r_collapse"] = mc.r_collapse
        summary["n_tipped"] = mc.n_tipped
    return outputs, run_errors, summary


_COMMANDS = {
    "simulate": _cmd_simulate,
    "equilibria": _cmd_equilibria,
    "cycle": _cmd_cycle,
    "measure": _cmd_measure,
    "basin": _cmd_basin,
    "biregion": _cmd_biregion,
    "gstrip": _cmd_gstrip,
    "montecarlo": _cmd_montecarlo,
    "scan1d": _cmd_scan1d,
    "regionmap": _cmd_regionmap,
}


# ----------------------------------------------------------------------
# Entry point
# ----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasetip",
        description="Phase-sensitive tipping experiments in forced "
                    "predator-prey models.")
    parser.add_argument("--version", action="version",
                        version=f"phasetip {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", default=None,
                       help="YAML config file overlaying the preset")
        p.add_argument("--preset", default=None,
                       help="named preset (fig1a ... fig9b)")
        p.add_argument("--seed", type=int, default=None,
                       help="override experiment.seed")
        p.add_argument("--out-dir", default=None,
                       help=f"output directory (default: config, then "
                            f"${config.OUT_DIR_ENV}, then ./phasetip-out)")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for Monte Carlo batches")
        p.add_argument("overrides", nargs="*", metavar="KEY=VALUE",
                       help="dotted config overrides, e.g. climate.rho=0.2")
    return parser


def run_command(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version.
        return int(exc.code or 0)
    try:
        cfg = config.load_config(path=args.config, preset=args.preset,
                                 overrides=tuple(args.overrides),
                                 seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out_dir = config.resolve_out_dir(args.out_dir, cfg)
    try:
        os.makedirs(out_dir, exist_ok=True)
        outputs, run_errors, summary = _COMMANDS[args.command](
            cfg, out_dir, args.workers)
        _write_manifest(out_dir, args.command, args.preset, cfg, outputs,
                        run_errors, summary)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PhasetipError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"{args.command}: wrote {len(outputs)} files to {out_dir}")
    if run_errors:
        print(f"{len(run_errors)} runs failed; see manifest.json")
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
