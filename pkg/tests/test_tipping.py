"""Tipping bookkeeping: scripted switch sequences, collapse levels,
Monte Carlo determinism."""

from __future__ import annotations

import dataclasses
from math import isnan

import numpy as np
import pytest

from phasetip import basins, climate, models, tipping
from phasetip.basins import Membership
from phasetip.climate import ClimateConfig, ClimateSignal
from phasetip.cycles import phase_of
from phasetip.errors import ConfigError
from phasetip.ode_core import DEFAULT_CONFIG
from phasetip.tipping import ExperimentConfig, FrozenCache

RMA_COLLAPSE = 2.608984375


def _scripted_signal(levels, durations, r_low, r_high):
    levels = np.asarray(levels, dtype=float)
    durations = np.asarray(durations, dtype=float)
    starts = np.concatenate([[0.0], np.cumsum(durations[:-1])])
    cfg = ClimateConfig(r_low=r_low, r_high=r_high,
                        t_max=float(durations.sum()))
    return ClimateSignal(config=cfg, start_times=starts,
                         durations=durations, levels=levels)


@pytest.fixture(scope="module")
def rma_setup(rma_cycle):
    model = models.rma_lynx_hare(2.47)
    config = ExperimentConfig(model=model,
                              climate=ClimateConfig(r_low=1.6, r_high=2.7),
                              x0=tuple(rma_cycle.samples[0]),
                              r_collapse=RMA_COLLAPSE)
    cache = FrozenCache(model, DEFAULT_CONFIG)
    return config, cache


# ----------------------------------------------------------------------
# Scripted switch sequences
# ----------------------------------------------------------------------

def test_rescued_run_counts_one_rescue(rma_setup, rma_cycle, threshold):
    # Timing pinned against the cycle geometry: at t=8 the orbit sits
    # outside theta(1.8); one year at r=1.8 leaves it inside the
    # r=2.47 basin (rescue); 13 years of recovery put it back on the
    # cycle at another outside phase; the last switch then kills it.
    config, cache = rma_setup
    sig = _scripted_signal([2.47, 1.8, 2.47, 1.8], [8, 1, 13, 600],
                           1.6, 2.7)
    rec = tipping.run_with_signal(config, sig, RMA_COLLAPSE, cache)

    assert rec.tipped
    assert rec.kind == "P"
    assert rec.rescues == 1
    assert rec.n_switches == 3
    assert rec.t_tip == 22.0
    assert rec.r_pre == 2.47
    assert rec.r_post == 1.8
    assert rec.t_tip < rec.t_death < sig.end_time

    # The recorded departure state must sit outside the shifted basin
    # according to the independent trajectory oracle.
    x_b = np.array(rec.x_b)
    assert basins.basin_oracle(models.rma_lynx_hare(1.8), x_b) \
        is Membership.OUTSIDE
    dist = rma_cycle.distance_to(x_b)
    assert rec.converged_pre == (dist < 1e-2)
    assert rec.converged_pre

    anchor = models.coexistence_point(models.rma_lynx_hare(2.47))
    assert rec.phase == pytest.approx(phase_of(x_b, anchor))


def test_tipping_switch_is_start_of_terminal_streak(rma_setup):
    # Without the rescue epoch the same departure at t=8 is terminal.
    config, cache = rma_setup
    sig = _scripted_signal([2.47, 1.8], [8, 600], 1.6, 2.7)
    rec = tipping.run_with_signal(config, sig, RMA_COLLAPSE, cache)
    assert rec.tipped
    assert rec.kind == "P"
    assert rec.rescues == 0
    assert rec.n_switches == 1
    assert rec.t_tip == 8.0


def test_switch_to_stable_level_never_tips(rma_setup):
    # theta(2.2) still contains the whole cycle: Stable class.
    config, cache = rma_setup
    sig = _scripted_signal([2.47, 2.2], [8, 400], 1.6, 2.7)
    rec = tipping.run_with_signal(config, sig, RMA_COLLAPSE, cache)
    assert not rec.tipped
    assert rec.kind == ""
    assert rec.rescues == 0
    assert isnan(rec.t_tip)
    assert isnan(rec.t_death)


def test_switch_past_collapse_is_b_event(rma_setup):
    config, cache = rma_setup
    sig = _scripted_signal([2.47, 2.65], [8, 600], 1.6, 2.7)
    rec = tipping.run_with_signal(config, sig, RMA_COLLAPSE, cache)
    assert rec.tipped
    assert rec.kind == "B"
    assert rec.t_tip == 8.0
    assert rec.r_post == 2.65


def test_nonconverged_state_is_flagged(rma_setup, rma_cycle):
    # Five years is not enough for x0 = (3, 0.002) to reach the cycle;
    # the switch still tips but converged_pre must say so.
    model = models.rma_lynx_hare(2.47)
    config = dataclasses.replace(rma_setup[0], x0=(3.0, 0.002))
    cache = rma_setup[1]
    sig = _scripted_signal([2.47, 1.8], [5, 600], 1.6, 2.7)
    rec = tipping.run_with_signal(config, sig, RMA_COLLAPSE, cache)
    assert rec.tipped
    assert not rec.converged_pre
    assert rma_cycle.distance_to(np.array(rec.x_b)) > 1e-2


def test_degenerate_signal_records_no_tip(rma_setup):
    config, cache = rma_setup
    sig = _scripted_signal([2.47, 2.47, 2.47], [50, 50, 50], 2.47, 2.47)
    rec = tipping.run_with_signal(config, sig, RMA_COLLAPSE, cache)
    assert not rec.tipped
    assert rec.rescues == 0


def test_frozen_cache_quantises_levels(rma_setup):
    _, cache = rma_setup
    assert cache.quantised(1.8000004) == cache.quantised(1.8)
    assert cache.quantised(1.8) != cache.quantised(1.802)
    b1 = cache.boundary(1.8000004)
    b2 = cache.boundary(1.8)
    assert b1 is b2
    assert cache.cycle_or_none(2.47) is not None
    assert cache.cycle_or_none(1.4) is None


# ----------------------------------------------------------------------
# Event classification and collapse level
# ----------------------------------------------------------------------

def test_classify_event_boundary_is_p():
    assert tipping.classify_event(2.7, RMA_COLLAPSE) == "B"
    assert tipping.classify_event(RMA_COLLAPSE, RMA_COLLAPSE) == "P"
    assert tipping.classify_event(2.0, RMA_COLLAPSE) == "P"


def test_rma_collapse_level_bisected():
    config = ExperimentConfig(model=models.rma_lynx_hare(2.47),
                              climate=ClimateConfig(r_low=1.6, r_high=2.7),
                              n_runs=1)
    level = tipping._collapse_level(config)
    assert level == pytest.approx(2.609, abs=2e-3)


def test_may_collapse_level_is_infinite():
    # The May cycle exits through a reverse Hopf onto a stable e3:
    # no switch level inside the range destroys the interior attractor.
    config = ExperimentConfig(model=models.may_lynx_hare(3.3),
                              climate=ClimateConfig(r_low=2.0, r_high=3.3),
                              n_runs=1)
    assert tipping._collapse_level(config) == np.inf


def test_explicit_collapse_level_is_passed_through():
    config = ExperimentConfig(model=models.rma_lynx_hare(2.47),
                              climate=ClimateConfig(r_low=1.6, r_high=2.7),
                              n_runs=1, r_collapse=2.5)
    assert tipping._collapse_level(config) == 2.5


# ----------------------------------------------------------------------
# Monte Carlo plumbing
# ----------------------------------------------------------------------

def _values_equal(va, vb):
    # NaN-aware equality; tuples (x_b) need it element-wise because a
    # pickle round-trip from worker processes breaks the identity
    # shortcut tuple comparison relies on.
    if isinstance(va, float) and isinstance(vb, float):
        return va == vb or (isnan(va) and isnan(vb))
    if isinstance(va, tuple) and isinstance(vb, tuple):
        return len(va) == len(vb) and all(
            _values_equal(x, y) for x, y in zip(va, vb))
    return va == vb


def _records_equal(a, b):
    if len(a) != len(b):
        return False
    return all(
        _values_equal(getattr(ra, f.name), getattr(rb, f.name))
        for ra, rb in zip(a, b)
        for f in dataclasses.fields(ra))


@pytest.fixture(scope="module")
def small_experiment():
    return ExperimentConfig(model=models.rma_lynx_hare(2.47),
                            climate=ClimateConfig(r_low=1.6, r_high=2.7),
                            n_runs=6, seed=1, horizon=300.0,
                            r_collapse=RMA_COLLAPSE)


def test_monte_carlo_is_deterministic(small_experiment):
    a = tipping.run_monte_carlo(small_experiment)
    b = tipping.run_monte_carlo(small_experiment)
    assert a.r_collapse == b.r_collapse == RMA_COLLAPSE
    assert _records_equal(a.records, b.records)
    assert a.errors == b.errors == ()
    assert [r.run_index for r in a.records] == list(range(6))


def test_monte_carlo_parallel_matches_serial(small_experiment):
    serial = tipping.run_monte_carlo(small_experiment)
    parallel = tipping.run_monte_carlo(small_experiment, n_workers=2)
    assert _records_equal(serial.records, parallel.records)


def test_monte_carlo_seed_changes_outcomes(small_experiment):
    a = tipping.run_monte_carlo(small_experiment)
    other = dataclasses.replace(small_experiment, seed=2)
    b = tipping.run_monte_carlo(other)
    assert not _records_equal(a.records, b.records)


def test_monte_carlo_summaries_consistent(small_experiment):
    res = tipping.run_monte_carlo(small_experiment)
    counts = res.counts_by_kind()
    assert counts["B"] + counts["P"] == res.n_tipped == len(res.tipped())
    assert len(res.tipping_times()) == res.n_tipped
    assert len(res.tipping_phases()) == res.n_tipped
    for rec in res.records:
        if rec.tipped:
            assert rec.kind in ("B", "P")
            assert rec.t_tip <= rec.t_death
        else:
            assert rec.kind == ""


def test_run_rng_streams_are_stable():
    # Per-run generators depend only on (seed, run_index).
    a = tipping._run_rng(7, 3).uniform(size=4)
    b = tipping._run_rng(7, 3).uniform(size=4)
    c = tipping._run_rng(7, 4).uniform(size=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_experiment_config_validation():
    clim = ClimateConfig(r_low=1.6, r_high=2.7)
    with pytest.raises(ConfigError, match="n_runs"):
        ExperimentConfig(model=models.rma_lynx_hare(2.47), climate=clim,
                         n_runs=0)
    with pytest.raises(ConfigError, match="horizon"):
        ExperimentConfig(model=models.rma_lynx_hare(2.47), climate=clim,
                         horizon=-1.0)
    with pytest.raises(ConfigError, match="seed"):
        ExperimentConfig(model=models.rma_lynx_hare(2.47), climate=clim,
                         seed=-1)
