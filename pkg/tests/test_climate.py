"""Random forcing signal: marginals, epoch typing, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from phasetip import climate
from phasetip.climate import ClimateConfig, ClimateSignal, sample_signal
from phasetip.errors import ConfigError

# 1% critical values used by the goodness-of-fit checks below:
# Kolmogorov-Smirnov asymptotic coefficient sqrt(-ln(0.005)/2) and the
# chi-square quantile for 25 degrees of freedom.
_KS_COEF_1PCT = 1.6276
_CHI2_99_DOF25 = 44.314


def _big_signal(seed=0, **kwargs):
    cfg = ClimateConfig(r_low=1.6, r_high=2.7, rho=0.2,
                        t_max=500_000.0, **kwargs)
    return cfg, sample_signal(cfg, np.random.default_rng(seed))


# ----------------------------------------------------------------------
# Duration law
# ----------------------------------------------------------------------

def test_duration_pmf_closed_form():
    assert climate.duration_pmf(1, 0.2) == pytest.approx(0.2)
    assert climate.duration_pmf(3, 0.2) == pytest.approx(0.128)
    assert climate.duration_pmf(0, 0.2) == 0.0
    total = sum(climate.duration_pmf(k, 0.2) for k in range(1, 400))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_durations_are_whole_years_starting_at_one():
    _cfg, sig = _big_signal()
    assert np.all(sig.durations >= 1.0)
    assert np.array_equal(sig.durations, np.round(sig.durations))


def test_duration_mean_matches_rho():
    _cfg, sig = _big_signal()
    n = len(sig.durations)
    assert n > 50_000
    # Geometric(0.2): mean 5, sd sqrt(0.8)/0.2 = sqrt(20); 4-sigma window.
    tol = 4.0 * np.sqrt(20.0 / n)
    assert abs(sig.durations.mean() - 5.0) < tol


def test_duration_chi_square_against_geometric():
    _cfg, sig = _big_signal(seed=3)
    durations = sig.durations.astype(int)
    n = len(durations)
    # Cells k = 1..25 plus one tail cell: 25 degrees of freedom.
    observed = np.array(
        [np.count_nonzero(durations == k) for k in range(1, 26)]
        + [np.count_nonzero(durations >= 26)], dtype=float)
    pmf = np.array([climate.duration_pmf(k, 0.2) for k in range(1, 26)])
    expected = np.append(pmf, 1.0 - pmf.sum()) * n
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    assert chi2 < _CHI2_99_DOF25


# ----------------------------------------------------------------------
# Amplitude law
# ----------------------------------------------------------------------

def test_uniform_levels_pass_ks():
    cfg, sig = _big_signal(seed=5)
    x = np.sort(sig.levels)
    n = len(x)
    cdf = (x - cfg.r_low) / (cfg.r_high - cfg.r_low)
    emp_hi = np.arange(1, n + 1) / n
    emp_lo = np.arange(0, n) / n
    d = max(np.max(emp_hi - cdf), np.max(cdf - emp_lo))
    assert d < _KS_COEF_1PCT / np.sqrt(n)


def test_binary_levels_hit_both_endpoints():
    cfg, sig = _big_signal(seed=9, distribution="binary")
    levels = set(np.unique(sig.levels))
    assert levels == {1.6, 2.7}
    n = len(sig.levels)
    n_high = np.count_nonzero(sig.levels == 2.7)
    # Fair coin: 4-sigma window around n/2.
    assert abs(n_high - n / 2) < 4.0 * np.sqrt(n) / 2


# ----------------------------------------------------------------------
# Signal structure
# ----------------------------------------------------------------------

def test_signal_tiles_the_requested_window():
    cfg, sig = _big_signal()
    assert sig.start_times[0] == 0.0
    assert np.allclose(np.diff(sig.start_times), sig.durations[:-1])
    assert sig.end_time >= cfg.t_max
    # Dropping the final epoch must leave a gap: no overshoot padding.
    assert sig.end_time - sig.durations[-1] < cfg.t_max


def test_value_at_is_right_continuous():
    _cfg, sig = _big_signal()
    t_switch = float(sig.start_times[1])
    assert sig.value_at(t_switch) == sig.levels[1]
    assert sig.value_at(t_switch - 1e-9) == sig.levels[0]
    assert sig.value_at(0.0) == sig.levels[0]
    assert sig.epoch_index(t_switch) == 1


def test_value_at_rejects_times_outside_cover():
    _cfg, sig = _big_signal()
    with pytest.raises(ValueError, match="outside"):
        sig.value_at(-1.0)
    with pytest.raises(ValueError, match="outside"):
        sig.value_at(sig.end_time)


def test_switches_iterates_interior_jumps():
    _cfg, sig = _big_signal()
    jumps = list(sig.switches())
    assert len(jumps) == sig.n_epochs - 1
    t, old, new = jumps[0]
    assert t == sig.start_times[1]
    assert old == sig.levels[0]
    assert new == sig.levels[1]


# ----------------------------------------------------------------------
# Epoch typing
# ----------------------------------------------------------------------

def test_epoch_type_uses_strict_midpoint():
    cfg = ClimateConfig(r_low=1.0, r_high=3.0)
    sig = ClimateSignal(config=cfg,
                        start_times=np.array([0.0, 2.0, 5.0]),
                        durations=np.array([2.0, 3.0, 4.0]),
                        levels=np.array([2.5, 2.0, 1.2]))
    assert sig.epoch_type(0) == "H"
    assert sig.epoch_type(1) == "L"   # exactly at the midpoint
    assert sig.epoch_type(2) == "L"


def test_degenerate_range_is_all_low():
    cfg = ClimateConfig(r_low=2.0, r_high=2.0)
    sig = sample_signal(cfg, np.random.default_rng(0))
    assert np.all(sig.levels == 2.0)
    assert all(sig.epoch_type(i) == "L" for i in range(sig.n_epochs))


# ----------------------------------------------------------------------
# Determinism and validation
# ----------------------------------------------------------------------

def test_same_seed_reproduces_signal():
    cfg = ClimateConfig(r_low=1.6, r_high=2.7, t_max=500.0)
    a = sample_signal(cfg, np.random.default_rng(42))
    b = sample_signal(cfg, np.random.default_rng(42))
    assert np.array_equal(a.levels, b.levels)
    assert np.array_equal(a.durations, b.durations)
    c = sample_signal(cfg, np.random.default_rng(43))
    assert not (np.array_equal(a.levels, c.levels)
                and np.array_equal(a.durations, c.durations))


@pytest.mark.parametrize("kwargs,key", [
    (dict(r_low=-0.5, r_high=2.0), "r_low"),
    (dict(r_low=2.0, r_high=1.0), "r_high"),
    (dict(r_low=1.0, r_high=2.0, rho=0.0), "rho"),
    (dict(r_low=1.0, r_high=2.0, rho=1.5), "rho"),
    (dict(r_low=1.0, r_high=2.0, t_max=0.0), "t_max"),
    (dict(r_low=1.0, r_high=2.0, distribution="gamma"), "distribution"),
])
def test_invalid_config_names_offending_field(kwargs, key):
    with pytest.raises(ConfigError, match=key):
        ClimateConfig(**kwargs)
