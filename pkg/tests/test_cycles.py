"""Limit-cycle detection, phase geometry, families, invariant measure."""

from __future__ import annotations

from math import pi, tau

import numpy as np
import pytest

from phasetip import cycles, models
from phasetip.cycles import cycle_family, find_limit_cycle, phase_of, phases_of
from phasetip.errors import NoCycleError, PathInvalidError, UndefinedPhaseError

# Reference periods of the two standard cycles, pinned by an
# independent long-horizon section-return measurement.
RMA_PERIOD_247 = 11.850872610884817
MAY_PERIOD_33 = 8.43302317375726


# ----------------------------------------------------------------------
# Phase geometry
# ----------------------------------------------------------------------

def test_phase_of_cardinal_directions():
    anchor = (3.3, 0.005)
    assert phase_of((4.3, 0.005), anchor) == 0.0
    assert phase_of((3.3, 0.006), anchor) == pytest.approx(pi / 2)
    assert phase_of((2.3, 0.005), anchor) == pytest.approx(pi)
    assert phase_of((3.3, 0.004), anchor) == pytest.approx(3 * pi / 2)


def test_phase_respects_predator_scaling():
    # A predator offset of 1e-3 weighs as much as a prey offset of 1.
    anchor = (1.0, 0.001)
    phi = phase_of((2.0, 0.002), anchor)
    assert phi == pytest.approx(pi / 4)


def test_phase_undefined_at_anchor():
    anchor = (3.3, 0.005)
    with pytest.raises(UndefinedPhaseError):
        phase_of(anchor, anchor)
    with pytest.raises(UndefinedPhaseError):
        phases_of(np.array([[3.3, 0.005], [4.0, 0.005]]), anchor)


def test_phases_of_matches_scalar_version():
    rng = np.random.default_rng(2)
    anchor = (3.3, 0.005)
    pts = np.column_stack([rng.uniform(0.1, 9.0, 40),
                           rng.uniform(1e-4, 9e-3, 40)])
    batch = phases_of(pts, anchor)
    for point, phi in zip(pts, batch):
        assert phase_of(point, anchor) == pytest.approx(phi)
    assert np.all((batch >= 0) & (batch < tau))


# ----------------------------------------------------------------------
# The two reference cycles
# ----------------------------------------------------------------------

def test_rma_cycle_period_and_closure(rma_cycle):
    assert rma_cycle.period == pytest.approx(RMA_PERIOD_247, abs=1e-6)
    assert rma_cycle.closure_error < 1e-5
    assert rma_cycle.r == 2.47


def test_may_cycle_period_and_closure(may_cycle):
    assert may_cycle.period == pytest.approx(MAY_PERIOD_33, abs=1e-6)
    assert may_cycle.closure_error < 1e-5


def test_cycle_anchored_at_coexistence_point(rma_cycle):
    anchor = models.coexistence_point(models.rma_lynx_hare(2.47))
    assert rma_cycle.anchor == pytest.approx(anchor)
    # Samples start on the section N = N3, i.e. at phase +-pi/2.
    phi0 = phase_of(rma_cycle.samples[0], rma_cycle.anchor)
    assert min(abs(phi0 - pi / 2), abs(phi0 - 3 * pi / 2)) < 1e-6


def test_cycle_winds_once_about_anchor(rma_cycle, may_cycle):
    for cyc in (rma_cycle, may_cycle):
        ph = np.unwrap(np.where(cyc.phases() > pi,
                                cyc.phases() - tau, cyc.phases()))
        total = ph[-1] - ph[0] + (ph[1] - ph[0])
        assert round(total / tau) in (-1, 1)


def test_cycle_encircles_anchor(rma_cycle):
    n_lo, n_hi, p_lo, p_hi = rma_cycle.envelope()
    n3, p3 = rma_cycle.anchor
    assert n_lo < n3 < n_hi
    assert p_lo < p3 < p_hi


def test_point_at_wraps_mod_period(rma_cycle):
    t = 2.5
    a = rma_cycle.point_at(t)
    b = rma_cycle.point_at(t + rma_cycle.period)
    c = rma_cycle.point_at(t - rma_cycle.period)
    assert np.allclose(a, b, atol=1e-9)
    assert np.allclose(a, c, atol=1e-9)


def test_distance_to_vanishes_on_cycle(rma_cycle):
    on = rma_cycle.samples[17]
    assert rma_cycle.distance_to(on) < 1e-6
    assert rma_cycle.distance_to(rma_cycle.anchor) > 0.1


def test_no_cycle_below_hopf():
    with pytest.raises(NoCycleError, match="e3"):
        find_limit_cycle(models.rma_lynx_hare(1.2))


def test_no_cycle_without_coexistence_state():
    with pytest.raises(NoCycleError):
        find_limit_cycle(models.rma_lynx_hare(0.4))


def test_may_cycle_absent_above_second_hopf():
    with pytest.raises(NoCycleError, match="e3"):
        find_limit_cycle(models.may_lynx_hare(3.95))


# ----------------------------------------------------------------------
# Cycle families
# ----------------------------------------------------------------------

def test_family_is_continuous_within_window():
    fam = cycle_family(models.rma_lynx_hare(2.47), 2.30, 2.45, step=0.05,
                       n_samples=256)
    assert len(fam) == 4
    assert np.allclose(fam.r_values, [2.30, 2.35, 2.40, 2.45], atol=1e-12)
    assert np.all(fam.hausdorff > 0)
    # Envelope widens with r: the strip G fans out toward collapse.
    widths = [c.envelope()[1] - c.envelope()[0] for c in fam]
    assert widths[-1] > widths[0]


def test_family_nearest_picks_grid_neighbour():
    fam = cycle_family(models.rma_lynx_hare(2.47), 2.30, 2.45, step=0.05,
                       n_samples=128)
    assert fam.nearest(2.41).r == pytest.approx(2.40)
    assert fam.nearest(0.0).r == pytest.approx(2.30)


def test_family_crossing_collapse_names_breakpoint():
    # r_h sits near 2.609: the grid point at 2.65 has no cycle.
    with pytest.raises(PathInvalidError, match=r"2\.65"):
        cycle_family(models.rma_lynx_hare(2.47), 2.55, 2.75, step=0.10,
                     n_samples=128)


def test_family_rejects_bad_grid():
    with pytest.raises(ValueError, match="r_hi > r_lo"):
        cycle_family(models.rma_lynx_hare(2.47), 2.5, 2.4)
    with pytest.raises(ValueError, match="step"):
        cycle_family(models.rma_lynx_hare(2.47), 2.3, 2.4, step=0.0)


# ----------------------------------------------------------------------
# Invariant measure
# ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def rma_measure(rma_cycle):
    return cycles.invariant_measure(rma_cycle, j_points=600, t_final=60.0,
                                    n_grid=256, n_bins=64)


def test_measure_bins_partition_the_sample(rma_measure):
    assert rma_measure.bin_mass.sum() == pytest.approx(1.0)
    assert len(rma_measure.endpoint_phases) == 600
    counts = rma_measure.bin_mass * rma_measure.j_points
    assert np.allclose(counts, np.round(counts))


def test_measure_window_curve_bounds(rma_measure):
    assert np.all(rma_measure.window_mass >= 0)
    assert np.all(rma_measure.window_mass <= 1)
    # The sliding window integrates to 2*eps/tau on a circle.
    mean_mass = rma_measure.window_mass.mean()
    assert mean_mass == pytest.approx(2 * rma_measure.eps / tau, rel=0.05)


def test_measure_window_consistent_with_grid(rma_measure):
    k = 37
    phi = float(rma_measure.phi_grid[k])
    assert rma_measure.window_mass_at(phi) \
        == pytest.approx(rma_measure.window_mass[k])


def test_measure_concentrates_in_slow_arc(rma_measure):
    # The orbit crawls through the low-predator recovery arc, so the
    # measure's mode must dominate a uniform distribution several-fold.
    assert rma_measure.window_mass.max() \
        > 4.0 * (2 * rma_measure.eps / tau)


def test_measure_validates_arguments(rma_cycle):
    with pytest.raises(ValueError, match="j_points"):
        cycles.invariant_measure(rma_cycle, j_points=0)
    with pytest.raises(ValueError, match="eps"):
        cycles.invariant_measure(rma_cycle, j_points=10, eps=4.0)
    with pytest.raises(ValueError, match="t_final"):
        cycles.invariant_measure(rma_cycle, j_points=10, t_final=0.0)
