"""Allee-threshold tracing, membership queries, instability verdicts."""

from __future__ import annotations

from math import pi, tau

import numpy as np
import pytest

from phasetip import basins, models
from phasetip.basins import InstabilityClass, Membership
from phasetip.cycles import cycle_family
from phasetip.errors import NotBistableError

# Tangency levels r2 at which the reference cycles touch the shifted
# threshold, pinned by bisection on the max signed distance.
RMA_MARGINAL_R2 = 1.923
MAY_MARGINAL_R2 = 2.41


# ----------------------------------------------------------------------
# Threshold tracing
# ----------------------------------------------------------------------

def test_threshold_geometry(threshold):
    b = threshold("rma", 2.47)
    assert b.r == 2.47
    assert b.saddle_label == "e2"
    assert b.saddle == pytest.approx((0.03, 0.0))
    assert b.polyline.ndim == 2 and b.polyline.shape[1] == 2
    assert len(b.polyline) > 100
    # The trace stays inside its stated window.
    n_lo, n_hi, p_lo, p_hi = b.box
    assert np.all(b.polyline[:, 0] >= n_lo - 1e-9)
    assert np.all(b.polyline[:, 0] <= n_hi + 1e-9)
    assert np.all(b.polyline[:, 1] >= p_lo - 1e-9)
    assert np.all(b.polyline[:, 1] <= p_hi + 1e-9)


def test_may_threshold_hangs_off_interior_saddle(threshold):
    b = threshold("may", 3.3)
    assert b.saddle_label == "e4"
    eqs = models.equilibria(models.may_lynx_hare(3.3))
    assert b.saddle == pytest.approx(eqs["e4"].state)


def test_query_polyline_is_a_decimated_copy(threshold):
    b = threshold("rma", 2.47)
    q = b.query_polyline()
    assert len(q) < len(b.polyline)
    assert np.allclose(q[0], b.polyline[0])
    assert np.allclose(q[-1], b.polyline[-1])


def test_threshold_needs_bistability():
    # Below the coexistence window the RMA system has one attractor.
    with pytest.raises(NotBistableError):
        basins.allee_threshold(models.rma_lynx_hare(0.5))


# ----------------------------------------------------------------------
# Membership
# ----------------------------------------------------------------------

def test_coexistence_point_is_inside(threshold):
    b = threshold("rma", 2.47)
    e3 = models.coexistence_point(models.rma_lynx_hare(2.47))
    assert basins.in_basin(e3, b) is Membership.INSIDE


def test_low_prey_state_is_outside(threshold):
    b = threshold("rma", 2.47)
    assert basins.in_basin((0.01, 0.02), b) is Membership.OUTSIDE


def test_saddle_sits_in_the_indeterminate_band(threshold):
    b = threshold("rma", 2.47)
    assert basins.in_basin(b.saddle, b) is Membership.INDETERMINATE


def test_unknown_membership_mode_rejected(threshold):
    b = threshold("rma", 2.47)
    with pytest.raises(ValueError, match="mode"):
        basins.in_basin((3.0, 0.005), b, mode="psychic")


def test_oracle_agrees_with_geometry_off_band(threshold):
    # Forward integration and polyline parity must agree on at least
    # 99.5% of off-band states.
    model = models.rma_lynx_hare(2.2)
    b = threshold("rma", 2.2)
    rng = np.random.default_rng(31)
    pts = np.column_stack([rng.uniform(0.05, 12.0, 400),
                           rng.uniform(1e-5, 2e-2, 400)])
    checked = agree = 0
    for point in pts:
        geo = basins.in_basin(point, b)
        if geo is Membership.INDETERMINATE:
            continue
        checked += 1
        oracle = basins.basin_oracle(model, point)
        if oracle is Membership.INDETERMINATE or oracle is geo:
            agree += 1
    assert checked > 300
    assert agree / checked >= 0.995


def test_oracle_inside_means_interior_attractor():
    model = models.rma_lynx_hare(2.47)
    e3 = models.coexistence_point(model)
    assert basins.basin_oracle(model, (e3[0] + 0.01, e3[1])) \
        is Membership.INSIDE
    assert basins.basin_oracle(model, (0.01, 0.02)) is Membership.OUTSIDE


def test_oracle_handles_stable_focus_below_hopf():
    # No cycle at r = 1.3, but e3 is stable: its neighbourhood is
    # still the interior basin.
    model = models.rma_lynx_hare(1.3)
    e3 = models.coexistence_point(model)
    assert basins.basin_oracle(model, (e3[0] + 0.05, e3[1])) \
        is Membership.INSIDE


# ----------------------------------------------------------------------
# Instability classification
# ----------------------------------------------------------------------

def test_rma_classification_ladder(rma_cycle, threshold):
    stable = basins.classify_basin_instability(rma_cycle,
                                               threshold("rma", 2.05))
    partial = basins.classify_basin_instability(rma_cycle,
                                                threshold("rma", 1.8))
    assert stable.label is InstabilityClass.STABLE
    assert partial.label is InstabilityClass.PARTIAL
    assert stable.fraction_outside == 0.0
    assert 0.0 < partial.fraction_outside < 1.0
    assert stable.signed_max < 0 < partial.signed_max
    assert len(partial.crossing_phases) >= 2


def test_may_classification_ladder(may_cycle, threshold):
    stable = basins.classify_basin_instability(may_cycle,
                                               threshold("may", 2.82))
    partial = basins.classify_basin_instability(may_cycle,
                                                threshold("may", 2.0))
    assert stable.label is InstabilityClass.STABLE
    assert partial.label is InstabilityClass.PARTIAL


def test_classification_is_reflexively_stable(rma_cycle, may_cycle,
                                              threshold):
    # Every cycle lies strictly inside its own basin.
    assert basins.classify_basin_instability(
        rma_cycle, threshold("rma", 2.47)).label is InstabilityClass.STABLE
    assert basins.classify_basin_instability(
        may_cycle, threshold("may", 3.3)).label is InstabilityClass.STABLE


def test_outside_fraction_shrinks_as_r2_rises(rma_cycle, threshold):
    fracs = [basins.classify_basin_instability(
        rma_cycle, threshold("rma", r2)).fraction_outside
        for r2 in (1.70, 1.80, 1.90)]
    assert fracs[0] > fracs[1] > fracs[2] > 0


def test_unstable_interval_covers_quarter_phase(rma_cycle, threshold):
    verdict = basins.classify_basin_instability(rma_cycle,
                                                threshold("rma", 1.8))
    arc = basins.unstable_phase_interval(rma_cycle, verdict)
    assert arc is not None
    assert 0 < arc.width < tau
    assert arc.contains(pi / 2)
    # The arc must cover the outside samples' phases.
    from phasetip.cycles import phases_of
    out_phis = phases_of(rma_cycle.samples[verdict.outside_mask],
                         rma_cycle.anchor)
    covered = np.mean([(phi - arc.lo) % tau < arc.width for phi in out_phis])
    assert covered > 0.95


def test_stable_verdict_has_no_unstable_interval(rma_cycle, threshold):
    verdict = basins.classify_basin_instability(rma_cycle,
                                                threshold("rma", 2.05))
    assert basins.unstable_phase_interval(rma_cycle, verdict) is None


# ----------------------------------------------------------------------
# Marginal tangency levels
# ----------------------------------------------------------------------

def test_rma_marginal_level():
    r2, verdict = basins.find_marginal_r2(models.rma_lynx_hare(2.47),
                                          2.47, 1.8, 2.05)
    assert abs(r2 - RMA_MARGINAL_R2) < 0.02
    assert verdict.label is InstabilityClass.MARGINAL


def test_may_marginal_level():
    r2, verdict = basins.find_marginal_r2(models.may_lynx_hare(3.3),
                                          3.3, 2.0, 2.82)
    assert abs(r2 - MAY_MARGINAL_R2) < 0.02
    assert verdict.label is InstabilityClass.MARGINAL


# ----------------------------------------------------------------------
# Strip partition
# ----------------------------------------------------------------------

def test_g_strip_partition_masks_are_disjoint(threshold):
    # Against theta(1.8) only the outermost cycles of the strip poke
    # outside (the tangency level of the r = 2.47 cycle is ~1.923, so
    # smaller cycles remain contained).
    fam = cycle_family(models.rma_lynx_hare(2.47), 2.25, 2.45, step=0.05,
                       n_samples=256)
    part = basins.g_strip_partition(fam, threshold("rma", 1.8))
    assert part.r_threshold == 1.8
    assert len(part.outside_masks) == len(fam)
    for k, cyc in enumerate(fam):
        out = part.outside_masks[k]
        ind = part.indeterminate_masks[k]
        assert out.shape == (cyc.n_samples,)
        assert not np.any(out & ind)
        assert part.fractions_outside[k] == pytest.approx(out.mean())
    assert part.fractions_outside[0] == 0.0
    assert part.fractions_outside[-1] > 0.0


# ----------------------------------------------------------------------
# Two-parameter instability map
# ----------------------------------------------------------------------

def test_bi_region_map_small_grid():
    bim = basins.bi_region_map(models.rma_lynx_hare(2.47), 2.47,
                               [1.7, 1.9, 2.1], [2.0, 2.2, 2.6], "delta")
    assert bim.second_name == "delta"
    assert bim.labels.shape == (3, 3)
    # delta = 2.2 column reproduces the classification ladder.
    assert list(bim.labels[:, 1]) == ["Partial", "Partial", "Stable"]
    # delta = 2.6 shifts the oscillatory window right of this r2 range:
    # no cell-local cycle, so the instability question does not apply.
    assert list(bim.labels[:, 2]) == ["NotApplicable"] * 3
    mask = bim.basin_unstable_mask()
    assert mask[0, 1] and mask[1, 1]
    assert not mask[2, 1] and not mask[0, 2]
