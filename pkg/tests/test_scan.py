"""Branch scans, bifurcation bisection, and region censuses."""

from __future__ import annotations

import numpy as np
import pytest

from phasetip import models, scan
from phasetip.errors import BracketError, NotAHopfError
from phasetip.scan import RegionLabel

# Landmark parameter values pinned by eigenvalue/cycle bisection.
RMA_HOPF = 1.5258
MAY_HOPF_1 = 1.6640
MAY_HOPF_2 = 3.8091
RMA_COLLAPSE = 2.6090


# ----------------------------------------------------------------------
# Hopf detection
# ----------------------------------------------------------------------

def test_rma_hopf_location():
    bp = scan.detect_hopf(models.rma_lynx_hare(1.0), 1.3, 1.8)
    assert bp.kind == "hopf"
    assert bp.value == pytest.approx(RMA_HOPF, abs=1e-3)
    assert bp.bracket[1] - bp.bracket[0] <= 1e-4
    assert bp.bracket[0] <= bp.value <= bp.bracket[1]
    assert bp.residual < 1e-6


def test_may_hopf_pair():
    h1 = scan.detect_hopf(models.may_lynx_hare(1.0), 1.4, 2.0)
    h2 = scan.detect_hopf(models.may_lynx_hare(1.0), 3.5, 4.0)
    assert h1.value == pytest.approx(MAY_HOPF_1, abs=1e-3)
    assert h2.value == pytest.approx(MAY_HOPF_2, abs=1e-3)
    assert h1.residual < 1e-6 and h2.residual < 1e-6


def test_hopf_needs_a_sign_change():
    with pytest.raises(BracketError, match="same sign"):
        scan.detect_hopf(models.rma_lynx_hare(1.0), 2.0, 2.4)


def test_hopf_rejects_real_eigenvalues():
    # Just above the coexistence transcritical point the RMA focus
    # has a real spectrum; stability cannot flip through a Hopf there.
    with pytest.raises(NotAHopfError, match="real"):
        scan.detect_hopf(models.rma_lynx_hare(1.0), 0.64, 0.66)


# ----------------------------------------------------------------------
# Cycle disappearance
# ----------------------------------------------------------------------

def test_rma_collapse_location():
    bp = scan.detect_cycle_disappearance(models.rma_lynx_hare(1.0),
                                         2.5, 2.7)
    assert bp.kind == "cycle-disappearance"
    assert bp.value == pytest.approx(RMA_COLLAPSE, abs=2e-3)
    assert bp.bracket[1] - bp.bracket[0] <= 1e-3


def test_may_cycle_exit_is_the_second_hopf():
    # The May cycle leaves by shrinking onto e3, so the existence
    # boundary coincides with the upper Hopf point.
    bp = scan.detect_cycle_disappearance(models.may_lynx_hare(1.0),
                                         3.7, 3.9)
    assert bp.value == pytest.approx(MAY_HOPF_2, abs=5e-3)


def test_collapse_bracket_must_straddle():
    with pytest.raises(BracketError):
        scan.detect_cycle_disappearance(models.rma_lynx_hare(1.0), 2.0, 2.4)
    with pytest.raises(BracketError):
        scan.detect_cycle_disappearance(models.rma_lynx_hare(1.0), 2.65, 2.7)


def test_cycle_exists_predicate():
    assert scan.cycle_exists(models.rma_lynx_hare(2.47))
    assert not scan.cycle_exists(models.rma_lynx_hare(2.7))
    assert not scan.cycle_exists(models.rma_lynx_hare(1.2))
    assert scan.cycle_exists(models.may_lynx_hare(3.3))
    assert not scan.cycle_exists(models.may_lynx_hare(3.95))


# ----------------------------------------------------------------------
# One-parameter scan
# ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def hopf_scan():
    rs = np.arange(1.40, 1.66, 0.02)
    return scan.one_param_scan(models.rma_lynx_hare(1.0), rs, n_samples=128)


def test_scan_kind_flips_across_hopf(hopf_scan):
    kinds = hopf_scan.kinds
    assert kinds[0] == "equilibrium"
    assert kinds[-1] == "cycle"
    assert "failed" not in kinds
    assert hopf_scan.errors == []
    # At most one undecided grid point, sitting exactly at the handover.
    first_cycle = kinds.index("cycle")
    assert all(k == "equilibrium" for k in kinds[:first_cycle - 1])
    assert all(k == "cycle" for k in kinds[first_cycle:])


def test_scan_stability_flip_brackets_hopf(hopf_scan):
    rs = hopf_scan.r_values
    stab = {b.r: b.stability for b in hopf_scan.branches if b.label == "e3"}
    flips = [i for i in range(len(rs) - 1)
             if (stab[rs[i]] == "stable") != (stab[rs[i + 1]] == "stable")]
    assert len(flips) == 1
    lo, hi = rs[flips[0]], rs[flips[0] + 1]
    assert lo <= RMA_HOPF <= hi


def test_scan_prey_only_branch_is_linear(hopf_scan):
    e1 = {b.r: b.n for b in hopf_scan.branches if b.label == "e1"}
    for r, n in e1.items():
        assert n == pytest.approx(r / 0.19, rel=1e-12)


def test_scan_envelopes_and_periods(hopf_scan):
    for i, kind in enumerate(hopf_scan.kinds):
        if kind == "cycle":
            assert hopf_scan.n_max[i] > hopf_scan.n_min[i]
            assert hopf_scan.p_max[i] > hopf_scan.p_min[i]
            assert hopf_scan.period[i] > 0
        elif kind == "equilibrium":
            assert hopf_scan.n_max[i] == pytest.approx(hopf_scan.n_min[i],
                                                       abs=1e-6)
            assert np.isnan(hopf_scan.period[i])


def test_scan_survives_gap_past_collapse():
    # Straddling r_h: points beyond the collapse level must not abort
    # the scan; they report the surviving attractor (extinction) or a
    # recorded failure, never an exception.
    rs = np.array([2.55, 2.60, 2.65])
    res = scan.one_param_scan(models.rma_lynx_hare(1.0), rs, n_samples=128)
    assert res.kinds[0] == "cycle"
    assert res.kinds[-1] in ("equilibrium", "undecided", "failed")


# ----------------------------------------------------------------------
# Attractor census
# ----------------------------------------------------------------------

def test_census_reference_cells():
    assert scan.census_cell(models.rma_lynx_hare(2.47)) \
        is RegionLabel.OSC_COEXIST
    assert scan.census_cell(models.may_lynx_hare(2.0)) \
        is RegionLabel.OSC_COEXIST


def test_census_low_growth_cells():
    assert scan.census_cell(models.rma_lynx_hare(0.2)) \
        is RegionLabel.PREY_ONLY
    assert scan.census_cell(models.rma_lynx_hare(0.9)) \
        is RegionLabel.STAT_COEXIST
    assert scan.census_cell(models.may_lynx_hare(3.9)) \
        is RegionLabel.STAT_COEXIST


def test_census_extinction_past_collapse():
    # delta = 1.6 pulls the collapse level below r = 1.7: the interior
    # attractor is gone and every probe drains to e0.
    model = models.RmaParams(r=1.7, delta=1.6)
    assert scan.census_cell(model) is RegionLabel.EXTINCTION_ONLY


def test_region_map_contains_all_four_labels():
    rm = scan.two_param_region_map(models.rma_lynx_hare(1.0),
                                   np.linspace(0.2, 2.8, 8),
                                   np.linspace(1.6, 3.0, 6), "delta")
    assert rm.labels.shape == (8, 6)
    assert rm.second_name == "delta"
    found = set(rm.labels.ravel())
    assert found >= {"OscCoexistOrExtinction", "StatCoexistOrExtinction",
                     "PreyOnlyOrExtinction", "ExtinctionOnly"}
    # The lowest growth row cannot sustain a predator anywhere.
    assert set(rm.labels[0]) == {"PreyOnlyOrExtinction"}


def test_region_map_rejects_unknown_parameter():
    with pytest.raises(ValueError, match="no parameter"):
        scan.two_param_region_map(models.rma_lynx_hare(1.0),
                                  [1.0], [1.0], "sigma")


def test_census_idempotent_under_probe_jitter():
    # Re-censusing every cell with probe positions jittered by 1% must
    # reproduce the label on every interior cell (same-label
    # neighbourhood); boundary cells may flip.
    rs = np.linspace(0.2, 2.8, 14)
    ds = np.linspace(1.6, 3.0, 10)
    rm = scan.two_param_region_map(models.rma_lynx_hare(1.0), rs, ds,
                                   "delta")
    rng = np.random.default_rng(17)
    interior = checked = same = 0
    labels = rm.labels
    for i in range(1, len(rs) - 1):
        for j in range(1, len(ds) - 1):
            neighbours = {labels[i - 1, j], labels[i + 1, j],
                          labels[i, j - 1], labels[i, j + 1]}
            if neighbours != {labels[i, j]}:
                continue
            interior += 1
            model = models.RmaParams(r=float(rs[i]), delta=float(ds[j]))
            redo = scan.census_cell(model, probe_jitter=rng)
            checked += 1
            same += redo.value == labels[i, j]
    assert interior >= 20
    assert same == checked
