"""Limit cycles of the frozen systems, phase, and the invariant measure.

Phase is measured at the coexistence equilibrium e3: the angle of the
scaled displacement ``(N - N3, 1e3 (P - P3))`` counterclockwise from
the positive-N half line, canonicalised to [0, 2pi).  All cycle
geometry (arc length, Hausdorff distances, return tolerances) uses the
same scaled metric as the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import atan2, fmod, pi, tau

import numpy as np

from . import models, ode_core
from .errors import CoexistenceUndefined, NoCycleError, PathInvalidError, UndefinedPhaseError
from .ode_core import (
    PSCALE,
    AttractorCatalog,
    IntegratorConfig,
    Trajectory,
    converge_to_attractor,
    integrate,
    integrate_endpoint,
    scaled_dist,
)

__all__ = [
    "LimitCycle",
    "CycleFamily",
    "InvariantMeasure",
    "phase_of",
    "phases_of",
    "find_limit_cycle",
    "cycle_family",
    "invariant_measure",
    "hausdorff_scaled",
]

_PHASE_ANCHOR_TOL = 1e-12


def phase_of(point, anchor) -> float:
    """Phase of ``point`` in [0, 2pi) about ``anchor``.

    Raises UndefinedPhaseError within 1e-12 (scaled) of the anchor,
    where the angle carries no information.
    """
    dn = point[0] - anchor[0]
    dp = PSCALE * (point[1] - anchor[1])
    if (dn * dn + dp * dp) < _PHASE_ANCHOR_TOL * _PHASE_ANCHOR_TOL:
        raise UndefinedPhaseError(
            f"point {tuple(point)} coincides with the phase anchor "
            f"{tuple(anchor)} to within {_PHASE_ANCHOR_TOL:g} (scaled)")
    return atan2(dp, dn) % tau


def phases_of(points, anchor) -> np.ndarray:
    """Vectorised :func:`phase_of` for an (m, 2) array of states."""
    pts = np.asarray(points, dtype=float)
    dn = pts[:, 0] - anchor[0]
    dp = PSCALE * (pts[:, 1] - anchor[1])
    bad = np.hypot(dn, dp) < _PHASE_ANCHOR_TOL
    if np.any(bad):
        raise UndefinedPhaseError(
            f"{int(bad.sum())} point(s) coincide with the phase anchor")
    return np.arctan2(dp, dn) % tau


@dataclass
class LimitCycle:
    """An attracting periodic orbit sampled uniformly in time.

    ``samples`` holds ``n_samples`` states at times ``k * period / n``
    starting from the upward crossing of the Poincare section
    ``N = anchor[0]``; ``point_at`` evaluates the underlying dense
    solution at arbitrary time offsets (mod period).
    """

    model: object
    anchor: tuple[float, float]
    period: float
    times: np.ndarray
    samples: np.ndarray
    closure_error: float
    _dense: Trajectory = field(repr=False, default=None)

    @property
    def r(self) -> float:
        return self.model.r

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def point_at(self, t: float) -> np.ndarray:
        """Dense-output state at time offset ``t`` (wrapped mod period)."""
        t = fmod(t, self.period)
        if t < 0:
            t += self.period
        return self._dense.state_at(t)

    def phases(self) -> np.ndarray:
        return phases_of(self.samples, self.anchor)

    def envelope(self) -> tuple[float, float, float, float]:
        """(min N, max N, min P, max P) over the stored samples."""
        return (float(self.samples[:, 0].min()),
                float(self.samples[:, 0].max()),
                float(self.samples[:, 1].min()),
                float(self.samples[:, 1].max()))

    def distance_to(self, point) -> float:
        """Scaled distance from a state to the cycle (closed polyline)."""
        pts = self.samples * np.array([1.0, PSCALE])
        closed = np.vstack([pts, pts[:1]])
        a, b = closed[:-1], closed[1:]
        ab = b - a
        denom = (ab * ab).sum(axis=1)
        denom = np.where(denom > 0, denom, 1.0)
        q = np.array([point[0], PSCALE * point[1]])
        t = ((q - a) * ab).sum(axis=1) / denom
        np.clip(t, 0.0, 1.0, out=t)
        diff = q - (a + t[:, None] * ab)
        return float(np.sqrt((diff * diff).sum(axis=1).min()))


def find_limit_cycle(model, cfg: IntegratorConfig = ode_core.DEFAULT_CONFIG,
                     transient: float = 500.0, n_samples: int = 512,
                     return_tol: float = 1e-6) -> LimitCycle:
    """Locate the attracting limit cycle of a frozen model.

    Starts just off the coexistence equilibrium e3, discards
    ``transient`` years, then collects upward crossings of the section
    ``N = N3`` until two successive returns agree to ``return_tol`` in
    the scaled metric.  The converged orbit is re-integrated densely
    for one period and resampled at ``n_samples`` uniform times.

    Raises NoCycleError when the trajectory instead converges to an
    equilibrium (naming it), when no return converges within the
    ``cfg.max_time`` budget, or when the system has no coexistence
    equilibrium at all.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    try:
        anchor = models.coexistence_point(model)
    except CoexistenceUndefined as exc:
        raise NoCycleError(
            f"no limit cycle at r={model.r:g}: {exc}") from exc
    eqs = models.equilibria(model)
    catalog = AttractorCatalog(
        labels=eqs.labels(),
        points=tuple(e.state for e in eqs),
        section_n=anchor[0],
        cycle_tol=return_tol,
    )
    # Small radial offset: far enough from e3 to clear its convergence
    # ball, well inside the basin.
    x0 = (anchor[0] + 1e-2, anchor[1])
    if transient > 0:
        start = integrate_endpoint(model, x0, 0.0, transient, cfg).state
    else:
        start = x0
    out = converge_to_attractor(model, start, catalog, cfg)
    if out.kind == "equilibrium":
        raise NoCycleError(
            f"no limit cycle at r={model.r:g}: trajectory converges to "
            f"equilibrium {out.label}")
    if out.kind != "cycle":
        raise NoCycleError(
            f"no limit cycle found at r={model.r:g} within "
            f"max_time={cfg.max_time:g} (section returns did not "
            f"converge; the orbit may be near a bifurcation)")

    period = out.period
    sec = out.section_state
    dense = integrate(model, sec, 0.0, period, cfg)
    closure = scaled_dist(dense.states[0], dense.states[-1])
    if closure > 100 * return_tol:
        raise NoCycleError(
            f"orbit at r={model.r:g} fails to close: one-period gap "
            f"{closure:.3g} (scaled) exceeds {100 * return_tol:.3g}")
    times = np.arange(n_samples) * (period / n_samples)
    samples = dense.sample(times)
    if samples[:, 0].min() <= 0 or samples[:, 1].min() <= 0:
        raise NoCycleError(
            f"detected orbit at r={model.r:g} leaves the open positive "
            "quadrant")
    # Winding number about the anchor must be exactly one.
    ph = np.unwrap(np.arctan2(PSCALE * (samples[:, 1] - anchor[1]),
                              samples[:, 0] - anchor[0]))
    dphi = ph[-1] - ph[0] + (ph[1] - ph[0])  # close the loop estimate
    winding = round(dphi / tau)
    if winding != 1:
        raise NoCycleError(
            f"orbit at r={model.r:g} winds {winding}x about e3 "
            "(expected a simple cycle)")
    return LimitCycle(
        model=model,
        anchor=anchor,
        period=period,
        times=times,
        samples=samples,
        closure_error=closure,
        _dense=dense,
    )


# ----------------------------------------------------------------------
# Cycle families
# ----------------------------------------------------------------------

def hausdorff_scaled(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two sample clouds (scaled)."""
    ax = a * np.array([1.0, PSCALE])
    bx = b * np.array([1.0, PSCALE])
    d = np.hypot(ax[:, None, 0] - bx[None, :, 0],
                 ax[:, None, 1] - bx[None, :, 1])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass
class CycleFamily:
    """Cycles of one model family along a growth-rate grid.

    The family is the union strip G swept by the cycle as r varies;
    ``hausdorff`` holds adjacent-pair distances used by the continuity
    check at construction.
    """

    r_values: np.ndarray
    cycles: tuple[LimitCycle, ...]
    hausdorff: np.ndarray

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def nearest(self, r: float) -> LimitCycle:
        """Family member at the grid point closest to ``r``."""
        i = int(np.argmin(np.abs(self.r_values - r)))
        return self.cycles[i]


def cycle_family(model_template, r_lo: float, r_hi: float,
                 step: float = 0.01,
                 cfg: IntegratorConfig = ode_core.DEFAULT_CONFIG,
                 n_samples: int = 512) -> CycleFamily:
    """Cycles at every grid point ``r_lo, r_lo+step, ..., r_hi``.

    Raises PathInvalidError (naming the offending r) when any grid
    point has no cycle or when adjacent cycles jump discontinuously:
    a scaled Hausdorff distance above ``10 * step * slope`` with the
    slope estimated as the median of neighbouring distance/step ratios
    flags a bifurcation crossing inside the grid interval.
    """
    if not (r_hi > r_lo):
        raise ValueError(f"need r_hi > r_lo, got [{r_lo}, {r_hi}]")
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    n = int(round((r_hi - r_lo) / step))
    rs = r_lo + step * np.arange(n + 1)
    if rs[-1] < r_hi - 1e-12:
        rs = np.append(rs, r_hi)
    rs[-1] = r_hi
    cycles = []
    for r in rs:
        try:
            cycles.append(find_limit_cycle(model_template.with_r(float(r)),
                                           cfg, n_samples=n_samples))
        except NoCycleError as exc:
            raise PathInvalidError(
                f"cycle family broken at r={r:g}: {exc}", float(r)
            ) from exc
    dists = np.array([
        hausdorff_scaled(cycles[i].samples, cycles[i + 1].samples)
        for i in range(len(cycles) - 1)
    ])
    if len(dists) >= 2:
        slopes = dists / step
        med = float(np.median(slopes))
        if med > 0:
            bad = np.nonzero(slopes > 10.0 * med)[0]
            if len(bad):
                i = int(bad[0])
                raise PathInvalidError(
                    f"cycle family discontinuous between r={rs[i]:g} and "
                    f"r={rs[i + 1]:g}: Hausdorff jump {dists[i]:.3g} "
                    f"(scaled) vs typical {med * step:.3g}",
                    float(rs[i]))
    return CycleFamily(r_values=rs, cycles=tuple(cycles), hausdorff=dists)


# ----------------------------------------------------------------------
# Invariant measure
# ----------------------------------------------------------------------

@dataclass
class InvariantMeasure:
    """Empirical phase distribution of endpoints of a cloud of orbits.

    Two views of the same endpoint sample: ``window_mass[k]`` counts
    endpoints within a sliding window of half-width ``eps`` around
    ``phi_grid[k]`` (divided by J, so windows overlap and the curve
    need not sum to 1), while ``bin_mass`` is an ordinary disjoint
    histogram over ``bin_edges`` normalised to sum exactly 1.
    """

    anchor: tuple[float, float]
    eps: float
    j_points: int
    t_final: float
    phi_grid: np.ndarray
    window_mass: np.ndarray
    bin_edges: np.ndarray
    bin_mass: np.ndarray
    endpoint_phases: np.ndarray

    def window_mass_at(self, phi: float) -> float:
        """Sliding-window mass K/J at an arbitrary phase."""
        d = np.abs((self.endpoint_phases - phi + pi) % tau - pi)
        return float(np.count_nonzero(d <= self.eps)) / self.j_points


def _arc_uniform_points(cycle: LimitCycle, j: int) -> np.ndarray:
    """J points spread uniformly in scaled arc length along the cycle."""
    pts = cycle.samples
    closed = np.vstack([pts, pts[:1]])
    seg = np.hypot(np.diff(closed[:, 0]),
                   PSCALE * np.diff(closed[:, 1]))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = (np.arange(j) + 0.5) * (total / j)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    frac = (targets - cum[idx]) / np.where(seg[idx] > 0, seg[idx], 1.0)
    return closed[idx] + frac[:, None] * (closed[idx + 1] - closed[idx])


def invariant_measure(cycle: LimitCycle, j_points: int = 10000,
                      t_final: float = 100.0, eps: float = 0.1,
                      n_grid: int = 512, n_bins: int = 64,
                      cfg: IntegratorConfig = ode_core.DEFAULT_CONFIG,
                      ) -> InvariantMeasure:
    """Empirical invariant measure of the cycle's phase.

    Places ``j_points`` initial conditions uniformly in scaled arc
    length around the cycle, integrates each for ``t_final`` under the
    frozen flow, and records the endpoint phases about the cycle's
    anchor.  Because the flow crawls through slow cycle segments and
    races through fast ones, the endpoints pile up where the orbit
    spends its time — the sliding-window curve mu(phi) = K/J of the
    appendix construction.
    """
    if j_points < 1:
        raise ValueError(f"j_points must be >= 1, got {j_points}")
    if not (0 < eps < pi):
        raise ValueError(f"eps must be in (0, pi), got {eps}")
    if t_final <= 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    ics = _arc_uniform_points(cycle, j_points)
    model = cycle.model
    endpoints = np.empty((j_points, 2))
    for i in range(j_points):
        res = integrate_endpoint(model, ics[i], 0.0, t_final, cfg)
        endpoints[i] = res.state
    phases = phases_of(endpoints, cycle.anchor)

    phi_grid = np.arange(n_grid) * (tau / n_grid)
    # Circular distance of every endpoint to every grid phase, counted
    # within the half-width eps window.
    d = np.abs((phases[None, :] - phi_grid[:, None] + pi) % tau - pi)
    window_mass = (d <= eps).sum(axis=1) / j_points

    bin_edges = np.arange(n_bins + 1) * (tau / n_bins)
    counts, _ = np.histogram(phases, bins=bin_edges)
    bin_mass = counts / j_points
    return InvariantMeasure(
        anchor=cycle.anchor,
        eps=eps,
        j_points=j_points,
        t_final=t_final,
        phi_grid=phi_grid,
        window_mass=window_mass,
        bin_edges=bin_edges,
        bin_mass=bin_mass,
        endpoint_phases=phases,
    )
