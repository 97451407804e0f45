"""Basin of attraction of the cycle and its instability under r shifts.

The boundary of the cycle's basin is the Allee threshold: the stable
manifold of the boundary saddle (e2 for the Rosenzweig-MacArthur
model, e4 for the May model), traced by integrating the flow backward
from two seeds straddling the saddle along its stable eigenvector.
Membership queries cast a ray from the query point to the coexistence
equilibrium e3 (which lies inside the basin) and count polyline
crossings; a thin band around the polyline is reported indeterminate
rather than guessed.

Basin instability of a cycle Gamma(r1) against a shifted threshold
theta(r2) is classified by the signed scaled distance of the cycle
samples to the threshold: everywhere inside (Stable), tangent to
within tolerance (Marginal), properly crossing (Partial), touching
from outside (AlmostTotal), or everywhere outside (Total).
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from math import tau

import numpy as np

from . import models, ode_core
from .cycles import CycleFamily, LimitCycle, phases_of
from .errors import NotBistableError, PhasetipError, ResolutionError
from .ode_core import (
    PSCALE,
    IntegratorConfig,
    converge_to_attractor,
    scaled_dist,
)

__all__ = [
    "BasinBoundary",
    "Membership",
    "InstabilityClass",
    "BasinInstability",
    "PhaseInterval",
    "BIRegionMap",
    "GStripPartition",
    "allee_threshold",
    "in_basin",
    "classify_basin_instability",
    "unstable_phase_interval",
    "find_marginal_r2",
    "bi_region_map",
    "g_strip_partition",
]

_BAND_HALF_WIDTH = 5e-4      # indeterminate band about the polyline (scaled)
_MAX_SEGMENT = 1e-2          # polyline resolution (scaled)
_SEED_OFFSET = 1e-6          # seed displacement along stable eigvec (scaled)
_MAX_BACK_TIME = 300.0


class Membership(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    INDETERMINATE = "indeterminate"


@dataclass
class BasinBoundary:
    """Polyline approximation of the Allee threshold at one r.

    ``polyline`` is an (m, 2) array of states ordered along the
    manifold; ``interior_ref`` is a point certified inside the basin
    (the coexistence equilibrium) used as ray target by membership
    queries.
    """

    model: object
    saddle_label: str
    saddle: tuple[float, float]
    polyline: np.ndarray
    box: tuple[float, float, float, float]
    interior_ref: tuple[float, float]

    @property
    def r(self) -> float:
        return self.model.r

    def query_polyline(self) -> np.ndarray:
        """Decimated copy of the polyline used for membership queries.

        Douglas-Peucker simplification with a scaled deviation budget
        of 1e-4 — an order of magnitude below the indeterminate band —
        so distance and crossing-parity answers agree with the full
        polyline everywhere outside the band.
        """
        try:
            return self._query_poly
        except AttributeError:
            self._query_poly = _decimate(self.polyline, 1e-4)
            return self._query_poly

    def scaled_segments(self):
        """Cached query-polyline segment endpoints, scaled coordinates."""
        try:
            return self._segs
        except AttributeError:
            pts = self.query_polyline() * np.array([1.0, PSCALE])
            self._segs = (pts[:-1], pts[1:])
            return self._segs


def _stable_eigvec(model, saddle) -> np.ndarray:
    """Unit (scaled) eigenvector of the contracting eigenvalue."""
    j = models.jacobian(model, saddle)
    lam = np.linalg.eigvals(j)
    lam = lam[np.argsort(lam.real)]
    lam_s = lam[0].real
    a = np.array([[j[0, 0] - lam_s, j[0, 1]], [j[1, 0], j[1, 1] - lam_s]])
    # Null vector from the better-conditioned row.
    r0, r1 = a[0], a[1]
    row = r0 if np.hypot(*r0) >= np.hypot(*r1) else r1
    v = np.array([-row[1], row[0]])
    if np.hypot(*v) == 0:  # diagonal Jacobian: axis eigvectors
        v = np.array([1.0, 0.0]) if abs(a[0, 0]) < abs(a[1, 1]) \
            else np.array([0.0, 1.0])
    s = np.hypot(v[0], PSCALE * v[1])
    return v / s


def _decimate(poly: np.ndarray, tol: float) -> np.ndarray:
    """Douglas-Peucker simplification in scaled coordinates."""
    pts = poly * np.array([1.0, PSCALE])
    n = len(pts)
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        a, b = pts[i], pts[j]
        ab = b - a
        seg = pts[i + 1:j] - a
        L2 = ab @ ab
        if L2 == 0.0:
            d = np.hypot(seg[:, 0], seg[:, 1])
        else:
            d = np.abs(ab[0] * seg[:, 1] - ab[1] * seg[:, 0]) / np.sqrt(L2)
        k = int(np.argmax(d))
        if d[k] > tol:
            m = i + 1 + k
            keep[m] = True
            stack.append((i, m))
            stack.append((m, j))
    return poly[keep]


def _densify(traj, max_seg: float) -> np.ndarray:
    """Resample a trajectory until consecutive gaps <= max_seg (scaled)."""
    if len(traj.times) < 2:
        return traj.states.copy()
    ts = traj.times.copy()
    for _ in range(16):
        pts = traj.sample(ts)
        gaps = np.hypot(np.diff(pts[:, 0]), PSCALE * np.diff(pts[:, 1]))
        bad = np.nonzero(gaps > max_seg)[0]
        if not len(bad):
            return pts
        mids = 0.5 * (ts[bad] + ts[bad + 1])
        ts = np.sort(np.concatenate([ts, mids]))
    return traj.sample(ts)


def _clip_to_box(pts: np.ndarray, box) -> np.ndarray:
    """Trim trailing points outside the box, interpolating the exit."""
    n_lo, n_hi, p_lo, p_hi = box
    inside = ((pts[:, 0] >= n_lo) & (pts[:, 0] <= n_hi)
              & (pts[:, 1] >= p_lo) & (pts[:, 1] <= p_hi))
    if inside.all():
        return pts
    first_out = int(np.argmin(inside))
    if first_out == 0:
        return pts[:1]
    a, b = pts[first_out - 1], pts[first_out]
    # Largest step fraction keeping every coordinate in the box.
    t_best = 1.0
    for k, (lo, hi) in enumerate(((n_lo, n_hi), (p_lo, p_hi))):
        d = b[k] - a[k]
        if d > 0 and b[k] > hi:
            t_best = min(t_best, (hi - a[k]) / d)
        elif d < 0 and b[k] < lo:
            t_best = min(t_best, (lo - a[k]) / d)
    cut = a + max(t_best, 0.0) * (b - a)
    return np.vstack([pts[:first_out], cut])


def allee_threshold(model, cfg: IntegratorConfig | None = None,
                    max_back_time: float = _MAX_BACK_TIME,
                    max_segment: float = _MAX_SEGMENT) -> BasinBoundary:
    """Trace the basin boundary (Allee threshold) of the frozen model.

    Integrates the two stable-manifold branches of the boundary saddle
    backward in time until they leave the window
    ``[0, 1.2 r/c] x [0, 20 P3]`` or hit an axis, then joins them
    through the saddle into one polyline with scaled segment lengths
    at most ``max_segment``.

    Raises NotBistableError when the model has no boundary saddle
    (no e2/e4 saddle, or no coexistence state to anchor the basin).
    """
    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    eqs = models.equilibria(model)
    kind = "rma" if isinstance(model, models.RmaParams) else "may"
    saddle_label = "e2" if kind == "rma" else "e4"
    try:
        saddle_eq = eqs[saddle_label]
    except KeyError:
        raise NotBistableError(
            f"no boundary saddle {saddle_label} at r={model.r:g}; the "
            "frozen system is not bistable") from None
    if saddle_eq.stability is not models.StabilityClass.SADDLE:
        raise NotBistableError(
            f"{saddle_label} at r={model.r:g} is {saddle_eq.stability.name}, "
            "not a saddle; no Allee threshold exists")
    try:
        interior = models.coexistence_point(model)
    except Exception as exc:
        raise NotBistableError(
            f"no coexistence state at r={model.r:g}: {exc}") from exc
    p3 = interior[1]
    if p3 <= 0:
        raise NotBistableError(
            f"coexistence predator level {p3:g} <= 0 at r={model.r:g}")
    box = (0.0, 1.2 * model.r / model.c, 0.0, 20.0 * p3)

    saddle = saddle_eq.state
    v = _stable_eigvec(model, saddle)
    branches = []
    for sign in (+1.0, -1.0):
        seed = (saddle[0] + sign * _SEED_OFFSET * v[0],
                saddle[1] + sign * _SEED_OFFSET * v[1])
        traj = ode_core._integrate_raw(
            model, seed, 0.0, max_back_time, cfg, direction=-1, box=box)
        pts = _densify(traj, max_segment)
        pts = _clip_to_box(pts, box)
        keep = (pts[:, 0] >= 0) & (pts[:, 1] >= 0)
        pts = pts[keep]
        if len(pts) >= 3:
            branches.append(pts)
        else:
            branches.append(None)
    minus, plus = branches[1], branches[0]
    parts = []
    if minus is not None:
        parts.append(minus[::-1])
    parts.append(np.array([saddle]))
    if plus is not None:
        parts.append(plus)
    poly = np.vstack(parts)
    # Drop exact duplicates introduced by the seed points.
    d = np.hypot(np.diff(poly[:, 0]), PSCALE * np.diff(poly[:, 1]))
    keep = np.concatenate([[True], d > 0])
    poly = poly[keep]
    if len(poly) < 2:
        raise NotBistableError(
            f"threshold trace at r={model.r:g} degenerate "
            f"({len(poly)} points)")
    return BasinBoundary(
        model=model,
        saddle_label=saddle_label,
        saddle=saddle,
        polyline=poly,
        box=box,
        interior_ref=interior,
    )


# ----------------------------------------------------------------------
# Membership
# ----------------------------------------------------------------------

_QUERY_CHUNK = 128


def _poly_distances(points: np.ndarray, boundary: BasinBoundary
                    ) -> np.ndarray:
    """Scaled distance of each query point to the threshold polyline."""
    a, b = boundary.scaled_segments()
    pts = np.atleast_2d(np.asarray(points, dtype=float)) \
        * np.array([1.0, PSCALE])
    ab = b - a
    denom = (ab * ab).sum(axis=1)
    denom = np.where(denom > 0, denom, 1.0)
    out = np.empty(len(pts))
    for s in range(0, len(pts), _QUERY_CHUNK):
        q = pts[s:s + _QUERY_CHUNK]                    # (k, 2)
        qa = q[:, None, :] - a[None, :, :]             # (k, m, 2)
        t = (qa * ab[None, :, :]).sum(axis=2) / denom[None, :]
        np.clip(t, 0.0, 1.0, out=t)
        diff = qa - t[:, :, None] * ab[None, :, :]
        d2 = (diff * diff).sum(axis=2)
        out[s:s + _QUERY_CHUNK] = np.sqrt(d2.min(axis=1))
    return out


def _ray_parity(points: np.ndarray, boundary: BasinBoundary) -> np.ndarray:
    """Even/odd crossing count of the segment point->e3 (True = even).

    Parity of crossings with the threshold polyline is invariant under
    the diagonal phase-space scaling, so the test runs in raw
    coordinates.  Even parity means the point sees e3 without crossing
    the threshold: it is inside the basin.
    """
    e3 = np.asarray(boundary.interior_ref)
    poly = boundary.query_polyline()
    a = poly[:-1]
    b = poly[1:]
    ab = b - a
    ea = e3[None, :] - a
    t2 = ab[:, 0] * ea[:, 1] - ab[:, 1] * ea[:, 0]     # e3 side per segment
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(pts), dtype=bool)
    for s in range(0, len(pts), _QUERY_CHUNK):
        q = pts[s:s + _QUERY_CHUNK]                    # (k, 2)
        d = e3[None, :] - q                            # ray direction
        aq = a[None, :, :] - q[:, None, :]             # (k, m, 2)
        bq = b[None, :, :] - q[:, None, :]
        s1 = d[:, 0, None] * aq[:, :, 1] - d[:, 1, None] * aq[:, :, 0]
        s2 = d[:, 0, None] * bq[:, :, 1] - d[:, 1, None] * bq[:, :, 0]
        t1 = ab[None, :, 0] * (-aq[:, :, 1]) - ab[None, :, 1] * (-aq[:, :, 0])
        crossings = ((s1 * s2 < 0) & (t1 * t2[None, :] < 0)).sum(axis=1)
        out[s:s + _QUERY_CHUNK] = (crossings % 2) == 0
    return out


def in_basin(point, boundary: BasinBoundary, mode: str = "geometric",
             band: float = _BAND_HALF_WIDTH,
             cfg: IntegratorConfig | None = None) -> Membership:
    """Is ``point`` inside the cycle's basin of attraction?

    mode="geometric" answers from the threshold polyline: points
    closer than ``band`` (scaled) to the polyline are INDETERMINATE,
    otherwise ray-crossing parity toward e3 decides.  mode="oracle"
    integrates forward instead and reports where the trajectory
    actually converges (INDETERMINATE if undecided within the budget).
    """
    if mode == "geometric":
        pt = np.asarray(point, dtype=float)[None, :]
        if _poly_distances(pt, boundary)[0] < band:
            return Membership.INDETERMINATE
        return (Membership.INSIDE if _ray_parity(pt, boundary)[0]
                else Membership.OUTSIDE)
    if mode == "oracle":
        return basin_oracle(boundary.model, point, cfg)
    raise ValueError(f"unknown membership mode {mode!r}")


def basin_oracle(model, point, cfg: IntegratorConfig | None = None
                 ) -> Membership:
    """Decide membership by forward integration alone.

    INSIDE means the trajectory converges to the interior attractor
    (the limit cycle, or the coexistence point e3 when that is
    stable); convergence to any boundary equilibrium is OUTSIDE.
    """
    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    eqs = models.equilibria(model)
    e3 = eqs.get("e3")
    catalog = ode_core.AttractorCatalog(
        labels=eqs.labels(),
        points=tuple(e.state for e in eqs),
        section_n=None if e3 is None else e3.state[0],
    )
    out = converge_to_attractor(model, point, catalog, cfg)
    if out.kind == "cycle":
        return Membership.INSIDE
    if out.kind == "equilibrium":
        return (Membership.INSIDE if out.label == "e3"
                else Membership.OUTSIDE)
    return Membership.INDETERMINATE


# ----------------------------------------------------------------------
# Instability classification
# ----------------------------------------------------------------------

class InstabilityClass(enum.Enum):
    STABLE = "Stable"
    MARGINAL = "Marginal"
    PARTIAL = "Partial"
    ALMOST_TOTAL = "AlmostTotal"
    TOTAL = "Total"

    @property
    def basin_unstable(self) -> bool:
        """True when part of the cycle lies strictly outside the basin."""
        return self in (InstabilityClass.PARTIAL,
                        InstabilityClass.ALMOST_TOTAL,
                        InstabilityClass.TOTAL)


@dataclass
class PhaseInterval:
    """Circular arc of phases [lo, hi) traversed counterclockwise."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        if self.hi == self.lo:
            return 0.0
        w = (self.hi - self.lo) % tau
        return w if w > 0.0 else tau

    def contains(self, phi: float) -> bool:
        return ((phi - self.lo) % tau) < self.width


@dataclass
class BasinInstability:
    """Verdict of one cycle against one shifted threshold."""

    label: InstabilityClass
    r_cycle: float
    r_threshold: float
    signed_max: float
    signed_min: float
    fraction_outside: float
    crossing_phases: tuple[float, ...]
    crossing_states: tuple[tuple[float, float], ...]
    signed_distances: np.ndarray
    outside_mask: np.ndarray


def _signed_distances(cycle: LimitCycle, boundary: BasinBoundary
                      ) -> tuple[np.ndarray, np.ndarray]:
    d = _poly_distances(cycle.samples, boundary)
    inside = _ray_parity(cycle.samples, boundary)
    return np.where(inside, -d, d), ~inside


def _refine_crossing(cycle: LimitCycle, boundary: BasinBoundary,
                     t_lo: float, t_hi: float) -> float:
    """Bisect the crossing time of the cycle through the threshold."""
    lo_in = _ray_parity(cycle.point_at(t_lo)[None, :], boundary)[0]
    for _ in range(60):
        mid = 0.5 * (t_lo + t_hi)
        if scaled_dist(cycle.point_at(t_lo), cycle.point_at(t_hi)) < 1e-8:
            break
        if _ray_parity(cycle.point_at(mid)[None, :], boundary)[0] == lo_in:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)


def classify_basin_instability(cycle: LimitCycle, boundary: BasinBoundary,
                               marginality_tol: float = 1e-4,
                               max_indeterminate: float = 0.01
                               ) -> BasinInstability:
    """Classify where Gamma(r_cycle) sits relative to theta(r_threshold).

    Signed scaled distances (negative inside the basin) over the cycle
    samples decide the class; sign changes are refined to crossing
    points by parity bisection on the dense cycle.

    Raises ResolutionError when more than ``max_indeterminate`` of the
    samples fall inside the polyline's uncertainty band while the
    verdict would hinge on them (near-tangent geometry needs a finer
    threshold trace).
    """
    signed, outside = _signed_distances(cycle, boundary)
    m_hi = float(signed.max())
    m_lo = float(signed.min())
    indet = np.abs(signed) < _BAND_HALF_WIDTH
    frac_indet = indet.mean()
    # Tangency verdicts tolerate band points by construction; a proper
    # crossing with most of the cycle buried in the band is suspect.
    if frac_indet > max_indeterminate and abs(m_hi) > marginality_tol \
            and abs(m_lo) > marginality_tol and m_hi * m_lo < 0 \
            and frac_indet > 0.25:
        raise ResolutionError(
            f"{frac_indet:.1%} of cycle samples are within the threshold "
            f"band ({_BAND_HALF_WIDTH:g} scaled); refine the boundary")

    crossings_t: list[float] = []
    if m_hi * m_lo < 0:
        flips = np.nonzero(outside != np.roll(outside, -1))[0]
        n = cycle.n_samples
        dt = cycle.period / n
        for i in flips:
            t_lo = cycle.times[i]
            t_hi = t_lo + dt
            crossings_t.append(_refine_crossing(cycle, boundary, t_lo, t_hi))
    cross_states = tuple(tuple(cycle.point_at(t)) for t in crossings_t)
    cross_phases = tuple(
        float(p) for p in (phases_of(np.array(cross_states), cycle.anchor)
                           if cross_states else np.empty(0)))

    if m_hi <= -marginality_tol:
        label = InstabilityClass.STABLE
    elif m_lo >= marginality_tol:
        label = InstabilityClass.TOTAL
    elif abs(m_hi) <= marginality_tol and m_lo < -marginality_tol:
        label = InstabilityClass.MARGINAL
    elif abs(m_lo) <= marginality_tol and m_hi > marginality_tol:
        label = InstabilityClass.ALMOST_TOTAL
    elif m_hi > marginality_tol and m_lo < -marginality_tol:
        label = InstabilityClass.PARTIAL
    else:
        # Both extremes within tolerance: the whole cycle hugs the
        # threshold; call it Marginal (tangency everywhere).
        label = InstabilityClass.MARGINAL
    return BasinInstability(
        label=label,
        r_cycle=cycle.r,
        r_threshold=boundary.r,
        signed_max=m_hi,
        signed_min=m_lo,
        fraction_outside=float(outside.mean()),
        crossing_phases=cross_phases,
        crossing_states=cross_states,
        signed_distances=signed,
        outside_mask=outside,
    )


def unstable_phase_interval(cycle: LimitCycle,
                            verdict: BasinInstability) -> PhaseInterval | None:
    """Arc of cycle phases lying outside the shifted basin.

    None for a Stable verdict; a zero-width interval at the tangency
    phase for Marginal; full circle for Total.  For Partial (and
    AlmostTotal with detected crossings) the arc runs between the two
    refined crossing phases and covers the outside samples.
    """
    lbl = verdict.label
    if lbl is InstabilityClass.STABLE:
        return None
    if lbl is InstabilityClass.TOTAL:
        return PhaseInterval(0.0, tau)
    if lbl is InstabilityClass.MARGINAL or not verdict.crossing_phases:
        phi = float(phases_of(
            cycle.samples[np.argmax(verdict.signed_distances)][None, :],
            cycle.anchor)[0])
        return PhaseInterval(phi, phi)
    phis = np.sort(np.asarray(verdict.crossing_phases))
    out_phis = phases_of(cycle.samples[verdict.outside_mask], cycle.anchor)
    # Pick the circular arc between consecutive crossings that covers
    # the outside samples best.
    best, best_score = None, -1.0
    m = len(phis)
    for i in range(m):
        lo = phis[i]
        hi = phis[(i + 1) % m]
        width = (hi - lo) % tau
        if width == 0:
            width = tau
        covered = np.mean(((out_phis - lo) % tau) < width)
        score = covered - width / tau * 1e-3  # prefer tighter arcs on ties
        if score > best_score:
            best_score = score
            best = PhaseInterval(float(lo), float(hi))
    return best


def find_marginal_r2(model_template, r1: float, lo: float, hi: float,
                     tol: float = 1e-6,
                     cfg: IntegratorConfig | None = None,
                     marginality_tol: float = 1e-4) -> tuple[float, BasinInstability]:
    """Threshold level r2 at which Gamma(r1) becomes tangent to theta(r2).

    Bisects on the sign of the maximum signed distance M of the cycle
    to the shifted threshold.  ``lo`` and ``hi`` must bracket the
    tangency: the cycle strictly inside at one end and at least partly
    outside at the other.  Stops as soon as |M| at the midpoint drops
    inside the marginality tolerance (so the returned verdict reads
    Marginal) or the bracket narrows to ``tol``, whichever first.
    """
    from .cycles import find_limit_cycle

    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    cyc = find_limit_cycle(model_template.with_r(r1), cfg)

    def max_signed(r2: float) -> float:
        b = allee_threshold(model_template.with_r(r2), cfg)
        signed, _ = _signed_distances(cyc, b)
        return float(signed.max())

    f_lo = max_signed(lo)
    f_hi = max_signed(hi)
    best_r, best_f = (lo, f_lo) if abs(f_lo) <= abs(f_hi) else (hi, f_hi)
    if f_lo * f_hi > 0 and abs(best_f) > marginality_tol:
        raise ValueError(
            f"no tangency bracketed on [{lo:g}, {hi:g}]: max signed "
            f"distance {f_lo:.3g} and {f_hi:.3g} share a sign")
    while hi - lo > tol and abs(best_f) > 0.5 * marginality_tol:
        mid = 0.5 * (lo + hi)
        fm = max_signed(mid)
        if abs(fm) < abs(best_f):
            best_r, best_f = mid, fm
        if fm == 0.0:
            break
        if (fm > 0) == (f_lo > 0):
            lo, f_lo = mid, fm
        else:
            hi, f_hi = mid, fm
    verdict = classify_basin_instability(
        cyc, allee_threshold(model_template.with_r(best_r), cfg),
        marginality_tol=marginality_tol)
    return best_r, verdict


# ----------------------------------------------------------------------
# Region map and strip partition
# ----------------------------------------------------------------------

_CELL_NA = "NotApplicable"


@dataclass
class BIRegionMap:
    """Instability class of Gamma(p1) over a grid of (r2, second param).

    ``labels[i, j]`` classifies threshold parameters
    ``(r2_values[i], second_values[j])``; cells where the shifted
    system is not bistable carry "NotApplicable".
    """

    model_kind: str
    p1_r: float
    second_name: str
    r2_values: np.ndarray
    second_values: np.ndarray
    labels: np.ndarray  # dtype=object of str

    def basin_unstable_mask(self) -> np.ndarray:
        return np.isin(self.labels,
                       [InstabilityClass.PARTIAL.value,
                        InstabilityClass.ALMOST_TOTAL.value,
                        InstabilityClass.TOTAL.value])


def _cycle_bearing_mask(base, r2_values: np.ndarray,
                        cfg: IntegratorConfig) -> np.ndarray:
    """Which grid levels of one column carry an attracting cycle.

    Candidates are the levels where e3 exists, is ecological, and is
    unstable (a cycle needs an unstable focus to orbit).  Among the
    candidates existence is contiguous in r: it starts at the Hopf
    and may end early where the cycle is destroyed against the Allee
    threshold, so one probe at each end plus a binary search for the
    destruction level decides the whole column.
    """
    from .scan import cycle_exists

    mask = np.zeros(len(r2_values), dtype=bool)
    cand = []
    for i, r2 in enumerate(r2_values):
        if r2 <= 0:
            continue
        e3 = models.equilibria(base.with_r(float(r2))).get("e3")
        if e3 is not None and e3.ecological \
                and e3.stability is models.StabilityClass.UNSTABLE:
            cand.append(i)
    if not cand:
        return mask

    def probe(i: int) -> bool:
        try:
            return cycle_exists(base.with_r(float(r2_values[i])), cfg)
        except PhasetipError:
            return False

    if not probe(cand[0]):
        return mask
    if probe(cand[-1]):
        mask[cand] = True
        return mask
    lo, hi = 0, len(cand) - 1   # cycle at cand[lo], none at cand[hi]
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(cand[mid]):
            lo = mid
        else:
            hi = mid
    mask[cand[:lo + 1]] = True
    return mask


def bi_region_map(model_template, p1_r: float, r2_values, second_values,
                  second_name: str,
                  cfg: IntegratorConfig | None = None) -> BIRegionMap:
    """Classify basin instability over a (r2, second parameter) grid.

    The reference cycle Gamma(p1) is computed once, at r=p1_r with the
    template's own second-parameter value, and held fixed; each grid
    cell shifts the system to (r2, second) and asks whether that
    cell's threshold still contains the fixed cycle.  Only cells in
    the oscillatory-coexistence region are classified — the cell's own
    cycle must exist for its basin to be meaningful — and cells
    outside it, or whose threshold computation fails, are labelled
    NotApplicable.
    """
    from .cycles import find_limit_cycle  # local import, avoids cycle

    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    r2_values = np.asarray(r2_values, dtype=float)
    second_values = np.asarray(second_values, dtype=float)
    if not hasattr(model_template, second_name):
        raise ValueError(
            f"model has no parameter {second_name!r}")
    cyc = find_limit_cycle(model_template.with_r(p1_r), cfg)
    labels = np.empty((len(r2_values), len(second_values)), dtype=object)
    for j, sv in enumerate(second_values):
        base = dataclasses.replace(model_template, **{second_name: float(sv)})
        bearing = _cycle_bearing_mask(base, r2_values, cfg)
        for i, r2 in enumerate(r2_values):
            if not bearing[i]:
                labels[i, j] = _CELL_NA
                continue
            try:
                b = allee_threshold(base.with_r(float(r2)), cfg)
                verdict = classify_basin_instability(cyc, b)
            except (NotBistableError, ResolutionError):
                labels[i, j] = _CELL_NA
            else:
                labels[i, j] = verdict.label.value
    return BIRegionMap(
        model_kind=type(model_template).__name__,
        p1_r=p1_r,
        second_name=second_name,
        r2_values=r2_values,
        second_values=second_values,
        labels=labels,
    )


@dataclass
class GStripPartition:
    """Pointwise split of the cycle family strip G by one threshold.

    For every family member the mask flags samples strictly outside
    the basin of the reference threshold; band points are neither
    (counted in ``indeterminate``).
    """

    r_threshold: float
    r_values: np.ndarray
    outside_masks: tuple[np.ndarray, ...]
    indeterminate_masks: tuple[np.ndarray, ...]
    fractions_outside: np.ndarray

    def rows(self):
        """Flat iterator of (r, sample index, N, P, phase, flag) rows."""
        for r, cyc_mask, ind_mask in zip(
                self.r_values, self.outside_masks, self.indeterminate_masks):
            yield r, cyc_mask, ind_mask


def g_strip_partition(family: CycleFamily, boundary: BasinBoundary
                      ) -> GStripPartition:
    """Split every cycle of the family against one fixed threshold."""
    outs = []
    indets = []
    fracs = np.empty(len(family))
    for k, cyc in enumerate(family):
        signed, outside = _signed_distances(cyc, boundary)
        band = np.abs(signed) < _BAND_HALF_WIDTH
        outs.append(outside & ~band)
        indets.append(band)
        fracs[k] = (outside & ~band).mean()
    return GStripPartition(
        r_threshold=boundary.r,
        r_values=family.r_values,
        outside_masks=tuple(outs),
        indeterminate_masks=tuple(indets),
        fractions_outside=fracs,
    )
