"""Parameter scans: Hopf onset, cycle disappearance, attractor census.

The oscillatory window of each model is delimited below by a Hopf
bifurcation of the coexistence state e3 (located here on the real
part of its eigenvalue pair) and above by the collapse of the limit
cycle against the Allee threshold (located by bisection on a direct
does-a-cycle-exist probe).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import models, ode_core
from .errors import BracketError, NoCycleError, NotAHopfError
from .ode_core import PSCALE, AttractorCatalog, IntegratorConfig, converge_to_attractor

__all__ = [
    "BifurcationPoint",
    "BranchPoint",
    "RegionLabel",
    "Scan1DResult",
    "RegionMap",
    "detect_hopf",
    "detect_cycle_disappearance",
    "cycle_exists",
    "one_param_scan",
    "two_param_region_map",
    "census_cell",
]


@dataclass(frozen=True)
class BifurcationPoint:
    """A located codimension-one transition in r."""

    kind: str
    value: float
    bracket: tuple[float, float]
    residual: float


# ----------------------------------------------------------------------
# Hopf bifurcation of e3
# ----------------------------------------------------------------------

def _focus_real_part(model_template, r: float) -> float:
    """Re(lambda) of e3's complex pair; NotAHopfError if the pair is real."""
    m = model_template.with_r(r)
    point = models.coexistence_point(m)
    j = models.jacobian(m, point)
    tr = j[0, 0] + j[1, 1]
    det = j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0:
        raise NotAHopfError(
            f"e3 eigenvalues are real at r={r:g} (disc={disc:.3g}); "
            "stability does not change through a complex pair here")
    return 0.5 * tr


def detect_hopf(model_template, lo: float, hi: float, tol: float = 1e-4,
                polish_tol: float = 1e-7) -> BifurcationPoint:
    """Locate the Hopf bifurcation of e3 inside [lo, hi].

    Bisection on the sign of the real part of the eigenvalue pair down
    to a bracket of width ``tol``, then a secant polish of the real
    part to ``polish_tol``.  Raises BracketError when the real part
    does not change sign over [lo, hi] and NotAHopfError when the pair
    degenerates to real eigenvalues at any probe.
    """
    if not hi > lo:
        raise ValueError(f"need hi > lo, got [{lo}, {hi}]")
    f_lo = _focus_real_part(model_template, lo)
    f_hi = _focus_real_part(model_template, hi)
    if f_lo == 0.0:
        return BifurcationPoint("hopf", lo, (lo, lo), 0.0)
    if f_hi == 0.0:
        return BifurcationPoint("hopf", hi, (hi, hi), 0.0)
    if (f_lo > 0) == (f_hi > 0):
        raise BracketError(
            f"Re(lambda) has the same sign at r={lo:g} ({f_lo:.3g}) and "
            f"r={hi:g} ({f_hi:.3g}); no Hopf point bracketed")
    a, fa, b, fb = lo, f_lo, hi, f_hi
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = _focus_real_part(model_template, m)
        if fm == 0.0:
            a = b = m
            fa = fb = 0.0
            break
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    # Secant polish inside the final bracket.
    x0, f0, x1, f1 = a, fa, b, fb
    best_x, best_f = (x0, f0) if abs(f0) < abs(f1) else (x1, f1)
    for _ in range(40):
        if abs(best_f) <= polish_tol or f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not (a <= x2 <= b):
            x2 = 0.5 * (a + b)
        f2 = _focus_real_part(model_template, x2)
        x0, f0, x1, f1 = x1, f1, x2, f2
        if abs(f2) < abs(best_f):
            best_x, best_f = x2, f2
    return BifurcationPoint("hopf", best_x, (a, b), abs(best_f))


# ----------------------------------------------------------------------
# Cycle disappearance (collapse against the Allee threshold)
# ----------------------------------------------------------------------

def cycle_exists(model, cfg: IntegratorConfig | None = None) -> bool:
    """Does the frozen model have an attracting limit cycle?

    Probes from just outside e3 and follows the trajectory to an
    attractor.  When the probe exhausts its budget undecided (critical
    slowing near a Hopf point), e3's own stability settles it: in the
    plane an orbit spiralling away from an unstable focus without
    reaching any other attractor is trapped by a surrounding cycle,
    while a slow spiral into a stable focus is mere transient.  A
    nonhyperbolic e3 still raises NoCycleError.
    """
    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    try:
        point = models.coexistence_point(model)
    except Exception:
        return False
    eqs = models.equilibria(model)
    catalog = AttractorCatalog(
        labels=eqs.labels(),
        points=tuple(e.state for e in eqs),
        section_n=point[0],
    )
    out = converge_to_attractor(model, (point[0] + 1e-2, point[1]),
                                catalog, cfg)
    if out.kind == "cycle":
        return True
    if out.kind == "equilibrium":
        return False
    stability = eqs["e3"].stability
    if stability is models.StabilityClass.UNSTABLE:
        return True
    if stability is models.StabilityClass.STABLE:
        return False
    raise NoCycleError(
        f"attractor probe undecided at r={model.r:g} within "
        f"max_time={cfg.max_time:g} and e3 is {stability.value}")


def detect_cycle_disappearance(model_template, lo: float, hi: float,
                               tol: float = 1e-3,
                               cfg: IntegratorConfig | None = None
                               ) -> BifurcationPoint:
    """Level r_h above which the limit cycle no longer exists.

    Bisection on the boolean cycle probe: requires a cycle at ``lo``
    and none at ``hi`` (BracketError otherwise).  The returned value
    is the bracket midpoint with residual = half the final width.
    """
    if not hi > lo:
        raise ValueError(f"need hi > lo, got [{lo}, {hi}]")
    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    has_lo = cycle_exists(model_template.with_r(lo), cfg)
    has_hi = cycle_exists(model_template.with_r(hi), cfg)
    if not has_lo or has_hi:
        raise BracketError(
            f"cycle existence is {has_lo} at r={lo:g} and {has_hi} at "
            f"r={hi:g}; collapse not bracketed (need True at lo, False "
            "at hi)")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cycle_exists(model_template.with_r(mid), cfg):
            lo = mid
        else:
            hi = mid
    return BifurcationPoint("cycle-disappearance", 0.5 * (lo + hi),
                            (lo, hi), 0.5 * (hi - lo))


# ----------------------------------------------------------------------
# One-parameter attractor scan
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BranchPoint:
    """One equilibrium at one grid value of r."""

    r: float
    label: str
    n: float
    p: float
    stability: str
    ecological: bool


@dataclass
class Scan1DResult:
    """Interior-attractor branch along an r grid (warm-started).

    ``branches`` holds every equilibrium at every grid point with its
    stability class, flattened for serialisation; ``errors`` records
    grid points whose attractor probe failed (the scan continues past
    them with kinds[i] == "failed").
    """

    r_values: np.ndarray
    kinds: list[str]            # "cycle" | "equilibrium" | "undecided" | "failed"
    labels: list[str]           # equilibrium label or "" for cycles
    n_min: np.ndarray
    n_max: np.ndarray
    p_min: np.ndarray
    p_max: np.ndarray
    period: np.ndarray          # NaN where not a cycle
    branches: list[BranchPoint]
    errors: list[tuple[int, str]]


def one_param_scan(model_template, r_values,
                   cfg: IntegratorConfig | None = None,
                   n_samples: int = 256) -> Scan1DResult:
    """Follow the interior attractor across an increasing r grid.

    Each grid point starts from the previous attractor state (warm
    continuation) or from e3 plus a small offset at the first point
    and after any gap, converges to an attractor, and records the
    kind plus the cycle envelope (min/max of both components) and
    period where applicable.  Every equilibrium with its stability
    class is catalogued at every grid point.  A failure at one point
    (integration blow-up, no closure) is recorded in ``errors`` and
    the scan continues from a cold start.
    """
    from .cycles import find_limit_cycle

    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    r_values = np.asarray(r_values, dtype=float)
    m = len(r_values)
    kinds: list[str] = []
    labels: list[str] = []
    n_min = np.full(m, np.nan)
    n_max = np.full(m, np.nan)
    p_min = np.full(m, np.nan)
    p_max = np.full(m, np.nan)
    period = np.full(m, np.nan)
    branches: list[BranchPoint] = []
    errors: list[tuple[int, str]] = []
    warm = None
    for i, r in enumerate(r_values):
        model = model_template.with_r(float(r))
        eqs = models.equilibria(model)
        for e in eqs:
            branches.append(BranchPoint(
                r=float(r), label=e.label, n=e.n, p=e.p,
                stability=e.stability.value, ecological=e.ecological))
        point = eqs.get("e3")
        if point is None or not point.ecological:
            kinds.append("undecided")
            labels.append("")
            warm = None
            continue
        catalog = AttractorCatalog(
            labels=eqs.labels(),
            points=tuple(e.state for e in eqs),
            section_n=point.n,
        )
        start = warm if warm is not None else (point.n + 1e-2, point.p)
        try:
            out = converge_to_attractor(model, start, catalog, cfg)
            if out.kind == "cycle":
                cyc = find_limit_cycle(model, cfg, transient=0.0,
                                       n_samples=n_samples)
                n_min[i], n_max[i], p_min[i], p_max[i] = cyc.envelope()
                period[i] = cyc.period
                warm = tuple(cyc.samples[0])
            elif out.kind == "equilibrium":
                n_min[i] = n_max[i] = out.state[0]
                p_min[i] = p_max[i] = out.state[1]
                warm = tuple(out.state)
            else:
                warm = None
        except Exception as exc:
            kinds.append("failed")
            labels.append("")
            errors.append((i, f"r={r:g}: {exc}"))
            warm = None
            continue
        kinds.append(out.kind)
        labels.append(out.label or "")
    return Scan1DResult(r_values=r_values, kinds=kinds, labels=labels,
                        n_min=n_min, n_max=n_max, p_min=p_min, p_max=p_max,
                        period=period, branches=branches, errors=errors)


# ----------------------------------------------------------------------
# Two-parameter region census
# ----------------------------------------------------------------------

class RegionLabel(enum.Enum):
    OSC_COEXIST = "OscCoexistOrExtinction"
    STAT_COEXIST = "StatCoexistOrExtinction"
    PREY_ONLY = "PreyOnlyOrExtinction"
    EXTINCTION_ONLY = "ExtinctionOnly"
    UNDECIDED = "Undecided"


_PROBE_FALLBACK = (3.0, 0.002)


def census_cell(model, cfg: IntegratorConfig | None = None,
                probe_jitter: np.random.Generator | None = None
                ) -> RegionLabel:
    """Attractor census of one frozen model via four probe orbits.

    Probes near e3, near the prey-only state e1, near the extinction
    axis, and at a fixed mid-plane point; the cell label is the
    richest attractor any probe reaches (cycle > stationary
    coexistence > prey-only > extinction).  ``probe_jitter`` scales
    every probe coordinate by an independent factor in [0.99, 1.01]
    (the census-stability checks re-run cells this way).
    """
    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    eqs = models.equilibria(model)
    catalog = AttractorCatalog(
        labels=eqs.labels(),
        points=tuple(e.state for e in eqs),
        section_n=(eqs["e3"].n if "e3" in eqs.labels() else -1e300),
    )
    probes = []
    if "e3" in eqs.labels() and eqs["e3"].ecological:
        e3 = eqs["e3"].state
        probes.append((e3[0] + 1e-2, e3[1]))
    if model.r > 0:
        probes.append((model.r / model.c, 1e-5))
    probes.append((0.05, 5e-5))
    probes.append(_PROBE_FALLBACK)
    if probe_jitter is not None:
        probes = [(n * (1.0 + probe_jitter.uniform(-0.01, 0.01)),
                   p * (1.0 + probe_jitter.uniform(-0.01, 0.01)))
                  for n, p in probes]

    saw_cycle = False
    saw_e3 = False
    saw_prey = False
    saw_e0 = False
    undecided = 0
    for x0 in probes:
        out = converge_to_attractor(model, x0, catalog, cfg)
        if out.kind == "cycle":
            saw_cycle = True
            break
        if out.kind == "equilibrium":
            if out.label == "e3":
                saw_e3 = True
            elif out.label == "e0":
                saw_e0 = True
            else:
                saw_prey = True
        else:
            undecided += 1
    if saw_cycle:
        return RegionLabel.OSC_COEXIST
    if saw_e3:
        return RegionLabel.STAT_COEXIST
    if saw_prey:
        return RegionLabel.PREY_ONLY
    if saw_e0:
        return RegionLabel.EXTINCTION_ONLY
    return RegionLabel.UNDECIDED


@dataclass
class RegionMap:
    """Census labels over a (r, second parameter) grid."""

    model_kind: str
    second_name: str
    r_values: np.ndarray
    second_values: np.ndarray
    labels: np.ndarray  # (len(r), len(second)) of str


def two_param_region_map(model_template, r_values, second_values,
                         second_name: str,
                         cfg: IntegratorConfig | None = None) -> RegionMap:
    """Census over a grid: rows scan r, columns scan a second parameter."""
    import dataclasses

    if cfg is None:
        cfg = ode_core.DEFAULT_CONFIG
    if not hasattr(model_template, second_name):
        raise ValueError(f"model has no parameter {second_name!r}")
    r_values = np.asarray(r_values, dtype=float)
    second_values = np.asarray(second_values, dtype=float)
    labels = np.empty((len(r_values), len(second_values)), dtype=object)
    for j, sv in enumerate(second_values):
        base = dataclasses.replace(model_template, **{second_name: float(sv)})
        for i, r in enumerate(r_values):
            labels[i, j] = census_cell(base.with_r(float(r)), cfg).value
    return RegionMap(
        model_kind=type(model_template).__name__,
        second_name=second_name,
        r_values=r_values,
        second_values=second_values,
        labels=labels,
    )
