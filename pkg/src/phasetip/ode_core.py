"""Adaptive integration of planar predator-prey fields.

All distances between states use the scaled metric
``hypot(dN, 1e3 * dP)``: predator levels in the models studied here sit
three orders of magnitude below prey levels, and an unweighted norm
would let the prey coordinate drown out the predator entirely.

The integrator is an embedded Dormand-Prince 5(4) pair with a quartic
dense-output interpolant.  Known model fields (anything exposing a
``kernel_spec`` attribute) are dispatched to the selected kernel
backend; arbitrary Python callables ``f(n, p) -> (dn, dp)`` run on the
pure-Python reference stepper with identical semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import hypot, isfinite
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from ._kernels import _generic
from .errors import IntegrationFailure, NumericalViolation

__all__ = [
    "PSCALE",
    "scaled_dist",
    "scaled_norm",
    "IntegratorConfig",
    "Trajectory",
    "EndpointResult",
    "EventSpec",
    "EventHit",
    "AttractorCatalog",
    "AttractorOutcome",
    "integrate",
    "integrate_endpoint",
    "integrate_with_events",
    "converge_to_attractor",
    "backend_name",
]

PSCALE = _generic.PSCALE

# Dense-output coefficient matrix, exposed as ndarray for vectorised
# interpolation in Trajectory.
_DENSE = np.array(_generic.DENSE)


def scaled_norm(dn: float, dp: float) -> float:
    """Norm of a displacement in the prey/predator scaled metric."""
    return hypot(dn, PSCALE * dp)


def scaled_dist(a, b) -> float:
    """Scaled distance between two states (any 2-sequences)."""
    return hypot(a[0] - b[0], PSCALE * (a[1] - b[1]))


def backend_name() -> str:
    """Name of the kernel backend currently used for model fields."""
    return _kernels.default_name()


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and limits shared by every integration entry point.

    ``rel_tol`` applies to both components; the absolute tolerances are
    per-component so the predator keeps ~3 extra digits, mirroring the
    scaled metric.  ``max_time`` bounds open-ended runs (attractor
    convergence); plain integrations use their requested span.
    """

    rel_tol: float = 1e-8
    abs_tol_n: float = 1e-10
    abs_tol_p: float = 1e-13
    max_step: float = 1.0
    max_time: float = 2000.0
    first_step: float = 0.0

    def __post_init__(self):
        if not (0 < self.rel_tol < 1):
            raise ValueError(f"rel_tol must be in (0, 1), got {self.rel_tol}")
        for name in ("abs_tol_n", "abs_tol_p"):
            v = getattr(self, name)
            if not (v > 0):
                raise ValueError(f"{name} must be positive, got {v}")
        if not (self.max_step > 0):
            raise ValueError(f"max_step must be positive, got {self.max_step}")
        if not (self.max_time > 0):
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if self.first_step < 0:
            raise ValueError(
                f"first_step must be >= 0 (0 = automatic), got {self.first_step}"
            )

    def with_(self, **kwargs) -> "IntegratorConfig":
        return replace(self, **kwargs)


DEFAULT_CONFIG = IntegratorConfig()


def _as_state(x0) -> tuple[float, float]:
    n, p = float(x0[0]), float(x0[1])
    if not (isfinite(n) and isfinite(p)):
        raise ValueError(f"initial state must be finite, got ({n}, {p})")
    return n, p


def _kernel_spec(field_obj):
    """(model_id, params) for backend dispatch, or None for callables."""
    spec = getattr(field_obj, "kernel_spec", None)
    if spec is None and not callable(field_obj):
        raise TypeError(
            "field must be a model parameter set or a callable "
            f"(n, p) -> (dn, dp); got {type(field_obj).__name__}"
        )
    return spec


def _raise_for_status(status, t, n, p):
    if status == _generic.STATUS_UNDERFLOW:
        raise IntegrationFailure("step size underflow", t, (n, p))
    if status == _generic.STATUS_BLOWUP:
        raise IntegrationFailure("non-finite state or derivative", t, (n, p))
    if status == _generic.STATUS_NEGATIVE:
        raise NumericalViolation(
            f"state component fell below the clamp floor -{_generic.CLAMP_FLOOR:g}",
            t, (n, p),
        )


@dataclass
class Trajectory:
    """One recorded solution with dense output between the stored nodes.

    ``times``/``states`` hold every accepted step; ``state_at`` and
    ``sample`` evaluate the embedded quartic interpolant, accurate to
    the same order as the integration itself.
    """

    times: np.ndarray
    states: np.ndarray
    status: int = _generic.STATUS_OK
    _stages: np.ndarray = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def state_at(self, t: float) -> np.ndarray:
        return self.sample(np.array([t]))[0]

    def sample(self, ts) -> np.ndarray:
        """Dense-output states at each requested time (shape (k, 2))."""
        ts = np.asarray(ts, dtype=float)
        if ts.ndim != 1:
            raise ValueError("sample expects a 1-d array of times")
        lo, hi = self.times[0], self.times[-1]
        if np.any(ts < lo) or np.any(ts > hi):
            raise ValueError(
                f"requested times outside [{lo:g}, {hi:g}]"
            )
        if self._stages is None:
            raise ValueError("trajectory carries no dense-output stages")
        idx = np.searchsorted(self.times, ts, side="right") - 1
        idx = np.clip(idx, 0, len(self.times) - 2)
        h = self.times[idx + 1] - self.times[idx]
        theta = np.where(h > 0, (ts - self.times[idx]) / np.where(h > 0, h, 1.0), 0.0)
        powers = np.stack([theta, theta**2, theta**3, theta**4])  # (4, k)
        w = (_DENSE @ powers).T  # (k, 7)
        incr = np.einsum("kj,kjc->kc", w, self._stages[idx])
        return self.states[idx] + h[:, None] * incr


@dataclass(frozen=True)
class EndpointResult:
    """Outcome of an endpoint-only integration."""

    t: float
    state: tuple[float, float]
    ball_entered: float  # NaN unless the dwell completed
    status: int

    @property
    def converged(self) -> bool:
        return self.status == _generic.STATUS_BALL


def _run_path(field_obj, n0, p0, t0, t1, cfg, direction=1, box=None):
    spec = _kernel_spec(field_obj)
    if spec is not None:
        backend = _kernels.get()
        return backend.integrate_path(
            spec[0], spec[1], n0, p0, t0, t1, cfg.rel_tol, cfg.abs_tol_n,
            cfg.abs_tol_p, cfg.max_step, cfg.first_step, direction, box)
    if direction >= 0:
        rhs = lambda n, p: field_obj(n, p)  # noqa: E731
    else:
        def rhs(n, p):
            dn, dp = field_obj(n, p)
            return -dn, -dp
    return _generic.integrate_path(
        rhs, n0, p0, t0, t1, cfg.rel_tol, cfg.abs_tol_n, cfg.abs_tol_p,
        cfg.max_step, cfg.first_step, box)


def _make_trajectory(status, ts, ys, ks) -> Trajectory:
    return Trajectory(
        times=np.array(ts, dtype=float),
        states=np.array(ys, dtype=float),
        status=status,
        _stages=np.array(ks, dtype=float) if len(ks) else np.zeros((0, 7, 2)),
    )


def integrate(field_obj, x0, t0: float, t1: float,
              cfg: IntegratorConfig = DEFAULT_CONFIG) -> Trajectory:
    """Integrate from ``t0`` to ``t1`` recording every accepted step.

    Parameters
    ----------
    field_obj : model parameter set or callable ``(n, p) -> (dn, dp)``
    x0 : 2-sequence, initial state (N, P)
    t0, t1 : time span; ``t1 > t0``
    cfg : integrator tolerances

    Raises
    ------
    IntegrationFailure
        On step-size underflow or non-finite values.
    NumericalViolation
        If a component drops below the negativity clamp floor.
    """
    n0, p0 = _as_state(x0)
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    status, ts, ys, ks = _run_path(field_obj, n0, p0, t0, t1, cfg)
    tn, (nn, pn) = ts[-1], ys[-1]
    _raise_for_status(status, tn, nn, pn)
    return _make_trajectory(status, ts, ys, ks)


def _integrate_raw(field_obj, x0, t0, t1, cfg, direction=1, box=None):
    """Recorded integration without status-to-exception translation.

    Internal: used for backward manifold tracing, where running into
    the bounding box (or a step underflow near an axis) is a normal
    outcome carried in ``Trajectory.status``.
    """
    n0, p0 = _as_state(x0)
    status, ts, ys, ks = _run_path(field_obj, n0, p0, t0, t1, cfg,
                                   direction, box)
    return _make_trajectory(status, ts, ys, ks)


def integrate_endpoint(field_obj, x0, t0: float, t1: float,
                       cfg: IntegratorConfig = DEFAULT_CONFIG,
                       ball=None) -> EndpointResult:
    """Integrate keeping only the final state (no recording).

    ``ball = (center, radius, dwell)`` stops early with a converged
    result once the trajectory has remained within the scaled-metric
    ball for ``dwell`` time units.  This is the fast path used by the
    Monte Carlo experiments.
    """
    n0, p0 = _as_state(x0)
    if not t1 > t0:
        raise ValueError(f"need t1 > t0, got t0={t0}, t1={t1}")
    ball_arg = None
    if ball is not None:
        center, radius, dwell = ball
        ball_arg = (float(center[0]), float(center[1]),
                    float(radius), float(dwell))
    spec = _kernel_spec(field_obj)
    if spec is not None:
        backend = _kernels.get()
        status, t, n, p, t_enter = backend.integrate_endpoint(
            spec[0], spec[1], n0, p0, t0, t1, cfg.rel_tol, cfg.abs_tol_n,
            cfg.abs_tol_p, cfg.max_step, ball_arg)
    else:
        status, t, n, p, t_enter = _generic.integrate_endpoint(
            field_obj, n0, p0, t0, t1, cfg.rel_tol, cfg.abs_tol_n,
            cfg.abs_tol_p, cfg.max_step, ball_arg)
    _raise_for_status(status, t, n, p)
    return EndpointResult(t=t, state=(n, p), ball_entered=t_enter,
                          status=status)


# ----------------------------------------------------------------------
# Events
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class EventSpec:
    """Scalar event ``g(state) = 0`` with a crossing direction.

    direction +1 detects sign changes from negative to positive, -1 the
    reverse, 0 both.
    """

    fn: Callable
    direction: int = 0

    def __post_init__(self):
        if self.direction not in (-1, 0, 1):
            raise ValueError(f"direction must be -1, 0 or +1, got {self.direction}")


@dataclass(frozen=True)
class EventHit:
    t: float
    state: tuple[float, float]
    index: int  # which EventSpec fired


_EVENT_TIME_TOL = 1e-8


def _bisect_event(traj: Trajectory, g, lo: float, hi: float,
                  g_lo: float):
    """Refine an event time inside one step via dense-output bisection."""
    t_lo, t_hi = lo, hi
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        gm = g(*traj.state_at(mid))
        if gm == 0.0:
            t_lo = t_hi = mid
            break
        if (gm > 0.0) == (g_lo > 0.0):
            t_lo = mid
        else:
            t_hi = mid
        if t_hi - t_lo < _EVENT_TIME_TOL and abs(gm) < _EVENT_TIME_TOL:
            break
    t_ev = 0.5 * (t_lo + t_hi)
    return t_ev, traj.state_at(t_ev)


def integrate_with_events(field_obj, x0, t0: float, t1: float,
                          events: Sequence[EventSpec],
                          cfg: IntegratorConfig = DEFAULT_CONFIG,
                          ) -> tuple[Trajectory, list[EventHit]]:
    """Recorded integration plus event localisation.

    Events are detected by sign changes of ``g`` across accepted steps
    and refined on the dense interpolant to an absolute time tolerance
    of 1e-8.  A zero of ``g`` exactly at ``t0`` is reported once, at
    ``t0``.  Returns the trajectory and hits sorted by time.
    """
    traj = integrate(field_obj, x0, t0, t1, cfg)
    hits: list[EventHit] = []
    times = traj.times
    states = traj.states
    for idx, ev in enumerate(events):
        g_vals = np.array([ev.fn(n, p) for n, p in states])
        for i in range(len(times) - 1):
            g0, g1 = g_vals[i], g_vals[i + 1]
            if g0 == 0.0:
                if i == 0:
                    rising = g1 > 0
                    if ev.direction == 0 or (ev.direction == 1) == rising:
                        hits.append(EventHit(float(times[0]),
                                             tuple(states[0]), idx))
                continue
            if g1 == 0.0:
                # handled as the exact node of the next segment start
                rising = g0 < 0
                if ev.direction == 0 or (ev.direction == 1) == rising:
                    hits.append(EventHit(float(times[i + 1]),
                                         tuple(states[i + 1]), idx))
                continue
            if (g0 > 0) != (g1 > 0):
                rising = g0 < 0
                if ev.direction != 0 and (ev.direction == 1) != rising:
                    continue
                t_ev, st_ev = _bisect_event(
                    traj, ev.fn, float(times[i]), float(times[i + 1]), g0)
                hits.append(EventHit(t_ev, (st_ev[0], st_ev[1]), idx))
    hits.sort(key=lambda hh: hh.t)
    # Drop duplicates closer than the localisation tolerance.
    dedup: list[EventHit] = []
    for h in hits:
        if dedup and h.index == dedup[-1].index \
                and abs(h.t - dedup[-1].t) <= 10 * _EVENT_TIME_TOL:
            continue
        dedup.append(h)
    return traj, dedup


# ----------------------------------------------------------------------
# Attractor convergence
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AttractorCatalog:
    """Candidate limit sets monitored by :func:`converge_to_attractor`.

    ``points`` maps labels to equilibrium states; ``section_n`` is the
    prey level of the Poincare section used for cycle detection (pass
    None when no interior equilibrium exists and a cycle is therefore
    impossible).
    """

    labels: tuple[str, ...]
    points: tuple[tuple[float, float], ...]
    section_n: float | None = None
    tol_eq: float = 1e-3
    dwell: float = 5.0
    cycle_tol: float = 1e-6
    min_cycle_amp: float = 3e-3

    def __post_init__(self):
        if len(self.labels) != len(self.points):
            raise ValueError("labels and points must have equal length")
        if len(self.points) == 0:
            raise ValueError("catalog must contain at least one point")


@dataclass(frozen=True)
class AttractorOutcome:
    """Result of :func:`converge_to_attractor`.

    ``kind`` is "equilibrium", "cycle" or "undecided"; for a cycle,
    ``period`` and ``section_state`` describe the detected return.
    """

    kind: str
    label: str | None
    t: float
    state: tuple[float, float]
    period: float = float("nan")
    section_state: tuple[float, float] | None = None

    @property
    def is_cycle(self) -> bool:
        return self.kind == "cycle"


def converge_to_attractor(field_obj, x0, catalog: AttractorCatalog,
                          cfg: IntegratorConfig = DEFAULT_CONFIG,
                          ) -> AttractorOutcome:
    """Integrate until the trajectory settles on a catalog attractor.

    Equilibrium convergence means staying within a scaled ball of
    radius ``catalog.tol_eq`` for ``catalog.dwell`` time units; cycle
    convergence means two successive upward crossings of the section
    ``N = section_n`` closer than ``cycle_tol`` in the scaled metric
    (both crossings farther than ``min_cycle_amp`` from every catalog
    point, so a slow spiral into a focus is not mistaken for a cycle).
    Returns an "undecided" outcome when ``cfg.max_time`` elapses first;
    a state started exactly on a catalog point reports it immediately
    after one dwell period.
    """
    n0, p0 = _as_state(x0)
    n_star = catalog.section_n if catalog.section_n is not None else -1e300
    spec = _kernel_spec(field_obj)
    args = (n0, p0, 0.0, cfg.max_time, cfg.rel_tol, cfg.abs_tol_n,
            cfg.abs_tol_p, cfg.max_step, tuple(catalog.points),
            catalog.tol_eq, catalog.dwell, n_star, catalog.cycle_tol,
            catalog.min_cycle_amp)
    if spec is not None:
        backend = _kernels.get()
        out = backend.classify_attractor(spec[0], spec[1], *args)
    else:
        out = _generic.classify_attractor(field_obj, *args)
    code, index, t, n, p, period, cn, cp = out
    if code == _generic.CLS_EQUILIBRIUM:
        return AttractorOutcome("equilibrium", catalog.labels[index],
                                t, (n, p))
    if code == _generic.CLS_CYCLE:
        return AttractorOutcome("cycle", None, t, (n, p), period, (cn, cp))
    if code == _generic.CLS_FAILED:
        _raise_for_status(index, t, n, p)
    return AttractorOutcome("undecided", None, t, (n, p))
