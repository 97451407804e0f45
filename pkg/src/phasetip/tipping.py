"""Monte Carlo tipping experiments under the random growth-rate signal.

Each run integrates one population from a fixed initial state along
one realisation of the piecewise-constant forcing, holding r frozen
within epochs.  Because frozen basins are invariant under the frozen
flow, basin membership can only change at switches; the run keeps a
per-switch membership log and, if the population collapses into the
extinction ball, reports the tipping switch t1 — the earliest switch
after which the trajectory never again enters the closure of the
moving basin.  A switch leaving the state outside the basin that is
later undone by a favourable switch is a rescue, not a tipping.

Events are classed B when the post-switch growth rate exceeds the
cycle-collapse level r_h (the attractor itself has vanished) and P
otherwise (the attractor persists but the state was left behind its
shifted basin).  The tipping phase is measured about the coexistence
point of the pre-switch system.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from math import isfinite, isnan, nan

import numpy as np

from . import basins, climate, models, ode_core, scan
from .basins import Membership
from .cycles import LimitCycle, find_limit_cycle, phase_of
from .errors import ConfigError, NoCycleError, UndefinedPhaseError
from .ode_core import IntegratorConfig, integrate_endpoint

__all__ = [
    "ExperimentConfig",
    "TippingRecord",
    "MonteCarloResult",
    "FrozenCache",
    "classify_event",
    "run_with_signal",
    "run_single_experiment",
    "run_monte_carlo",
]

_DEATH_RADIUS = 1e-3   # scaled radius of the extinction ball
_DEATH_DWELL = 5.0     # years inside the ball before death is declared
_CONVERGED_TOL = 1e-2  # scaled distance to the pre-switch cycle
_R_QUANTUM = 0.002     # growth-rate quantisation of the frozen caches


@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo tipping experiment.

    ``model`` fixes every parameter except r, which the climate signal
    drives; ``r_collapse`` may be given to skip the bisection for the
    cycle-disappearance level (it is computed once otherwise).
    """

    model: object
    climate: climate.ClimateConfig
    x0: tuple[float, float] = (3.0, 0.002)
    n_runs: int = 1000
    seed: int = 0
    horizon: float = 5000.0
    r_collapse: float | None = None
    integrator: IntegratorConfig = ode_core.DEFAULT_CONFIG

    def __post_init__(self):
        if self.n_runs < 1:
            raise ConfigError(f"n_runs must be >= 1, got {self.n_runs}")
        if not (isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        n0, p0 = self.x0
        if not (isfinite(n0) and isfinite(p0) and n0 >= 0 and p0 >= 0):
            raise ConfigError(f"x0 must be finite and nonnegative, got {self.x0}")
        if self.r_collapse is not None and not isfinite(self.r_collapse):
            raise ConfigError(f"r_collapse must be finite, got {self.r_collapse}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


@dataclass
class TippingRecord:
    """Outcome of one run.

    ``t_tip`` is the tipping switch time t1 (NaN when the run never
    collapsed), ``phase`` the phase of the state x_b at that switch
    about e3 of the pre-switch system, ``rescues`` the number of
    basin re-entries before the final departure.
    """

    run_index: int
    tipped: bool
    kind: str                      # "B", "P", or ""
    t_tip: float
    t_death: float
    phase: float
    x_b: tuple[float, float]
    r_pre: float
    r_post: float
    converged_pre: bool
    rescues: int
    n_switches: int
    t_end: float


class FrozenCache:
    """Per-process cache of frozen-system geometry, keyed by quantised r.

    Growth rates are rounded to multiples of ``quantum`` before lookup,
    so nearby climate draws share one threshold trace and one cycle.
    """

    def __init__(self, model_template, cfg: IntegratorConfig,
                 quantum: float = _R_QUANTUM):
        self.template = model_template
        self.cfg = cfg
        self.quantum = quantum
        self._boundaries: dict[int, object] = {}
        self._cycles: dict[int, LimitCycle | None] = {}

    def _key(self, r: float) -> int:
        return int(round(r / self.quantum))

    def quantised(self, r: float) -> float:
        return self._key(r) * self.quantum

    def boundary(self, r: float):
        k = self._key(r)
        try:
            return self._boundaries[k]
        except KeyError:
            b = basins.allee_threshold(
                self.template.with_r(k * self.quantum), self.cfg)
            self._boundaries[k] = b
            return b

    def cycle_or_none(self, r: float) -> LimitCycle | None:
        k = self._key(r)
        try:
            return self._cycles[k]
        except KeyError:
            try:
                c = find_limit_cycle(
                    self.template.with_r(k * self.quantum), self.cfg)
            except NoCycleError:
                c = None
            self._cycles[k] = c
            return c


def classify_event(r_post: float, r_collapse: float) -> str:
    """"B" when the switch removed the attractor itself, else "P".

    The boundary case r_post == r_collapse keeps the attractor (the
    collapse is strict), so it classifies as P.
    """
    return "B" if r_post > r_collapse else "P"


def _membership(state, r: float, cache: FrozenCache, r_collapse: float
                ) -> Membership:
    """Basin membership of ``state`` under the frozen system at ``r``.

    Above the collapse level no interior attractor exists, so every
    state is outside; below it the cached (quantised-r) threshold
    decides geometrically, falling back to a forward-integration
    oracle at the exact r when the state sits inside the polyline's
    indeterminate band.
    """
    if r > r_collapse:
        return Membership.OUTSIDE
    m = basins.in_basin(state, cache.boundary(r))
    if m is Membership.INDETERMINATE:
        m = basins.basin_oracle(cache.template.with_r(r), state, cache.cfg)
    return m


def run_with_signal(config: ExperimentConfig, signal: climate.ClimateSignal,
                    r_collapse: float, cache: FrozenCache,
                    run_index: int = 0) -> TippingRecord:
    """Integrate one run along a given signal realisation."""
    model = config.model
    cfg = config.integrator
    e0 = models.equilibria(model.with_r(signal.levels[0]))["e0"].state
    ball = (e0, _DEATH_RADIUS, _DEATH_DWELL)

    state = (float(config.x0[0]), float(config.x0[1]))
    # Per-switch log: (time, membership, state, r_pre, r_post).  The
    # initial condition at t=0 is logged as a switch from its own level.
    log_t: list[float] = []
    log_mem: list[Membership] = []
    log_state: list[tuple[float, float]] = []
    log_rpre: list[float] = []
    log_rpost: list[float] = []
    death_t = nan
    t_end = 0.0
    for i in range(signal.n_epochs):
        t0 = float(signal.start_times[i])
        if t0 >= config.horizon:
            break
        r_i = float(signal.levels[i])
        r_prev = float(signal.levels[i - 1]) if i > 0 else r_i
        log_t.append(t0)
        log_mem.append(_membership(state, r_i, cache, r_collapse))
        log_state.append(state)
        log_rpre.append(r_prev)
        log_rpost.append(r_i)
        t1 = t0 + float(signal.durations[i])
        res = integrate_endpoint(model.with_r(r_i), state, t0, t1, cfg,
                                 ball=ball)
        state = res.state
        t_end = res.t
        if res.converged:
            death_t = res.ball_entered
            break

    n_switches = max(len(log_t) - 1, 0)
    outside = [m is Membership.OUTSIDE for m in log_mem]
    rescues = sum(1 for j in range(1, len(outside))
                  if outside[j - 1] and not outside[j])
    if isnan(death_t):
        return TippingRecord(
            run_index=run_index, tipped=False, kind="", t_tip=nan,
            t_death=nan, phase=nan, x_b=(nan, nan), r_pre=nan, r_post=nan,
            converged_pre=False, rescues=rescues, n_switches=n_switches,
            t_end=t_end)

    # Tipping switch: first entry of the terminal all-outside streak.
    # If the log ends in-closure (band effects), fall back to the final
    # switch, the one whose epoch the collapse happened in.
    k = len(outside) - 1
    if outside[k]:
        while k > 0 and outside[k - 1]:
            k -= 1
    x_b = log_state[k]
    r_pre = log_rpre[k]
    r_post = log_rpost[k]
    try:
        anchor = models.coexistence_point(model.with_r(r_pre))
        phase = phase_of(x_b, anchor)
    except UndefinedPhaseError:
        phase = nan
    pre_cycle = cache.cycle_or_none(r_pre)
    converged_pre = (pre_cycle is not None
                     and pre_cycle.distance_to(x_b) < _CONVERGED_TOL)
    return TippingRecord(
        run_index=run_index, tipped=True,
        kind=classify_event(r_post, r_collapse),
        t_tip=log_t[k], t_death=death_t, phase=phase, x_b=x_b,
        r_pre=r_pre, r_post=r_post, converged_pre=converged_pre,
        rescues=rescues, n_switches=n_switches, t_end=t_end)


def _run_rng(seed: int, run_index: int) -> np.random.Generator:
    """Independent per-run stream: one spawn key per run index."""
    ss = np.random.SeedSequence(seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.PCG64(ss))


def run_single_experiment(config: ExperimentConfig, run_index: int,
                          r_collapse: float, cache: FrozenCache
                          ) -> TippingRecord:
    """Sample the signal for one run index and integrate it."""
    rng = _run_rng(config.seed, run_index)
    clim = dataclasses.replace(config.climate, t_max=config.horizon)
    signal = climate.sample_signal(clim, rng)
    return run_with_signal(config, signal, r_collapse, cache, run_index)


@dataclass
class MonteCarloResult:
    """All runs of one experiment plus the shared collapse level.

    ``errors`` lists (run_index, message) for runs that raised; their
    indices are absent from ``records`` and the experiment as a whole
    still succeeds.
    """

    config: ExperimentConfig
    r_collapse: float
    records: tuple[TippingRecord, ...]
    errors: tuple[tuple[int, str], ...] = ()

    @property
    def n_tipped(self) -> int:
        return sum(r.tipped for r in self.records)

    def tipped(self) -> list[TippingRecord]:
        return [r for r in self.records if r.tipped]

    def counts_by_kind(self) -> dict[str, int]:
        out = {"B": 0, "P": 0}
        for r in self.records:
            if r.tipped:
                out[r.kind] += 1
        return out

    def tipping_times(self) -> np.ndarray:
        return np.array([r.t_tip for r in self.records if r.tipped])

    def tipping_phases(self) -> np.ndarray:
        return np.array([r.phase for r in self.records if r.tipped])


_WORKER: dict = {}


def _worker_init(config: ExperimentConfig, r_collapse: float):
    _WORKER["config"] = config
    _WORKER["r_collapse"] = r_collapse
    _WORKER["cache"] = FrozenCache(config.model, config.integrator)


def _worker_run(run_index: int):
    try:
        return run_single_experiment(
            _WORKER["config"], run_index, _WORKER["r_collapse"],
            _WORKER["cache"])
    except Exception as exc:
        return (run_index, f"{type(exc).__name__}: {exc}")


def _interior_attractor_gone(model, cfg: IntegratorConfig) -> bool:
    """True when a probe near e3 falls onto an axis attractor.

    Distinguishes a genuine collapse (the cycle is destroyed against
    the Allee threshold and everything drains to extinction) from a
    Hopf exit (the cycle merges into a then-stable e3, coexistence
    persists).
    """
    try:
        point = models.coexistence_point(model)
    except Exception:
        return True
    eqs = models.equilibria(model)
    catalog = ode_core.AttractorCatalog(
        labels=eqs.labels(),
        points=tuple(e.state for e in eqs),
        section_n=point[0],
    )
    out = ode_core.converge_to_attractor(
        model, (point[0] + 1e-2, point[1]), catalog, cfg)
    if out.kind == "cycle":
        return False
    if out.kind == "equilibrium":
        return out.label != "e3"
    raise NoCycleError(
        f"interior-attractor probe undecided at r={model.r:g}")


def _collapse_level(config: ExperimentConfig) -> float:
    """Growth rate above which no interior attractor survives.

    Probes the climate range for a level holding an interior attractor
    (cycle or stable coexistence point), expands upward until probes
    drain to extinction, and bisects the flip.  Returns +inf for
    families where the attractor never collapses (the cycle exits
    through a Hopf onto stable coexistence instead), so every event in
    such a family classifies as P.
    """
    if config.r_collapse is not None:
        return float(config.r_collapse)
    c = config.climate
    cfg = config.integrator
    lo = None
    for probe in (c.r_high, 0.5 * (c.r_low + c.r_high), c.r_low):
        if probe > 0 and not _interior_attractor_gone(
                config.model.with_r(probe), cfg):
            lo = probe
            break
    if lo is None:
        raise ConfigError(
            f"no interior attractor anywhere in the climate range "
            f"[{c.r_low:g}, {c.r_high:g}]; pass r_collapse explicitly")
    hi = max(2.0 * lo, c.r_high)
    found = False
    for _ in range(8):
        if _interior_attractor_gone(config.model.with_r(hi), cfg):
            found = True
            break
        lo, hi = hi, 2.0 * hi
    if not found:
        return float("inf")
    while hi - lo > 1e-3:
        mid = 0.5 * (lo + hi)
        if _interior_attractor_gone(config.model.with_r(mid), cfg):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def run_monte_carlo(config: ExperimentConfig, n_workers: int | None = None
                    ) -> MonteCarloResult:
    """Run the full experiment, optionally across worker processes.

    Results are independent of the worker count: every run derives its
    randomness from (seed, run_index) alone, and records are returned
    ordered by run index.
    """
    r_collapse = _collapse_level(config)
    if n_workers is not None and n_workers > 1:
        import multiprocessing as mp

        ctx = mp.get_context("spawn")
        with ctx.Pool(n_workers, initializer=_worker_init,
                      initargs=(config, r_collapse)) as pool:
            outcomes = pool.map(_worker_run, range(config.n_runs),
                                chunksize=max(1, config.n_runs // (4 * n_workers)))
    else:
        cache = FrozenCache(config.model, config.integrator)
        outcomes = []
        for i in range(config.n_runs):
            try:
                outcomes.append(
                    run_single_experiment(config, i, r_collapse, cache))
            except Exception as exc:
                outcomes.append((i, f"{type(exc).__name__}: {exc}"))
    records = [o for o in outcomes if isinstance(o, TippingRecord)]
    errors = sorted(o for o in outcomes if not isinstance(o, TippingRecord))
    records.sort(key=lambda rec: rec.run_index)
    return MonteCarloResult(config=config, r_collapse=r_collapse,
                            records=tuple(records), errors=tuple(errors))
