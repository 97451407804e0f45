"""Piecewise-constant random forcing of the prey growth rate.

The forcing holds r constant over epochs of whole-year duration and
jumps instantaneously at epoch boundaries.  Durations are geometric
(success probability rho on {1, 2, ...}, mean 1/rho years) and
amplitudes are independent uniform draws from [r_low, r_high].  An
epoch is type H when its amplitude lies strictly above the midpoint
of the range, else type L; with r_low == r_high every epoch is L.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np

from .errors import ConfigError

__all__ = [
    "ClimateConfig",
    "ClimateSignal",
    "sample_signal",
    "duration_pmf",
]


@dataclass(frozen=True)
class ClimateConfig:
    """Distribution of the random growth-rate signal.

    ``distribution`` selects the per-epoch amplitude law: "uniform"
    draws from [r_low, r_high], "binary" flips a fair coin between the
    two endpoints (the two-level switching experiments).
    """

    r_low: float
    r_high: float
    rho: float = 0.2
    t_max: float = 2000.0
    distribution: str = "uniform"

    def __post_init__(self):
        for name in ("r_low", "r_high", "rho", "t_max"):
            v = getattr(self, name)
            if not isfinite(v):
                raise ConfigError(f"climate.{name} must be finite, got {v}")
        if self.r_low < 0:
            raise ConfigError(f"climate.r_low must be >= 0, got {self.r_low}")
        if self.r_high < self.r_low:
            raise ConfigError(
                f"climate.r_high must be >= r_low, got "
                f"[{self.r_low}, {self.r_high}]")
        if not (0.0 < self.rho <= 1.0):
            raise ConfigError(
                f"climate.rho must be in (0, 1], got {self.rho}")
        if self.t_max <= 0:
            raise ConfigError(
                f"climate.t_max must be positive, got {self.t_max}")
        if self.distribution not in ("uniform", "binary"):
            raise ConfigError(
                f"climate.distribution must be 'uniform' or 'binary', "
                f"got {self.distribution!r}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.r_low + self.r_high)

    @property
    def mean_duration(self) -> float:
        return 1.0 / self.rho


def duration_pmf(k: int, rho: float) -> float:
    """P(epoch lasts exactly k years) = (1-rho)^(k-1) * rho, k >= 1."""
    if k < 1:
        return 0.0
    return (1.0 - rho) ** (k - 1) * rho


@dataclass
class ClimateSignal:
    """One realisation of the forcing.

    ``start_times[i]`` is the onset of epoch i (start_times[0] == 0),
    ``levels[i]`` its growth rate, ``durations[i]`` its whole-year
    length.  The signal covers at least [0, t_max]; the last epoch may
    run past t_max.
    """

    config: ClimateConfig
    start_times: np.ndarray
    durations: np.ndarray
    levels: np.ndarray

    @property
    def n_epochs(self) -> int:
        return len(self.levels)

    @property
    def end_time(self) -> float:
        return float(self.start_times[-1] + self.durations[-1])

    def value_at(self, t: float) -> float:
        """Growth rate at time t (right-continuous at switches)."""
        if t < 0 or t >= self.end_time:
            raise ValueError(
                f"t={t:g} outside the sampled signal [0, {self.end_time:g})")
        i = int(np.searchsorted(self.start_times, t, side="right")) - 1
        return float(self.levels[i])

    def epoch_index(self, t: float) -> int:
        if t < 0 or t >= self.end_time:
            raise ValueError(
                f"t={t:g} outside the sampled signal [0, {self.end_time:g})")
        return int(np.searchsorted(self.start_times, t, side="right")) - 1

    def epoch_type(self, i: int) -> str:
        """"H" when the epoch amplitude exceeds the range midpoint.

        Amplitudes exactly at the midpoint count as "L"; in the
        degenerate r_low == r_high signal every epoch is therefore L.
        """
        return "H" if self.levels[i] > self.config.midpoint else "L"

    def switches(self):
        """Iterate (switch time, old level, new level) over interior jumps."""
        for i in range(1, self.n_epochs):
            yield (float(self.start_times[i]),
                   float(self.levels[i - 1]), float(self.levels[i]))


def sample_signal(config: ClimateConfig, rng: np.random.Generator
                  ) -> ClimateSignal:
    """Draw one signal realisation covering [0, config.t_max].

    Epochs are drawn in order, one (duration, amplitude) pair each, so
    a given generator state always yields the same signal.
    """
    starts = [0.0]
    durs: list[int] = []
    levels: list[float] = []
    binary = config.distribution == "binary"
    t = 0.0
    while t < config.t_max:
        d = int(rng.geometric(config.rho))
        if binary:
            a = config.r_high if rng.integers(0, 2) else config.r_low
        else:
            a = float(rng.uniform(config.r_low, config.r_high))
        durs.append(d)
        levels.append(a)
        t += d
        starts.append(t)
    return ClimateSignal(
        config=config,
        start_times=np.asarray(starts[:-1], dtype=float),
        durations=np.asarray(durs, dtype=float),
        levels=np.asarray(levels, dtype=float),
    )
