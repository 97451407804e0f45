"""Compare the compiled and pure-Python integration backends.

Times a few representative workloads through the public API with each
available backend and prints a table with per-task speedups.

Usage:
    python3 benchmarks/bench_backends.py [--repeat N] [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phasetip import _kernels, basins, cycles, models, ode_core, tipping
from phasetip.climate import ClimateConfig
from phasetip.ode_core import DEFAULT_CONFIG


def _task_integrate():
    model = models.rma_lynx_hare(2.47)
    ode_core.integrate(model, (3.0, 0.002), 0.0, 500.0, DEFAULT_CONFIG)


def _task_cycle():
    cycles.find_limit_cycle(models.rma_lynx_hare(2.47))


def _task_threshold():
    basins.allee_threshold(models.rma_lynx_hare(1.8))


def _task_monte_carlo():
    config = tipping.ExperimentConfig(
        model=models.rma_lynx_hare(2.47),
        climate=ClimateConfig(r_low=1.6, r_high=2.7, t_max=150.0),
        n_runs=3, seed=1, horizon=150.0, r_collapse=2.609)
    tipping.run_monte_carlo(config)


TASKS = [
    ("integrate 500 yr", _task_integrate),
    ("limit cycle", _task_cycle),
    ("basin threshold", _task_threshold),
    ("monte carlo 3x150 yr", _task_monte_carlo),
]


def _time_task(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="runs per task; the best time is kept")
    parser.add_argument("--quick", action="store_true",
                        help="single run per task")
    args = parser.parse_args()
    repeat = 1 if args.quick else max(1, args.repeat)

    names = _kernels.available()
    if len(names) < 2:
        print(f"only one backend available ({names[0]}); "
              f"build the compiled extension to compare")
    results: dict[str, dict[str, float]] = {name: {} for name in names}
    original = _kernels.default_name()
    try:
        for name in names:
            _kernels.set_default(name)
            for label, fn in TASKS:
                fn()  # warm caches so timings compare integration only
                results[name][label] = _time_task(fn, repeat)
    finally:
        _kernels.set_default(original)

    width = max(len(label) for label, _ in TASKS)
    header = f"{'task':<{width}}" + "".join(f"  {n:>12}" for n in names)
    if len(names) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, _ in TASKS:
        row = f"{label:<{width}}"
        for name in names:
            row += f"  {results[name][label] * 1e3:>10.1f}ms"
        if len(names) == 2:
            slow, fast = (results[names[0]][label],
                          results[names[1]][label])
            hi, lo = max(slow, fast), min(slow, fast)
            winner = names[1] if fast < slow else names[0]
            row += f"  {hi / lo:>6.1f}x {winner}"
        print(row)


if __name__ == "__main__":
    main()
