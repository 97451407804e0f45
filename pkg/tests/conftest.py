"""Shared fixtures: reference cycles and cached threshold traces.

The two limit cycles and the handful of Allee-threshold polylines
used across the suite are expensive enough to trace once per session.
"""

from __future__ import annotations

import pytest

from phasetip import basins, cycles, models


@pytest.fixture(scope="session")
def rma_cycle():
    """RMA reference cycle at r = 2.47."""
    return cycles.find_limit_cycle(models.rma_lynx_hare(2.47))


@pytest.fixture(scope="session")
def may_cycle():
    """May reference cycle at r = 3.3, q = 205."""
    return cycles.find_limit_cycle(models.may_lynx_hare(3.3))


@pytest.fixture(scope="session")
def threshold():
    """Cached Allee-threshold factory: threshold("rma", 1.8) etc."""
    cache: dict[tuple[str, float], object] = {}

    def get(kind: str, r: float):
        key = (kind, round(r, 12))
        if key not in cache:
            model = (models.rma_lynx_hare(r) if kind == "rma"
                     else models.may_lynx_hare(r))
            cache[key] = basins.allee_threshold(model)
        return cache[key]

    return get
