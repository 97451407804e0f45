"""Backend registry behaviour and compiled-vs-python equivalence.

The compiled extension is built with FP contraction off, so both
backends must produce bit-identical accepted steps, not merely close
ones.
"""

from __future__ import annotations

import numpy as np
import pytest

from phasetip import models, ode_core
from phasetip._kernels import available, default_name, get, set_default

HAVE_BOTH = len(available()) >= 2

needs_both = pytest.mark.skipif(
    not HAVE_BOTH, reason="compiled backend not built")


@pytest.fixture
def restore_backend():
    name = default_name()
    yield
    set_default(name)


# ----------------------------------------------------------------------
# Registry
# ----------------------------------------------------------------------

def test_python_backend_always_available():
    assert "python" in available()


def test_default_backend_is_registered():
    assert default_name() in available()
    assert ode_core.backend_name() == default_name()


def test_get_returns_named_backend():
    assert get("python").NAME == "python"
    assert get().NAME == default_name()


def test_unknown_backend_rejected():
    with pytest.raises(ValueError, match="unknown backend"):
        get("fortran")
    with pytest.raises(ValueError, match="unknown backend"):
        set_default("fortran")


@needs_both
def test_set_default_switches_at_runtime(restore_backend):
    set_default("python")
    assert ode_core.backend_name() == "python"
    set_default("fast")
    assert ode_core.backend_name() == "fast"


# ----------------------------------------------------------------------
# Bit-exact equivalence
# ----------------------------------------------------------------------

def _path(model, x0, t_end):
    traj = ode_core.integrate(model, x0, 0.0, t_end)
    return traj.times, traj.states


@needs_both
@pytest.mark.parametrize("model,x0,t_end", [
    (models.rma_lynx_hare(2.47), (3.0, 0.002), 40.0),
    (models.rma_lynx_hare(1.2), (5.0, 0.004), 40.0),
    (models.may_lynx_hare(3.3), (3.0, 0.002), 40.0),
    (models.may_lynx_hare(2.0), (0.5, 0.001), 40.0),
])
def test_paths_bit_identical(restore_backend, model, x0, t_end):
    set_default("python")
    t_py, y_py = _path(model, x0, t_end)
    set_default("fast")
    t_fa, y_fa = _path(model, x0, t_end)
    assert np.array_equal(t_py, t_fa)
    assert np.array_equal(y_py, y_fa)


@needs_both
def test_endpoint_with_ball_bit_identical(restore_backend):
    model = models.rma_lynx_hare(1.7)
    e0 = (0.0, 0.0)
    results = {}
    for name in ("python", "fast"):
        set_default(name)
        res = ode_core.integrate_endpoint(
            model, (0.02, 0.001), 0.0, 500.0, ball=(e0, 1e-3, 5.0))
        results[name] = res
    a, b = results["python"], results["fast"]
    assert a.converged and b.converged
    assert a.t == b.t
    assert a.state == b.state
    assert a.ball_entered == b.ball_entered
