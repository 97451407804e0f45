"""Pure-Python integrator backend for the built-in model fields.

Same call signatures and termination semantics as the compiled
``_fast`` extension; used as the fallback when the extension is not
built, and as the cross-check in the backend-equivalence tests.
"""

from __future__ import annotations

from . import _generic
from ._generic import (
    classify_attractor as _classify_generic,
    integrate_endpoint as _endpoint_generic,
    integrate_path as _path_generic,
)

__all__ = [
    "NAME",
    "MODEL_RMA",
    "MODEL_MAY",
    "make_rhs",
    "rhs_eval",
    "integrate_path",
    "integrate_endpoint",
    "classify_attractor",
]

NAME = "python"

MODEL_RMA = 0
MODEL_MAY = 1


def make_rhs(model, params, sign=1.0):
    """Build the planar vector field ``(n, p) -> (dn, dp)`` as a closure.

    ``params`` follows the kernel layout: RMA ``(r, c, alpha, beta,
    chi, delta, mu, nu)``, May ``(r, c, alpha, beta, s, q, mu, nu,
    eps)``.  The prey growth term is evaluated in the factored form
    ``N (r - c N)`` so r = 0 needs no special casing.  ``sign=-1``
    yields the time-reversed field.
    """
    if model == MODEL_RMA:
        r, c, alpha, beta, chi, delta, mu, nu = params

        def rhs(n, p, _s=sign):
            g = alpha * n / (beta + n) * p
            return (
                _s * (n * (r - c * n) * (n - mu) / (nu + n) - g),
                _s * (chi * g - delta * p),
            )

        return rhs
    if model == MODEL_MAY:
        r, c, alpha, beta, s, q, mu, nu, eps = params

        def rhs(n, p, _s=sign):
            g = alpha * n / (beta + n) * p
            return (
                _s * (n * (r - c * n) * (n - mu) / (nu + n) - g),
                _s * (s * p * (1.0 - q * p / (n + eps))),
            )

        return rhs
    raise ValueError(f"unknown model id {model!r}")


def rhs_eval(model, params, n, p):
    """Single right-hand-side evaluation (used by tests and oracles)."""
    return make_rhs(model, params)(n, p)


def integrate_path(model, params, n0, p0, t0, t1, rtol, atol_n, atol_p,
                   max_step, first_step=0.0, direction=1, box=None):
    rhs = make_rhs(model, params, 1.0 if direction >= 0 else -1.0)
    return _path_generic(rhs, n0, p0, t0, t1, rtol, atol_n, atol_p,
                         max_step, first_step, box)


def integrate_endpoint(model, params, n0, p0, t0, t1, rtol, atol_n, atol_p,
                       max_step, ball=None):
    rhs = make_rhs(model, params)
    return _endpoint_generic(rhs, n0, p0, t0, t1, rtol, atol_n, atol_p,
                             max_step, ball)


def classify_attractor(model, params, n0, p0, t0, max_time, rtol, atol_n,
                       atol_p, max_step, eq_points, eq_radius, dwell,
                       n_star, cycle_tol, min_amp):
    rhs = make_rhs(model, params)
    return _classify_generic(rhs, n0, p0, t0, max_time, rtol, atol_n,
                             atol_p, max_step, eq_points, eq_radius,
                             dwell, n_star, cycle_tol, min_amp)


# Re-export the shared status codes so callers can use either backend
# module interchangeably.
PSCALE = _generic.PSCALE
CLAMP_FLOOR = _generic.CLAMP_FLOOR
STATUS_OK = _generic.STATUS_OK
STATUS_BALL = _generic.STATUS_BALL
STATUS_BOX_EXIT = _generic.STATUS_BOX_EXIT
STATUS_UNDERFLOW = _generic.STATUS_UNDERFLOW
STATUS_BLOWUP = _generic.STATUS_BLOWUP
STATUS_NEGATIVE = _generic.STATUS_NEGATIVE
CLS_EQUILIBRIUM = _generic.CLS_EQUILIBRIUM
CLS_CYCLE = _generic.CLS_CYCLE
CLS_UNDECIDED = _generic.CLS_UNDECIDED
CLS_FAILED = _generic.CLS_FAILED
