"""The two frozen predator-prey families and their equilibrium structure.

Both models share the prey equation: logistic growth with a strong
Allee effect, multiplied out as ``N (r - c N) (N - mu) / (nu + N)`` so
that ``r = 0`` needs no special handling, minus a Holling type-II
predation term ``alpha N P / (beta + N)``.

* RMA: predator ``dP/dt = chi alpha N P / (beta + N) - delta P``
  (specialist predator; starves without prey).
* May: predator ``dP/dt = s P (1 - q P / (N + eps))``
  (generalist predator; persists at ``P = eps / q`` when prey is gone).

Parameter defaults reproduce the boreal-forest lynx-hare calibration
used throughout the accompanying experiments.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from math import copysign, fabs, isfinite, sqrt

import numpy as np

from ._kernels._slow import MODEL_MAY, MODEL_RMA
from .errors import CoexistenceUndefined
from .ode_core import scaled_norm

__all__ = [
    "MODEL_RMA",
    "MODEL_MAY",
    "RmaParams",
    "MayParams",
    "rma_lynx_hare",
    "may_lynx_hare",
    "PARAM_PRESETS",
    "StabilityClass",
    "Equilibrium",
    "EquilibriumSet",
    "vector_field",
    "jacobian",
    "equilibria",
    "coexistence_point",
    "classify_stability",
    "solve_cubic",
]

_NONHYPERBOLIC_TOL = 1e-7


def _check_positive(obj, names):
    for name in names:
        v = getattr(obj, name)
        if not (isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v}")


@dataclass(frozen=True)
class RmaParams:
    """Rosenzweig-MacArthur-type model with a specialist predator.

    ``r`` is the low-density prey growth rate (the climate-forced
    parameter); the remaining fields follow the lynx-hare calibration.
    """

    r: float
    c: float = 0.19
    alpha: float = 800.0
    beta: float = 1.5
    chi: float = 0.004
    delta: float = 2.2
    mu: float = 0.03
    nu: float = 0.003

    def __post_init__(self):
        if not (isfinite(self.r) and self.r >= 0):
            raise ValueError(f"r must be finite and >= 0, got {self.r}")
        _check_positive(
            self, ("c", "alpha", "beta", "chi", "delta", "mu", "nu"))

    @property
    def kernel_spec(self):
        return (MODEL_RMA, (self.r, self.c, self.alpha, self.beta,
                            self.chi, self.delta, self.mu, self.nu))

    def with_r(self, r: float) -> "RmaParams":
        return dataclasses.replace(self, r=r)


@dataclass(frozen=True)
class MayParams:
    """May-type model with a generalist predator.

    ``r`` is the climate-forced prey growth rate; ``q`` scales the
    predator carrying capacity and serves as the second bifurcation
    parameter in the two-parameter scans.
    """

    r: float
    c: float = 0.22
    alpha: float = 505.0
    beta: float = 0.3
    s: float = 0.85
    q: float = 205.0
    mu: float = 0.03
    nu: float = 0.003
    epsilon: float = 0.031

    def __post_init__(self):
        if not (isfinite(self.r) and self.r >= 0):
            raise ValueError(f"r must be finite and >= 0, got {self.r}")
        _check_positive(
            self, ("c", "alpha", "beta", "s", "q", "mu", "nu", "epsilon"))

    @property
    def kernel_spec(self):
        return (MODEL_MAY, (self.r, self.c, self.alpha, self.beta,
                            self.s, self.q, self.mu, self.nu,
                            self.epsilon))

    def with_r(self, r: float) -> "MayParams":
        return dataclasses.replace(self, r=r)

    def with_q(self, q: float) -> "MayParams":
        return dataclasses.replace(self, q=q)


def rma_lynx_hare(r: float) -> RmaParams:
    """RMA model at the standard calibration with growth rate ``r``."""
    return RmaParams(r=r)


def may_lynx_hare(r: float, q: float = 205.0) -> MayParams:
    """May model at the standard calibration with growth rate ``r``."""
    return MayParams(r=r, q=q)


PARAM_PRESETS = {
    "rma-lynx-hare": rma_lynx_hare,
    "may-lynx-hare": may_lynx_hare,
}


# ----------------------------------------------------------------------
# Field evaluation and Jacobians
# ----------------------------------------------------------------------

def vector_field(model, state) -> np.ndarray:
    """Right-hand side (dN/dt, dP/dt) at ``state = (N, P)``."""
    n, p = float(state[0]), float(state[1])
    mid, params = model.kernel_spec
    from ._kernels import _slow
    return np.array(_slow.rhs_eval(mid, params, n, p))


def jacobian(model, state) -> np.ndarray:
    """Analytic Jacobian matrix of the field at ``state``."""
    n, p = float(state[0]), float(state[1])
    r, c = model.r, model.c
    alpha, beta = model.alpha, model.beta
    mu, nu = model.mu, model.nu
    # Prey row, shared by both families:
    #   F(N) = (rN - cN^2)(N - mu)/(nu + N),  G(N) = alpha N/(beta + N)
    u = r * n - c * n * n
    du = r - 2.0 * c * n
    v = (n - mu) / (nu + n)
    dv = (nu + mu) / (nu + n) ** 2
    g = alpha * n / (beta + n)
    dg = alpha * beta / (beta + n) ** 2
    j11 = du * v + u * dv - dg * p
    j12 = -g
    if isinstance(model, RmaParams):
        j21 = model.chi * dg * p
        j22 = model.chi * g - model.delta
    elif isinstance(model, MayParams):
        s, q, eps = model.s, model.q, model.epsilon
        j21 = s * q * p * p / (n + eps) ** 2
        j22 = s - 2.0 * s * q * p / (n + eps)
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return np.array([[j11, j12], [j21, j22]])


# ----------------------------------------------------------------------
# Cubic solver
# ----------------------------------------------------------------------

def _eval_cubic(b, c, d, x):
    return ((x + b) * x + c) * x + d


def solve_cubic(b: float, c: float, d: float) -> list[float]:
    """Real roots of ``x^3 + b x^2 + c x + d``, ascending.

    Finds one root with a bracketed, safeguarded Newton iteration,
    deflates, and solves the remaining quadratic in closed form; every
    root gets a final Newton polish against the original cubic.  A
    double root is returned once.
    """
    for name, v in (("b", b), ("c", c), ("d", d)):
        if not isfinite(v):
            raise ValueError(f"cubic coefficient {name} must be finite, got {v}")

    # Bracket a real root around the inflection point: the leading term
    # guarantees f(-big) < 0 < f(+big).
    scale = max(1.0, fabs(b), sqrt(fabs(c)), fabs(d) ** (1.0 / 3.0))
    x0 = -b / 3.0
    step = scale
    lo = x0 - step
    while _eval_cubic(b, c, d, lo) > 0.0:
        step *= 2.0
        lo = x0 - step
    step = scale
    hi = x0 + step
    while _eval_cubic(b, c, d, hi) < 0.0:
        step *= 2.0
        hi = x0 + step

    x = 0.5 * (lo + hi)
    for _ in range(200):
        f = _eval_cubic(b, c, d, x)
        if f > 0.0:
            hi = x
        elif f < 0.0:
            lo = x
        else:
            break
        df = (3.0 * x + 2.0 * b) * x + c
        x_new = x - f / df if df != 0.0 else 0.5 * (lo + hi)
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if fabs(x_new - x) < 1e-16 * max(1.0, fabs(x)):
            x = x_new
            break
        x = x_new
    root1 = x

    # Deflate: x^3 + bx^2 + cx + d = (x - root1)(x^2 + beta x + gamma).
    beta = b + root1
    gamma = c + root1 * beta
    roots = [root1]
    disc = beta * beta - 4.0 * gamma
    if disc >= 0.0:
        sq = sqrt(disc)
        if beta == 0.0 and sq == 0.0:
            roots.extend([0.0, 0.0])
        else:
            u = -0.5 * (beta + copysign(sq, beta))
            r1 = u
            r2 = gamma / u if u != 0.0 else -beta - u
            roots.extend([r1, r2])

    # Polish on the original cubic and deduplicate.
    polished = []
    for rt in roots:
        for _ in range(3):
            f = _eval_cubic(b, c, d, rt)
            df = (3.0 * rt + 2.0 * b) * rt + c
            if df == 0.0 or not isfinite(f):
                break
            rt -= f / df
        polished.append(rt)
    polished.sort()
    out: list[float] = []
    for rt in polished:
        if out and fabs(rt - out[-1]) <= 1e-9 * max(1.0, fabs(rt)):
            continue
        out.append(rt)
    return out


# ----------------------------------------------------------------------
# Equilibria
# ----------------------------------------------------------------------

class StabilityClass(Enum):
    STABLE = "stable"          # node or focus, both Re < 0
    SADDLE = "saddle"
    UNSTABLE = "unstable"      # node or focus, both Re > 0
    NONHYPERBOLIC = "nonhyperbolic"


@dataclass(frozen=True)
class Equilibrium:
    """A fixed point with its local linearisation summary."""

    label: str
    state: tuple[float, float]
    eigenvalues: tuple[complex, complex]
    stability: StabilityClass
    ecological: bool  # lies in the closed positive quadrant

    @property
    def n(self) -> float:
        return self.state[0]

    @property
    def p(self) -> float:
        return self.state[1]


@dataclass(frozen=True)
class EquilibriumSet:
    """All equilibria of a frozen model, indexable by label."""

    model: object
    points: tuple[Equilibrium, ...]

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.points)

    def get(self, label: str) -> Equilibrium | None:
        for e in self.points:
            if e.label == label:
                return e
        return None

    def __getitem__(self, label: str) -> Equilibrium:
        e = self.get(label)
        if e is None:
            raise KeyError(
                f"no equilibrium {label!r}; present: {self.labels()}")
        return e


def _eigenvalues(jac: np.ndarray) -> tuple[complex, complex]:
    tr = jac[0, 0] + jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    disc = tr * tr - 4.0 * det
    if disc >= 0.0:
        sq = sqrt(disc)
        return complex(0.5 * (tr - sq)), complex(0.5 * (tr + sq))
    sq = sqrt(-disc)
    return complex(0.5 * tr, -0.5 * sq), complex(0.5 * tr, 0.5 * sq)


def _classify(eigs: tuple[complex, complex]) -> StabilityClass:
    re1, re2 = eigs[0].real, eigs[1].real
    if min(fabs(re1), fabs(re2)) < _NONHYPERBOLIC_TOL:
        return StabilityClass.NONHYPERBOLIC
    if re1 * re2 < 0:
        return StabilityClass.SADDLE
    if re1 < 0:
        return StabilityClass.STABLE
    return StabilityClass.UNSTABLE


def _make_eq(model, label, n, p) -> Equilibrium:
    eigs = _eigenvalues(jacobian(model, (n, p)))
    return Equilibrium(
        label=label,
        state=(n, p),
        eigenvalues=eigs,
        stability=_classify(eigs),
        ecological=(n >= 0.0 and p >= 0.0),
    )


def equilibria(model) -> EquilibriumSet:
    """Complete equilibrium catalog of the frozen model.

    RMA: extinction ``e0 = (0, 0)``, prey-only ``e1 = (r/c, 0)``, Allee
    ``e2 = (mu, 0)`` and, when ``chi alpha > delta``, the coexistence
    state ``e3`` at ``N3 = delta beta / (chi alpha - delta)`` (flagged
    non-ecological while ``P3 < 0``, i.e. for ``r < c N3``).

    May: ``e0 = (0, eps/q)``, ``e1``, ``e2`` as above, plus up to two
    coexistence states ``e3`` (larger N) and ``e4`` (smaller N, the
    saddle anchoring the basin boundary) from the companion cubic; a
    merged fold point is reported once.
    """
    pts: list[Equilibrium] = []
    if isinstance(model, RmaParams):
        pts.append(_make_eq(model, "e0", 0.0, 0.0))
        if model.r > 0:
            pts.append(_make_eq(model, "e1", model.r / model.c, 0.0))
        pts.append(_make_eq(model, "e2", model.mu, 0.0))
        denom = model.chi * model.alpha - model.delta
        if denom > 0:
            n3 = model.delta * model.beta / denom
            p3 = ((model.r - model.c * n3) / model.alpha) \
                * (model.beta + n3) * (n3 - model.mu) / (model.nu + n3)
            pts.append(_make_eq(model, "e3", n3, p3))
        # chi*alpha <= delta: predator cannot sustain itself at any prey
        # level; no coexistence state exists.
    elif isinstance(model, MayParams):
        pts.append(_make_eq(model, "e0", 0.0, model.epsilon / model.q))
        if model.r > 0:
            pts.append(_make_eq(model, "e1", model.r / model.c, 0.0))
        pts.append(_make_eq(model, "e2", model.mu, 0.0))
        r, c, alpha, beta = model.r, model.c, model.alpha, model.beta
        q, mu, nu, eps = model.q, model.mu, model.nu, model.epsilon
        b_coef = -(mu - beta + r / c - alpha / (c * q))
        c_coef = -(beta * mu + r * (beta - mu) / c
                   - alpha * (nu + eps) / (c * q))
        d_coef = r * beta * mu / c + alpha * nu * eps / (c * q)
        pos = [x for x in solve_cubic(b_coef, c_coef, d_coef) if x > 0]
        if len(pos) >= 2:
            # Larger root is the coexistence focus/node, smaller the saddle.
            pts.append(_make_eq(model, "e3", pos[-1], (pos[-1] + eps) / q))
            pts.append(_make_eq(model, "e4", pos[-2], (pos[-2] + eps) / q))
        elif len(pos) == 1:
            pts.append(_make_eq(model, "e3", pos[0], (pos[0] + eps) / q))
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return EquilibriumSet(model=model, points=tuple(pts))


def coexistence_point(model) -> tuple[float, float]:
    """State of the interior coexistence equilibrium e3.

    Raises CoexistenceUndefined when the model has no e3 (RMA with
    ``chi alpha <= delta``) or when it lies outside the open positive
    quadrant at these parameters.
    """
    e3 = equilibria(model).get("e3")
    if e3 is None:
        raise CoexistenceUndefined(
            "no coexistence equilibrium exists at these parameters")
    if not (e3.n > 0 and e3.p > 0):
        raise CoexistenceUndefined(
            f"coexistence state {e3.state} lies outside the open "
            "positive quadrant")
    return e3.state


def classify_stability(model, point) -> tuple[StabilityClass,
                                              tuple[complex, complex]]:
    """Stability class and eigenvalues at an equilibrium ``point``.

    The point must actually be an equilibrium: the field residual in
    the scaled metric must not exceed 1e-8.
    """
    f = vector_field(model, point)
    res = scaled_norm(f[0], f[1])
    if res > 1e-8:
        raise ValueError(
            f"point {tuple(point)} is not an equilibrium "
            f"(scaled residual {res:.3g} > 1e-8)")
    eigs = _eigenvalues(jacobian(model, point))
    return _classify(eigs), eigs
