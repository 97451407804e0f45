"""Reference adaptive Dormand-Prince 5(4) stepper for planar fields.

This module is the semantic ground truth for the integrator backends:
the compiled kernels in ``_fast.pyx`` implement exactly the algorithm
written here (same tableau, same error norm, same step controller, same
termination rules), just specialised to the two built-in vector fields.
Everything operates on plain Python floats in (N, P) coordinates; the
predator axis is weighted by ``PSCALE`` wherever a distance is taken.

Conventions shared by all backends
----------------------------------
* Scaled norm: ``hypot(dN, PSCALE * dP)``.
* Steps are taken in increasing pseudo-time; backward trajectories are
  produced by negating the field in the caller.
* After an accepted step, a component in ``(-CLAMP_FLOOR, 0)`` is set
  to exactly 0; a component at or below ``-CLAMP_FLOOR`` aborts with
  ``STATUS_NEGATIVE``.
* Ball/box/section monitors look at accepted states only, except the
  section crossing which is localised on the dense interpolant.
"""

from __future__ import annotations

from math import atan2, fabs, hypot, isfinite, sqrt

__all__ = [
    "PSCALE",
    "CLAMP_FLOOR",
    "STATUS_OK",
    "STATUS_BALL",
    "STATUS_BOX_EXIT",
    "STATUS_UNDERFLOW",
    "STATUS_BLOWUP",
    "STATUS_NEGATIVE",
    "CLS_EQUILIBRIUM",
    "CLS_CYCLE",
    "CLS_UNDECIDED",
    "CLS_FAILED",
    "integrate_path",
    "integrate_endpoint",
    "classify_attractor",
    "dense_eval",
]

# Predator weight in the scaled metric (prey and predator levels differ
# by roughly three orders of magnitude in the models studied here).
PSCALE = 1.0e3

# Negativity clamp floor: accepted components in (-CLAMP_FLOOR, 0) are
# rounded to zero, anything at or below -CLAMP_FLOOR is an error.
CLAMP_FLOOR = 1.0e-12

# Termination statuses.
STATUS_OK = 0
STATUS_BALL = 1
STATUS_BOX_EXIT = 2
STATUS_UNDERFLOW = 3
STATUS_BLOWUP = 4
STATUS_NEGATIVE = 5

# Attractor classification codes.
CLS_EQUILIBRIUM = 0
CLS_CYCLE = 1
CLS_UNDECIDED = 2
CLS_FAILED = 3

# ----------------------------------------------------------------------
# Dormand-Prince 5(4) tableau
# ----------------------------------------------------------------------

C2 = 1.0 / 5.0
C3 = 3.0 / 10.0
C4 = 4.0 / 5.0
C5 = 8.0 / 9.0

A21 = 1.0 / 5.0
A31 = 3.0 / 40.0
A32 = 9.0 / 40.0
A41 = 44.0 / 45.0
A42 = -56.0 / 15.0
A43 = 32.0 / 9.0
A51 = 19372.0 / 6561.0
A52 = -25360.0 / 2187.0
A53 = 64448.0 / 6561.0
A54 = -212.0 / 729.0
A61 = 9017.0 / 3168.0
A62 = -355.0 / 33.0
A63 = 46732.0 / 5247.0
A64 = 49.0 / 176.0
A65 = -5103.0 / 18656.0

B1 = 35.0 / 384.0
B3 = 500.0 / 1113.0
B4 = 125.0 / 192.0
B5 = -2187.0 / 6784.0
B6 = 11.0 / 84.0

# Error weights (5th order minus embedded 4th order); E2 = 0.
E1 = 71.0 / 57600.0
E3 = -71.0 / 16695.0
E4 = 71.0 / 1920.0
E5 = -17253.0 / 339200.0
E6 = 22.0 / 525.0
E7 = -1.0 / 40.0

# Dense-output polynomial coefficients (quartic interpolant in theta);
# row i gives the theta..theta^4 weights of stage i.
DENSE = (
    (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0),
    (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0),
    (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0),
    (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0),
    (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0),
)

_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_SAFETY = 0.9


def _initial_step(rhs, n, p, fn, fp, span, rtol, atol_n, atol_p, max_step):
    """Hairer-style starting step size estimate."""
    sc_n = atol_n + rtol * fabs(n)
    sc_p = atol_p + rtol * fabs(p)
    d0 = sqrt(0.5 * ((n / sc_n) ** 2 + (p / sc_p) ** 2))
    d1 = sqrt(0.5 * ((fn / sc_n) ** 2 + (fp / sc_p) ** 2))
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    n1 = n + h0 * fn
    p1 = p + h0 * fp
    gn, gp = rhs(n1, p1)
    if not (isfinite(gn) and isfinite(gp)):
        return min(h0 * 1e-3, max_step)
    d2 = sqrt(0.5 * (((gn - fn) / sc_n) ** 2 + ((gp - fp) / sc_p) ** 2)) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, span, max_step)


def dense_eval(h, y0n, y0p, k, theta):
    """Evaluate the quartic dense-output interpolant at ``theta`` in [0, 1].

    ``k`` is the 7x2 stage-derivative sequence of one accepted step of
    size ``h`` starting from state ``(y0n, y0p)``.
    """
    t2 = theta * theta
    t3 = t2 * theta
    t4 = t3 * theta
    accn = 0.0
    accp = 0.0
    for i in range(7):
        row = DENSE[i]
        w = row[0] * theta + row[1] * t2 + row[2] * t3 + row[3] * t4
        accn += w * k[i][0]
        accp += w * k[i][1]
    return y0n + h * accn, y0p + h * accp


def _step_core(rhs, t, n, p, h, k1n, k1p):
    """One raw DOPRI5 step: returns stages, candidate state, error pair."""
    n2 = n + h * (A21 * k1n)
    p2 = p + h * (A21 * k1p)
    k2n, k2p = rhs(n2, p2)

    n3 = n + h * (A31 * k1n + A32 * k2n)
    p3 = p + h * (A31 * k1p + A32 * k2p)
    k3n, k3p = rhs(n3, p3)

    n4 = n + h * (A41 * k1n + A42 * k2n + A43 * k3n)
    p4 = p + h * (A41 * k1p + A42 * k2p + A43 * k3p)
    k4n, k4p = rhs(n4, p4)

    n5 = n + h * (A51 * k1n + A52 * k2n + A53 * k3n + A54 * k4n)
    p5 = p + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p)
    k5n, k5p = rhs(n5, p5)

    n6 = n + h * (A61 * k1n + A62 * k2n + A63 * k3n + A64 * k4n + A65 * k5n)
    p6 = p + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p)
    k6n, k6p = rhs(n6, p6)

    yn = n + h * (B1 * k1n + B3 * k3n + B4 * k4n + B5 * k5n + B6 * k6n)
    yp = p + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
    k7n, k7p = rhs(yn, yp)

    errn = h * (E1 * k1n + E3 * k3n + E4 * k4n + E5 * k5n + E6 * k6n + E7 * k7n)
    errp = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)

    stages = (
        (k1n, k1p), (k2n, k2p), (k3n, k3p), (k4n, k4p),
        (k5n, k5p), (k6n, k6p), (k7n, k7p),
    )
    return stages, yn, yp, errn, errp


class _Stepper:
    """Shared accept/reject loop driving ``_step_core``.

    Produces one accepted step per ``advance`` call and exposes the
    stage table for dense output.  ``status`` is None while healthy.
    """

    __slots__ = ("rhs", "t", "n", "p", "h", "t_end", "rtol", "atol_n",
                 "atol_p", "max_step", "k1n", "k1p", "stages", "h_last",
                 "status")

    def __init__(self, rhs, n0, p0, t0, t_end, rtol, atol_n, atol_p,
                 max_step, first_step=0.0):
        self.rhs = rhs
        self.t = t0
        self.n = n0
        self.p = p0
        self.t_end = t_end
        self.rtol = rtol
        self.atol_n = atol_n
        self.atol_p = atol_p
        self.max_step = max_step
        self.status = None
        fn, fp = rhs(n0, p0)
        if not (isfinite(fn) and isfinite(fp)):
            self.status = STATUS_BLOWUP
            self.k1n = self.k1p = 0.0
            self.h = 0.0
        else:
            self.k1n = fn
            self.k1p = fp
            if first_step > 0.0:
                self.h = min(first_step, max_step, t_end - t0)
            else:
                self.h = _initial_step(rhs, n0, p0, fn, fp, t_end - t0,
                                       rtol, atol_n, atol_p, max_step)
        self.stages = None
        self.h_last = 0.0

    def advance(self):
        """Take one accepted step; returns False when finished/failed."""
        t = self.t
        if self.status is not None or t >= self.t_end:
            return False
        rhs = self.rhs
        rtol = self.rtol
        atol_n = self.atol_n
        atol_p = self.atol_p
        h = self.h
        n = self.n
        p = self.p
        while True:
            if h < 1e-14 * max(1.0, fabs(t)):
                self.status = STATUS_UNDERFLOW
                return False
            clamped = False
            if t + h >= self.t_end:
                h = self.t_end - t
                clamped = True
            stages, yn, yp, errn, errp = _step_core(
                rhs, t, n, p, h, self.k1n, self.k1p)
            sc_n = atol_n + rtol * max(fabs(n), fabs(yn))
            sc_p = atol_p + rtol * max(fabs(p), fabs(yp))
            err = sqrt(0.5 * ((errn / sc_n) ** 2 + (errp / sc_p) ** 2))
            if not isfinite(err):
                h *= 0.1
                continue
            if err <= 1.0:
                break
            fac = _SAFETY * err ** -0.2
            if fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
            h *= fac
        # Accepted.
        self.h_last = h
        self.stages = stages
        t_new = self.t_end if clamped else t + h
        k7n, k7p = stages[6]
        # Negativity clamp (accepted states only).
        if yn < 0.0 or yp < 0.0:
            if yn <= -CLAMP_FLOOR or yp <= -CLAMP_FLOOR:
                self.t = t_new
                self.n = yn
                self.p = yp
                self.status = STATUS_NEGATIVE
                return False
            if yn < 0.0:
                yn = 0.0
            if yp < 0.0:
                yp = 0.0
            k7n, k7p = rhs(yn, yp)
        if not (isfinite(yn) and isfinite(yp)):
            self.status = STATUS_BLOWUP
            return False
        if err == 0.0:
            fac = _MAX_FACTOR
        else:
            fac = _SAFETY * err ** -0.2
            if fac > _MAX_FACTOR:
                fac = _MAX_FACTOR
            elif fac < _MIN_FACTOR:
                fac = _MIN_FACTOR
        self.h = min(h * fac, self.max_step)
        self.t = t_new
        self.n = yn
        self.p = yp
        self.k1n = k7n
        self.k1p = k7p
        return True


def integrate_path(rhs, n0, p0, t0, t1, rtol, atol_n, atol_p, max_step,
                   first_step=0.0, box=None):
    """Integrate recording every accepted step.

    Returns ``(status, ts, ys, ks)`` where ``ts`` is a list of m+1
    times, ``ys`` a list of m+1 ``(n, p)`` pairs and ``ks`` a list of m
    7-stage tables for dense output.  ``box=(n_lo, n_hi, p_lo, p_hi)``
    stops the integration on the first accepted state outside the box
    (that state is kept as the final sample).
    """
    st = _Stepper(rhs, n0, p0, t0, t1, rtol, atol_n, atol_p, max_step,
                  first_step)
    ts = [t0]
    ys = [(n0, p0)]
    ks = []
    status = STATUS_OK
    while st.advance():
        ts.append(st.t)
        ys.append((st.n, st.p))
        ks.append(st.stages)
        if box is not None:
            n_lo, n_hi, p_lo, p_hi = box
            if not (n_lo <= st.n <= n_hi and p_lo <= st.p <= p_hi):
                return STATUS_BOX_EXIT, ts, ys, ks
    if st.status is not None:
        status = st.status
    return status, ts, ys, ks


def integrate_endpoint(rhs, n0, p0, t0, t1, rtol, atol_n, atol_p, max_step,
                       ball=None):
    """Integrate keeping only the endpoint.

    ``ball=(cn, cp, radius, dwell)`` monitors the scaled distance to a
    fixed point on accepted states; once the trajectory has stayed
    inside the ball for at least ``dwell`` time units the integration
    stops with ``STATUS_BALL``.  Returns ``(status, t, n, p, t_enter)``
    with ``t_enter`` the entry time of the completed dwell (NaN when no
    dwell completed).
    """
    st = _Stepper(rhs, n0, p0, t0, t1, rtol, atol_n, atol_p, max_step)
    t_enter = float("nan")
    inside_since = None
    if ball is not None:
        cn, cp, radius, dwell = ball
        d = hypot(n0 - cn, PSCALE * (p0 - cp))
        if d <= radius:
            inside_since = t0
    while st.advance():
        if ball is not None:
            d = hypot(st.n - cn, PSCALE * (st.p - cp))
            if d <= radius:
                if inside_since is None:
                    inside_since = st.t
                elif st.t - inside_since >= dwell:
                    return STATUS_BALL, st.t, st.n, st.p, inside_since
            else:
                inside_since = None
    status = st.status if st.status is not None else STATUS_OK
    return status, st.t, st.n, st.p, t_enter


def _refine_crossing(h, y0n, y0p, stages, n_star, lo, hi):
    """Bisect the dense interpolant for the theta where N = n_star."""
    fn_lo = dense_eval(h, y0n, y0p, stages, lo)[0] - n_star
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = dense_eval(h, y0n, y0p, stages, mid)[0] - n_star
        if (fm > 0.0) == (fn_lo > 0.0):
            lo = mid
            fn_lo = fm
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    theta = 0.5 * (lo + hi)
    xn, xp = dense_eval(h, y0n, y0p, stages, theta)
    return theta, xn, xp


def classify_attractor(rhs, n0, p0, t0, max_time, rtol, atol_n, atol_p,
                       max_step, eq_points, eq_radius, dwell,
                       n_star, cycle_tol, min_amp):
    """Run until the trajectory settles on a catalog equilibrium or a cycle.

    ``eq_points`` is a sequence of (n, p) catalog points monitored with
    a scaled ball of radius ``eq_radius`` and dwell time ``dwell``.
    Cycle detection uses the section ``N = n_star`` crossed with
    ``dN/dt > 0``: two successive crossings closer than ``cycle_tol``
    (scaled), both farther than ``min_amp`` from every catalog point,
    report a cycle whose period is the crossing-time difference.

    Returns ``(code, eq_index, t, n, p, period, cross_n, cross_p)``.
    """
    st = _Stepper(rhs, n0, p0, t0, t0 + max_time, rtol, atol_n, atol_p,
                  max_step)
    m = len(eq_points)
    entered = [float("nan")] * m
    for i in range(m):
        cn, cp = eq_points[i]
        if hypot(n0 - cn, PSCALE * (p0 - cp)) <= eq_radius:
            entered[i] = t0
    prev_t = t0
    prev_n = n0
    prev_p = p0
    last_cross_t = float("nan")
    last_cross_n = 0.0
    last_cross_p = 0.0
    have_cross = False
    while st.advance():
        # Equilibrium dwell monitors.
        for i in range(m):
            cn, cp = eq_points[i]
            d = hypot(st.n - cn, PSCALE * (st.p - cp))
            if d <= eq_radius:
                if entered[i] != entered[i]:  # NaN -> first entry
                    entered[i] = st.t
                elif st.t - entered[i] >= dwell:
                    return (CLS_EQUILIBRIUM, i, st.t, st.n, st.p,
                            0.0, 0.0, 0.0)
            else:
                entered[i] = float("nan")
        # Section crossing N = n_star, upward.
        if prev_n < n_star <= st.n:
            h = st.h_last
            theta, xn, xp = _refine_crossing(
                h, prev_n, prev_p, st.stages, n_star, 0.0, 1.0)
            t_cross = prev_t + theta * h
            fn, _fp = rhs(xn, xp)
            if fn > 0.0:
                ok_amp = True
                for i in range(m):
                    cn, cp = eq_points[i]
                    if hypot(xn - cn, PSCALE * (xp - cp)) < min_amp:
                        ok_amp = False
                        break
                if ok_amp:
                    if have_cross:
                        d = hypot(xn - last_cross_n,
                                  PSCALE * (xp - last_cross_p))
                        if d < cycle_tol:
                            period = t_cross - last_cross_t
                            return (CLS_CYCLE, -1, st.t, st.n, st.p,
                                    period, xn, xp)
                    last_cross_t = t_cross
                    last_cross_n = xn
                    last_cross_p = xp
                    have_cross = True
        prev_t = st.t
        prev_n = st.n
        prev_p = st.p
    if st.status is not None and st.status != STATUS_OK:
        return (CLS_FAILED, st.status, st.t, st.n, st.p, 0.0, 0.0, 0.0)
    return (CLS_UNDECIDED, -1, st.t, st.n, st.p, 0.0, 0.0, 0.0)
