"""Dormand-Prince 5(4) integration of the Rössler field with dense output.

The stepping loop is a numba kernel specialised to the Rössler right-hand
side; the Python layer drives it in chunks, collects samples and section
events, and wraps results in :class:`Trajectory`.

Section events are sign changes of ``g = x + a*y`` (the plane {y' = 0}),
localised by Brent's method on the dense-output interpolant.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .exceptions import BlowUp, StepUnderflow
from .flow import Params, fixed_points
from .geometry import SectionPoint

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "CrossingEvent",
    "Termination",
    "integrate",
    "next_section_crossing",
    "section_crossings",
    "write_trajectory_csv",
]

BLOWUP_NORM = 1e8
MIN_STEP = 1e-14
NEAR_BOUNDARY = 1e-9
FIXED_POINT_BALL = 1e-6

# kernel status codes
_DONE, _EVENTS, _BLOWUP, _FIXED, _UNDERFLOW, _CHUNK = 0, 1, 2, 3, 4, 5

# Dormand & Prince (1980) tableau with Hairer's dense-output weights
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_A71, _A73, _A74, _A75, _A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)
_D1, _D3, _D4, _D5, _D6, _D7 = (
    -12715105075 / 11282082432,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.1
    max_time: float = 1000.0
    event_tol: float = 1e-12

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "max_time", "event_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        if self.rel_tol < 1e-14:
            raise ValueError("rel_tol below 1e-14 is not attainable in double precision")

    def to_dict(self) -> dict:
        return {
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "max_step": self.max_step,
            "max_time": self.max_time,
            "event_tol": self.event_tol,
        }


# --------------------------------------------------------------------------
# numba kernel


@numba.njit(cache=True)
def _rhs(a, b, c, y, out):
    out[0] = -y[1] - y[2]
    out[1] = y[0] + a * y[1]
    out[2] = b * y[0] + y[2] * (y[0] - c)


@numba.njit(cache=True)
def _interp(rc, theta, out):
    th1 = 1.0 - theta
    for i in range(3):
        out[i] = rc[0, i] + theta * (
            rc[1, i] + th1 * (rc[2, i] + theta * (rc[3, i] + th1 * rc[4, i]))
        )


@numba.njit(cache=True)
def _g_at(rc, theta, a, tmp):
    _interp(rc, theta, tmp)
    return tmp[0] + a * tmp[1]


@numba.njit(cache=True)
def _dg_at(rc, theta, a):
    # d/dtheta of x + a*y along the interpolant
    th1 = 1.0 - theta
    out = 0.0
    for i in range(2):
        pp = rc[2, i] + theta * (rc[3, i] + th1 * rc[4, i])
        dp = rc[3, i] + (1.0 - 2.0 * theta) * rc[4, i]
        qq = rc[1, i] + th1 * pp
        dq = -pp + th1 * dp
        d = qq + theta * dq
        out += d if i == 0 else a * d
    return out


@numba.njit(cache=True)
def _eval(rc, theta, a, tmp, mode):
    if mode == 0:
        return _g_at(rc, theta, a, tmp)
    return _dg_at(rc, theta, a)


@numba.njit(cache=True)
def _brent(rc, a, lo, hi, glo, ghi, tol, tmp, mode=0):
    # Brent's zeroin on theta in [lo, hi] with g(lo), g(hi) of opposite sign
    xa, xb = lo, hi
    fa, fb = glo, ghi
    xc, fc = xa, fa
    d = xb - xa
    e = d
    for _ in range(200):
        if (fb > 0.0 and fc > 0.0) or (fb < 0.0 and fc < 0.0):
            xc, fc = xa, fa
            d = xb - xa
            e = d
        if abs(fc) < abs(fb):
            xa, xb, xc = xb, xc, xb
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * 2.2e-16 * abs(xb) + 0.5 * tol
        xm = 0.5 * (xc - xb)
        if abs(xm) <= tol1 or fb == 0.0:
            return xb
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if xa == xc:
                pp = 2.0 * xm * s
                qq = 1.0 - s
            else:
                qa = fa / fc
                r = fb / fc
                pp = s * (2.0 * xm * qa * (qa - r) - (xb - xa) * (r - 1.0))
                qq = (qa - 1.0) * (r - 1.0) * (s - 1.0)
            if pp > 0.0:
                qq = -qq
            pp = abs(pp)
            if 2.0 * pp < min(3.0 * xm * qq - abs(tol1 * qq), abs(e * qq)):
                e = d
                d = pp / qq
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        xa, fa = xb, fb
        if abs(d) > tol1:
            xb += d
        else:
            xb += tol1 if xm > 0 else -tol1
        fb = _eval(rc, xb, a, tmp, mode)
    return xb


@numba.njit(cache=True, nogil=True)
def _kernel(
    a, b, c, y, t, t_end, h, k1, rtol, atol, max_step, fixed_h,
    upper_needed, event_tol, skip_until, pin, pout, fp_ball, check_fp,
    max_steps, rec_t, rec_y, rec_rc, ev_t, ev_y, ev_rate,
):
    """Advance until ``t_end``, a fault, ``max_steps``, or until
    ``upper_needed`` upper-half-plane crossings have been seen (0 = never).

    Returns (status, t, h, n_steps, n_events, upper_left, which_fp). ``y`` and
    ``k1`` are updated in place. Samples go to rec_*, all plane crossings to
    ev_* (up to capacity).
    """
    direction = 1.0 if t_end >= t else -1.0
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    k5 = np.empty(3)
    k6 = np.empty(3)
    k7 = np.empty(3)
    yt = np.empty(3)
    y1 = np.empty(3)
    rc = np.empty((5, 3))
    tmp = np.empty(3)
    n_ev = 0
    upper_left = upper_needed
    n_steps = 0
    fac_old = 1e-4
    ev_cap = ev_t.shape[0]
    rec_cap = rec_t.shape[0]
    g_now = y[0] + a * y[1]
    while n_steps < max_steps:
        remaining = t_end - t
        if remaining * direction <= 0.0:
            return _DONE, t, h, n_steps, n_ev, upper_left, 0
        if fixed_h > 0.0:
            h = fixed_h * direction
        h_abs = min(abs(h), max_step)
        last = False
        if h_abs >= abs(remaining) * (1.0 - 1e-12):
            h_abs = abs(remaining)
            last = True
        if h_abs < MIN_STEP and not last:
            return _UNDERFLOW, t, h, n_steps, n_ev, upper_left, 0
        hh = h_abs * direction

        for i in range(3):
            yt[i] = y[i] + hh * _A21 * k1[i]
        _rhs(a, b, c, yt, k2)
        for i in range(3):
            yt[i] = y[i] + hh * (_A31 * k1[i] + _A32 * k2[i])
        _rhs(a, b, c, yt, k3)
        for i in range(3):
            yt[i] = y[i] + hh * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i])
        _rhs(a, b, c, yt, k4)
        for i in range(3):
            yt[i] = y[i] + hh * (
                _A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]
            )
        _rhs(a, b, c, yt, k5)
        for i in range(3):
            yt[i] = y[i] + hh * (
                _A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i]
            )
        _rhs(a, b, c, yt, k6)
        for i in range(3):
            y1[i] = y[i] + hh * (
                _A71 * k1[i] + _A73 * k3[i] + _A74 * k4[i] + _A75 * k5[i] + _A76 * k6[i]
            )
        _rhs(a, b, c, y1, k7)

        if fixed_h > 0.0:
            err = 0.0
        else:
            err = 0.0
            for i in range(3):
                sk = atol + rtol * max(abs(y[i]), abs(y1[i]))
                ei = hh * (
                    _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i]
                    + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
                ) / sk
                err += ei * ei
            err = math.sqrt(err / 3.0)

        if not (err <= 1.0):
            # rejected step (also catches NaN)
            if err != err:
                fac = 0.1
            else:
                fac = max(0.1, 0.9 * err ** -0.2)
            h = h_abs * fac * direction
            if abs(h) < MIN_STEP:
                return _UNDERFLOW, t, h, n_steps, n_ev, upper_left, 0
            continue

        # accepted: dense-output coefficients
        for i in range(3):
            ydiff = y1[i] - y[i]
            bspl = hh * k1[i] - ydiff
            rc[0, i] = y[i]
            rc[1, i] = ydiff
            rc[2, i] = bspl
            rc[3, i] = ydiff - hh * k7[i] - bspl
            rc[4, i] = hh * (
                _D1 * k1[i] + _D3 * k3[i] + _D4 * k4[i]
                + _D5 * k5[i] + _D6 * k6[i] + _D7 * k7[i]
            )
        t_new = t + hh
        g_new = y1[0] + a * y1[1]

        if rec_cap > 0:
            rec_t[n_steps] = t_new
            for i in range(3):
                rec_y[n_steps, i] = y1[i]
                for j in range(5):
                    rec_rc[n_steps, j, i] = rc[j, i]

        # section events: scan the step in four sub-intervals; besides sign
        # changes, look for an interior extremum of g that dips through zero
        # (a near-tangent double crossing inside one sub-interval)
        hit_target = False
        g_prev = g_now
        d_prev = _dg_at(rc, 0.0, a)
        th_prev = 0.0
        tol_th = event_tol / h_abs
        for q in range(1, 5):
            th = q / 4.0
            gq = g_new if q == 4 else _g_at(rc, th, a, tmp)
            dq = _dg_at(rc, th, a)
            n_roots = 0
            r0 = 0.0
            r1 = 0.0
            if (g_prev < 0.0 and gq >= 0.0) or (g_prev > 0.0 and gq <= 0.0):
                n_roots = 1
                r0 = th if gq == 0.0 else _brent(rc, a, th_prev, th, g_prev, gq, tol_th, tmp)
            elif g_prev * gq > 0.0 and d_prev * dq < 0.0 and (d_prev < 0.0) == (g_prev > 0.0):
                th_m = _brent(rc, a, th_prev, th, d_prev, dq, tol_th, tmp, 1)
                gm = _g_at(rc, th_m, a, tmp)
                if gm * g_prev < 0.0:
                    n_roots = 2
                    r0 = _brent(rc, a, th_prev, th_m, g_prev, gm, tol_th, tmp)
                    r1 = _brent(rc, a, th_m, th, gm, gq, tol_th, tmp)
            for j in range(n_roots):
                th_ev = r0 if j == 0 else r1
                t_ev = t + th_ev * hh
                if (t_ev - skip_until) * direction <= 1e-10:
                    continue
                _interp(rc, th_ev, tmp)
                if n_ev < ev_cap:
                    ev_t[n_ev] = t_ev
                    for i in range(3):
                        ev_y[n_ev, i] = tmp[i]
                    # rate of g along the flow, independent of time direction
                    ev_rate[n_ev] = (-tmp[1] - tmp[2]) + a * (tmp[0] + a * tmp[1])
                n_ev += 1
                # only upper-half-plane hits count toward the target
                if upper_left > 0 and tmp[2] - tmp[0] / a > -NEAR_BOUNDARY:
                    upper_left -= 1
                    if upper_left == 0:
                        hit_target = True
                        break
            if hit_target:
                break
            g_prev = gq
            d_prev = dq
            th_prev = th

        t = t_new
        for i in range(3):
            y[i] = y1[i]
            k1[i] = k7[i]
        g_now = g_new
        n_steps += 1

        if hit_target:
            return _EVENTS, t, h, n_steps, n_ev, upper_left, 0

        nrm = math.sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2])
        if not (nrm <= BLOWUP_NORM):
            return _BLOWUP, t, h, n_steps, n_ev, upper_left, 0

        if check_fp:
            for which in range(2):
                ctr = pin if which == 0 else pout
                d0 = y[0] - ctr[0]
                d1 = y[1] - ctr[1]
                d2 = y[2] - ctr[2]
                dist = math.sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                if dist < fp_ball:
                    # contracting: the flow (in the integration direction)
                    # does not carry the state away from the equilibrium
                    radial = (d0 * k1[0] + d1 * k1[1] + d2 * k1[2]) * direction
                    if radial <= 0.0:
                        return _FIXED, t, h, n_steps, n_ev, upper_left, which + 1

        if fixed_h <= 0.0:
            # PI step-size control (Hairer's DOPRI5 defaults)
            fac11 = max(err, 1e-10) ** 0.17
            fac = fac11 / fac_old ** 0.04 / 0.9
            fac = max(1.0 / 10.0, min(5.0, fac))
            fac = 1.0 / fac
            fac = max(0.2, min(10.0, fac))
            fac_old = max(err, 1e-4)
            h = h_abs * fac * direction
    return _CHUNK, t, h, n_steps, n_ev, upper_left, 0


# --------------------------------------------------------------------------
# Python layer


@dataclass
class Trajectory:
    """Event-annotated integration record with dense output.

    ``t`` is monotone in the integration direction (decreasing for backward
    runs); ``y`` has shape ``(n, 3)``; step ``i`` spans ``t[i] .. t[i+1]``
    with interpolation coefficients ``rcont[i]``.
    """

    t: np.ndarray
    y: np.ndarray
    rcont: np.ndarray
    events: list = field(default_factory=list)
    status: str = "done"
    params: Params | None = None
    fixed_point: str | None = None

    @property
    def direction(self) -> float:
        if len(self.t) < 2:
            return 1.0
        return 1.0 if self.t[-1] >= self.t[0] else -1.0

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1].copy()

    def sol(self, t) -> np.ndarray:
        """Dense output at time(s) ``t`` inside the covered range."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.atleast_1d(t)
        if len(self.t) == 1:
            out = np.repeat(self.y[:1], len(tt), axis=0)
            return out[0] if scalar else out
        d = self.direction
        ts = self.t * d
        q = tt * d
        lo, hi = ts[0], ts[-1]
        span = max(1.0, abs(hi - lo))
        if np.any(q < lo - 1e-12 * span) or np.any(q > hi + 1e-12 * span):
            raise ValueError("requested time outside the integrated range")
        idx = np.clip(np.searchsorted(ts, q, side="right") - 1, 0, len(ts) - 2)
        h = self.t[idx + 1] - self.t[idx]
        theta = (tt - self.t[idx]) / h
        th1 = 1.0 - theta
        rc = self.rcont[idx]
        th = theta[:, None]
        th1 = th1[:, None]
        out = rc[:, 0] + th * (rc[:, 1] + th1 * (rc[:, 2] + th * (rc[:, 3] + th1 * rc[:, 4])))
        return out[0] if scalar else out

    def arclength(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.y, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)])


@dataclass(frozen=True)
class CrossingEvent:
    """A crossing of the plane {x + a y = 0}.

    ``ydot_rate`` is d(x + a y)/dt along the flow; on the plane it equals
    ``x/a - z``, so every crossing of the open upper half is "down".
    """

    t: float
    point: SectionPoint
    direction: str
    ydot_rate: float
    state: np.ndarray
    near_tangent: bool
    near_boundary: bool

    @property
    def in_open_section(self) -> bool:
        return self.point.v - self.point.u / self.point.params.a > NEAR_BOUNDARY

    @property
    def usable(self) -> bool:
        """Transverse crossing of the open upper half-plane."""
        return self.in_open_section and not self.near_tangent


@dataclass(frozen=True)
class Termination:
    """Why a search for the next crossing ended without one."""

    kind: str  # "fixed_point_limit" | "blow_up" | "time_limit" | "step_underflow"
    t: float
    state: np.ndarray
    fixed_point: str | None = None


def transversality_floor(state) -> float:
    return 1e-6 * (1.0 + float(np.linalg.norm(state)))


def _make_event(p: Params, t: float, s: np.ndarray, rate: float) -> CrossingEvent:
    gap = s[2] - s[0] / p.a
    return CrossingEvent(
        t=float(t),
        point=SectionPoint(s[0], s[2], p),
        direction="down" if rate < 0 else "up",
        ydot_rate=float(rate),
        state=s.copy(),
        near_tangent=bool(abs(rate) <= transversality_floor(s)),
        near_boundary=bool(abs(gap) < NEAR_BOUNDARY),
    )


def _initial_step(p: Params, y0, k1, direction, rtol, atol, max_step) -> float:
    sc = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / sc) ** 2))
    d1 = np.sqrt(np.mean((k1 / sc) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    return float(min(h0, max_step))


def _run(
    p: Params,
    y0,
    t0: float,
    t1: float,
    cfg: IntegratorConfig,
    *,
    record: bool = True,
    event_target: int = 0,
    fixed_step: float = 0.0,
    stop_at_fixed_points: bool = True,
    chunk: int = 4096,
):
    a, b, c = p.a, p.b, p.c
    y = np.array(y0, dtype=float)
    if y.shape != (3,) or not np.all(np.isfinite(y)):
        raise ValueError("initial state must be three finite numbers")
    k1 = np.empty(3)
    _rhs(a, b, c, y, k1)
    direction = 1.0 if t1 >= t0 else -1.0
    h = _initial_step(p, y, k1, direction, cfg.rel_tol, cfg.abs_tol, cfg.max_step) * direction
    if stop_at_fixed_points:
        try:
            fp = fixed_points(p)
            pin, pout = fp.p_in, fp.p_out
        except Exception:
            pin = pout = np.full(3, np.inf)
    else:
        pin = pout = np.full(3, np.inf)

    ts = [np.array([t0])]
    ys = [y[None, :].copy()]
    rcs = []
    if not record:
        chunk = 1024
    ev_cap = 256
    ev_t = np.empty(ev_cap)
    ev_y = np.empty((ev_cap, 3))
    ev_r = np.empty(ev_cap)
    events: list[tuple[float, np.ndarray, float]] = []
    t = float(t0)
    upper_left = int(event_target)
    cap = chunk if record else 0
    while True:
        rec_t = np.empty(cap)
        rec_y = np.empty((cap, 3))
        rec_rc = np.empty((cap, 5, 3))
        status, t, h, n_steps, n_ev, upper_left, which = _kernel(
            a, b, c, y, t, float(t1), h, k1, cfg.rel_tol, cfg.abs_tol, cfg.max_step,
            float(fixed_step), upper_left, cfg.event_tol / 10.0, float(t0), pin, pout,
            FIXED_POINT_BALL, bool(stop_at_fixed_points), chunk,
            rec_t, rec_y, rec_rc, ev_t, ev_y, ev_r,
        )
        if record and n_steps:
            ts.append(rec_t[:n_steps].copy())
            ys.append(rec_y[:n_steps].copy())
            rcs.append(rec_rc[:n_steps].copy())
        for k in range(min(n_ev, ev_cap)):
            events.append((float(ev_t[k]), ev_y[k].copy(), float(ev_r[k])))
        if status != _CHUNK:
            break
        if upper_left == 0 and event_target > 0:
            status = _EVENTS
            break
    if not record:
        ts.append(np.array([t]))
        ys.append(y[None, :].copy())
    traj = Trajectory(
        t=np.concatenate(ts),
        y=np.concatenate(ys),
        rcont=np.concatenate(rcs) if rcs else np.empty((0, 5, 3)),
        params=p,
    )
    traj.status = {
        _DONE: "done", _EVENTS: "events", _BLOWUP: "blow_up",
        _FIXED: "fixed_point_limit", _UNDERFLOW: "step_underflow",
    }.get(status, "chunk")
    traj.fixed_point = {1: "p_in", 2: "p_out"}.get(which)
    traj.events = [_make_event(p, te, se, r) for te, se, r in events]
    return traj


def integrate(
    p: Params,
    s0,
    cfg: IntegratorConfig | None = None,
    t_span=(0.0, 10.0),
    *,
    fixed_step: float = 0.0,
    stop_at_fixed_points: bool = False,
    raise_on_fault: bool = True,
) -> Trajectory:
    """Integrate from ``s0`` over ``t_span`` (either time direction).

    Parameters
    ----------
    fixed_step : float
        If positive, take steps of exactly this size (no error control).
        Used for convergence-order studies.
    stop_at_fixed_points : bool
        Stop when the state enters the 1e-6 ball of an equilibrium.
    raise_on_fault : bool
        Raise :class:`BlowUp` / :class:`StepUnderflow` instead of returning a
        truncated trajectory with the matching ``status``.
    """
    p = Params.coerce(p)
    cfg = cfg or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise ValueError("t_span must be bounded")
    traj = _run(
        p, s0, t0, t1, cfg, fixed_step=fixed_step, stop_at_fixed_points=stop_at_fixed_points
    )
    if raise_on_fault and traj.status == "blow_up":
        raise BlowUp(f"|state| exceeded {BLOWUP_NORM:g} at t={traj.t_final:.6g}")
    if raise_on_fault and traj.status == "step_underflow":
        raise StepUnderflow(f"step size fell below {MIN_STEP:g} at t={traj.t_final:.6g}")
    return traj


def next_section_crossing(
    p: Params,
    s0,
    cfg: IntegratorConfig | None = None,
    direction_filter: str = "down",
    *,
    backward: bool = False,
) -> CrossingEvent | Termination:
    """First crossing of the upper half-plane after ``t = 0``.

    Returns the :class:`CrossingEvent` (possibly flagged near-tangent), or a
    :class:`Termination` describing a fixed-point limit, blow-up, time limit
    or step underflow.
    """
    p = Params.coerce(p)
    cfg = cfg or IntegratorConfig()
    t1 = -cfg.max_time if backward else cfg.max_time
    traj = _run(p, s0, 0.0, t1, cfg, record=False, event_target=1)
    for ev in traj.events:
        gap = ev.point.v - ev.point.u / p.a
        if gap <= -NEAR_BOUNDARY:
            continue
        if direction_filter and ev.direction != direction_filter and not ev.near_tangent:
            continue
        return ev
    kind = {
        "fixed_point_limit": "fixed_point_limit",
        "blow_up": "blow_up",
        "step_underflow": "step_underflow",
    }.get(traj.status, "time_limit")
    return Termination(kind, traj.t_final, traj.y_final, traj.fixed_point)


def section_crossings(
    p: Params,
    s0,
    n: int,
    cfg: IntegratorConfig | None = None,
    *,
    record: bool = False,
) -> tuple[list[CrossingEvent], Trajectory]:
    """The next ``n`` upper-half-plane crossings (fewer if the run terminates)."""
    p = Params.coerce(p)
    cfg = cfg or IntegratorConfig()
    traj = _run(p, s0, 0.0, cfg.max_time * max(1, n), cfg, record=record, event_target=n)
    upper = [ev for ev in traj.events if ev.point.v - ev.point.u / p.a > -NEAR_BOUNDARY]
    return upper[:n], traj


def write_trajectory_csv(path, traj: Trajectory) -> None:
    """Rows ``kind,t,x,y,z``: ``sample`` rows in time order, then ``event`` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "t", "x", "y", "z"])
        for t, s in zip(traj.t, traj.y):
            w.writerow(["sample", f"{t:.17g}", *(f"{v:.17g}" for v in s)])
        for ev in traj.events:
            w.writerow(["event", f"{ev.t:.17g}", *(f"{v:.17g}" for v in ev.state)])
