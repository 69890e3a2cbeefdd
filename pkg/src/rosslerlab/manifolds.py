"""Separatrices of the two saddle-foci and the trefoil-parameter search.

W^s_In (the one-dimensional stable manifold of P_In) is traced in backward
time and W^u_Out (the unstable manifold of P_Out) in forward time, both
from a seed a small offset along the real eigenvector. A heteroclinic
connection makes the two curves share their plane crossings; the mismatch
functional measures how far they are from doing so.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import NoCrossing, RosslerError
from .flow import Params, fixed_points, jacobian
from .geometry import SectionPoint
from .integrator import (
    NEAR_BOUNDARY,
    CrossingEvent,
    IntegratorConfig,
    Trajectory,
    integrate,
    transversality_floor,
)
from .knots import AlexPoly, knot_polynomial

__all__ = [
    "Separatrix",
    "HeteroMismatch",
    "SearchResult",
    "TrefoilCertificate",
    "Refutation",
    "real_eigenvector",
    "eigenplane",
    "trace_separatrix",
    "bounded_unstable_branch",
    "hetero_mismatch",
    "trefoil_search",
    "certify_trefoil",
    "write_certificate_json",
    "write_separatrix_csv",
    "TrefoilSearch",
]

TREFOIL = AlexPoly((1, -1, 1))
SOURCES = ("p_in_stable", "p_out_unstable")
BRANCHES = ("plus", "minus")


def _fixed_point(p: Params, which: str) -> np.ndarray:
    fp = fixed_points(p)
    return fp.p_in if which == "p_in_stable" else fp.p_out


def real_eigenvector(p: Params, which: str) -> tuple[float, np.ndarray]:
    """Real eigenvalue and unit eigenvector at the fixed point of ``which``.

    The sign is fixed so that the z-component is positive ("plus" branch).
    """
    if which not in SOURCES:
        raise ValueError(f"which must be one of {SOURCES}")
    w, v = np.linalg.eig(jacobian(p, _fixed_point(p, which)))
    k = int(np.argmin(np.abs(w.imag)))
    vec = np.real(v[:, k])
    vec /= np.linalg.norm(vec)
    ref = vec[2] if abs(vec[2]) > 1e-12 else vec[np.argmax(np.abs(vec))]
    if ref < 0:
        vec = -vec
    return float(w[k].real), vec


def eigenplane(p: Params, which: str) -> np.ndarray:
    """Unit normal of the complex-pair eigenplane at the fixed point of ``which``."""
    w, v = np.linalg.eig(jacobian(p, _fixed_point(p, which)))
    k = int(np.argmax(np.abs(w.imag)))
    n = np.cross(np.real(v[:, k]), np.imag(v[:, k]))
    return n / np.linalg.norm(n)


@dataclass
class Separatrix:
    source: str
    branch: str
    seed_offset: float
    seed: np.ndarray
    eigenvector: np.ndarray
    curve: Trajectory
    status: str

    def trap_exit_time(self, margin: float = 1e-6) -> float | None:
        """First traced time with z < -b - margin, or None."""
        b = self.curve.params.b
        below = np.where(self.curve.y[:, 2] < -b - margin)[0]
        return float(self.curve.t[below[0]]) if len(below) else None

    def crossings(self, *, full_plane: bool = True, exclude_radius: float = 0.0) -> list[CrossingEvent]:
        """Plane crossings along the traced curve, optionally upper half only."""
        p = self.curve.params
        fp = fixed_points(p)
        out = []
        for ev in self.curve.events:
            if not full_plane and ev.point.v - ev.point.u / p.a <= -NEAR_BOUNDARY:
                continue
            if exclude_radius > 0 and min(
                np.linalg.norm(ev.state - fp.p_in), np.linalg.norm(ev.state - fp.p_out)
            ) < exclude_radius:
                continue
            out.append(ev)
        return out


def _truncate(traj: Trajectory, cap: float) -> tuple[Trajectory, bool]:
    s = traj.arclength()
    if s[-1] <= cap:
        return traj, False
    k = int(np.searchsorted(s, cap)) + 1
    t_end = traj.t[k - 1]
    d = traj.direction
    events = [e for e in traj.events if (e.t - t_end) * d <= 0]
    cut = Trajectory(
        t=traj.t[:k], y=traj.y[:k], rcont=traj.rcont[: k - 1], events=events,
        status="arclength_cap", params=traj.params,
    )
    return cut, True


def trace_separatrix(
    p: Params,
    which: str,
    branch: str = "plus",
    cfg: IntegratorConfig | None = None,
    arclength_cap: float = math.inf,
    *,
    seed_offset: float | None = None,
    max_time: float | None = None,
) -> Separatrix:
    """Trace one branch of W^s_In (backward time) or W^u_Out (forward time).

    Tracing stops at ``arclength_cap``, on blow-up, or when the curve enters
    the 1e-6 ball of a fixed point it is converging to.
    """
    p = Params.coerce(p)
    cfg = cfg or IntegratorConfig()
    if branch not in BRANCHES:
        raise ValueError(f"branch must be one of {BRANCHES}")
    fp = _fixed_point(p, which)
    if seed_offset is None:
        seed_offset = 1e-7 * (1.0 + float(np.linalg.norm(fp)))
    if not seed_offset > 0:
        raise ValueError("seed_offset must be positive; a seed at the fixed point does not move")
    _, vec = real_eigenvector(p, which)
    sgn = 1.0 if branch == "plus" else -1.0
    seed = fp + sgn * seed_offset * vec
    horizon = cfg.max_time if max_time is None else float(max_time)
    t1 = -horizon if which == "p_in_stable" else horizon
    traj = integrate(p, seed, cfg, (0.0, t1), stop_at_fixed_points=True, raise_on_fault=False)
    traj, capped = _truncate(traj, arclength_cap)
    status = "arclength_cap" if capped else traj.status
    return Separatrix(which, branch, float(seed_offset), seed, vec, traj, status)


def bounded_unstable_branch(p: Params, cfg=None, *, max_time: float = 300.0, **kw) -> Separatrix:
    """The W^u_Out branch that crosses the plane and stays within |s| < 100."""
    best = None
    for br in BRANCHES:
        sep = trace_separatrix(p, "p_out_unstable", br, cfg, max_time=max_time, **kw)
        evs = sep.curve.events
        if not evs:
            continue
        t_first = evs[0].t
        upto = sep.curve.y[sep.curve.t <= t_first]
        if len(upto) and np.max(np.linalg.norm(upto, axis=1)) < 100.0:
            if best is None or (best.status == "blow_up" and sep.status != "blow_up"):
                best = sep
    if best is None:
        raise NoCrossing("no W^u_Out branch reaches the plane while staying bounded")
    return best


@dataclass(frozen=True)
class HeteroMismatch:
    """Smallest chart distance between plane crossings of the two separatrices."""

    value: float
    witness_unstable: CrossingEvent
    witness_stable: CrossingEvent
    n_unstable: int
    n_stable: int
    unstable_branch: str
    stable_branch: str

    def to_dict(self) -> dict:
        wu, ws = self.witness_unstable, self.witness_stable
        return {
            "value": self.value,
            "witness_unstable": [wu.point.u, wu.point.v],
            "witness_stable": [ws.point.u, ws.point.v],
            "n_unstable": self.n_unstable,
            "n_stable": self.n_stable,
            "unstable_branch": self.unstable_branch,
            "stable_branch": self.stable_branch,
        }


def hetero_mismatch(
    p: Params,
    cfg: IntegratorConfig | None = None,
    *,
    stable_branch: str = "plus",
    max_time: float = 300.0,
    exclude_radius: float = 1e-3,
) -> HeteroMismatch:
    """Mismatch between W^u_Out (forward) and W^s_In (backward) crossings.

    Crossings of the whole plane {x + a y = 0} are compared in the chart
    (x, z); crossings within ``exclude_radius`` of a fixed point are left
    out so that the seeds themselves never match.

    Raises
    ------
    NoCrossing
        When a separatrix terminates before reaching the plane.
    """
    p = Params.coerce(p)
    wu = bounded_unstable_branch(p, cfg, max_time=max_time)
    ws = trace_separatrix(p, "p_in_stable", stable_branch, cfg, max_time=max_time)
    cu = wu.crossings(exclude_radius=exclude_radius)
    cs = ws.crossings(exclude_radius=exclude_radius)
    if not cu:
        raise NoCrossing(f"W^u_Out has no plane crossing (ended: {wu.status})")
    if not cs:
        raise NoCrossing(f"W^s_In has no plane crossing (ended: {ws.status})")
    U = np.array([e.point.uv for e in cu])
    S = np.array([e.point.uv for e in cs])
    D = np.linalg.norm(U[:, None, :] - S[None, :, :], axis=2)
    i, j = np.unravel_index(int(np.argmin(D)), D.shape)
    return HeteroMismatch(float(D[i, j]), cu[i], cs[j], len(cu), len(cs), wu.branch, stable_branch)


@dataclass
class SearchResult:
    """Outcome of the trefoil-parameter search.

    ``best_trace`` is the best value after each Nelder-Mead iteration and
    is non-increasing by construction of the simplex method.
    """

    found: bool
    params: Params
    value: float
    seed_value: float
    evaluations: list[tuple[float, float, float]] = field(default_factory=list)
    best_trace: list[float] = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "status": "found" if self.found else "not_found",
            "params": self.params.to_dict(),
            "value": self.value,
            "seed_value": self.seed_value,
            "n_evaluations": len(self.evaluations),
            "best_trace": self.best_trace,
            "message": self.message,
        }


_PENALTY = 1e3


def trefoil_search(
    seed: Params,
    free: tuple[str, str] = ("a", "c"),
    box: float | tuple[float, float] = 0.05,
    cfg: IntegratorConfig | None = None,
    *,
    tol: float = 1e-3,
    maxiter: int = 200,
    mismatch_kw: dict | None = None,
) -> SearchResult:
    """Nelder-Mead minimisation of the mismatch over two free parameters.

    The third parameter stays at its seed value and the free ones are kept
    within ``seed +- box``.
    """
    seed = Params.coerce(seed)
    if len(free) != 2 or len(set(free)) != 2 or not set(free) <= {"a", "b", "c"}:
        raise ValueError("free must name two distinct parameters among a, b, c")
    half = np.array(box if np.ndim(box) else (box, box), dtype=float)
    if np.any(half <= 0):
        raise ValueError("box half-widths must be positive")
    base = seed.to_dict()
    x0 = np.array([base[free[0]], base[free[1]]])
    kw = mismatch_kw or {}
    evals: list[tuple[float, float, float]] = []

    def build(x) -> Params:
        d = dict(base)
        d[free[0]], d[free[1]] = float(x[0]), float(x[1])
        return Params(**d)

    def objective(x) -> float:
        if np.any(np.abs(x - x0) > half * (1 + 1e-12)):
            val = _PENALTY
        else:
            try:
                val = hetero_mismatch(build(x), cfg, **kw).value
            except (RosslerError, ValueError, FloatingPointError):
                val = _PENALTY
        evals.append((float(x[0]), float(x[1]), float(val)))
        return val

    seed_value = objective(x0)
    best_trace = [seed_value]
    best = {"x": x0.copy(), "f": seed_value}

    def callback(xk, *args):
        fk = min(e[2] for e in evals)
        if fk < best["f"]:
            k = int(np.argmin([e[2] for e in evals]))
            best["x"] = np.array(evals[k][:2])
            best["f"] = fk
        best_trace.append(best["f"])

    simplex = np.array([x0, x0 + [0.25 * half[0], 0.0], x0 + [0.0, 0.25 * half[1]]])
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(x0 - half, x0 + half)),
        callback=callback,
        options={
            "initial_simplex": simplex,
            "maxiter": maxiter,
            "xatol": 1e-10,
            "fatol": 1e-12,
        },
    )
    k = int(np.argmin([e[2] for e in evals]))
    xb, fb = np.array(evals[k][:2]), evals[k][2]
    if fb < best["f"]:
        best_trace.append(fb)
    found = fb < tol
    return SearchResult(
        found=bool(found),
        params=build(xb),
        value=float(fb),
        seed_value=float(seed_value),
        evaluations=evals,
        best_trace=best_trace,
        message=str(res.message),
    )


@dataclass
class TrefoilCertificate:
    params: Params
    p0: SectionPoint
    theta_curve: np.ndarray
    crossing_count_on_section: int
    transverse: bool
    knot_poly: AlexPoly | None
    mismatch: float
    closure: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return (
            self.crossing_count_on_section == 1
            and self.transverse
            and self.knot_poly is not None
            and self.knot_poly.coeffs == TREFOIL.coeffs
        )

    def to_dict(self) -> dict:
        return {
            "status": "certified" if self.valid else "refuted",
            "params": self.params.to_dict(),
            "p0": [self.p0.u, self.p0.v],
            "crossing_count_on_section": self.crossing_count_on_section,
            "transverse": self.transverse,
            "alexander": None if self.knot_poly is None else list(self.knot_poly.coeffs),
            "alexander_text": None if self.knot_poly is None else str(self.knot_poly),
            "mismatch": self.mismatch,
            "closure": self.closure,
        }


@dataclass
class Refutation:
    params: Params
    reasons: list[str]
    partial: TrefoilCertificate | None = None

    def to_dict(self) -> dict:
        d = {"status": "refuted", "params": self.params.to_dict(), "reasons": self.reasons}
        if self.partial is not None:
            d["partial"] = self.partial.to_dict()
        return d


def _theta(p: Params, cfg, max_time: float) -> tuple[Separatrix, int]:
    """Bounded W^u_Out cut at its first close approach to P_In.

    Returns the separatrix and the number of samples kept.
    """
    wu = bounded_unstable_branch(p, cfg, max_time=max_time)
    pin = fixed_points(p).p_in
    d = np.linalg.norm(wu.curve.y - pin, axis=1)
    if wu.status == "fixed_point_limit" and wu.curve.fixed_point == "p_in":
        return wu, len(d)
    # first local minimum of the distance that comes within 5% of the
    # largest excursion (the pass by P_In)
    scale = float(np.max(np.linalg.norm(wu.curve.y - wu.curve.y[0], axis=1)))
    close = np.where(d < 0.05 * scale)[0]
    close = close[close > 0]
    if len(close) == 0:
        return wu, len(d)
    k0 = int(close[0])
    k1 = k0
    while k1 + 1 < len(d) and d[k1 + 1] <= d[k1]:
        k1 += 1
    return wu, k1 + 1


def _thin(curve: np.ndarray, min_seg: float) -> np.ndarray:
    """Drop samples closer than ``min_seg`` to the previously kept one."""
    keep = [0]
    for i in range(1, len(curve)):
        if np.linalg.norm(curve[i] - curve[keep[-1]]) >= min_seg:
            keep.append(i)
    if keep[-1] != len(curve) - 1:
        keep[-1] = len(curve) - 1
    return curve[keep]


def _chord_closure(p: Params, pin, pout, n: int = 200, offset_scale: float = 1e-2):
    """Arc from P_In to P_Out bent off the chord along the normal of the
    line where the two local 2D eigenplanes meet."""
    n_in = eigenplane(p, "p_in_stable")  # spans the local W^u_In disc
    n_out = eigenplane(p, "p_out_unstable")  # spans the local W^s_Out disc
    line = np.cross(n_in, n_out)
    line /= np.linalg.norm(line)
    chord = pout - pin
    L = np.linalg.norm(chord)
    normal = np.cross(chord / L, line)
    if np.linalg.norm(normal) < 1e-8:
        normal = np.cross(chord / L, [0.0, 0.0, 1.0])
    normal /= np.linalg.norm(normal)
    offset = offset_scale * L
    s = np.linspace(0.0, 1.0, n)
    arc = pin + s[:, None] * chord + (offset * np.sin(np.pi * s))[:, None] * normal
    return arc, offset, normal


def _escape_piece(sep: Separatrix, radius: float) -> np.ndarray | None:
    y = sep.curve.y
    out = np.where(np.linalg.norm(y, axis=1) > radius)[0]
    if len(out) == 0:
        return None
    return y[: out[0] + 1]


def _infinity_closure(p: Params, cfg, stable_branch: str, unstable_branch: str,
                      radius: float, max_time: float):
    """Path P_In -> infinity -> P_Out along the two unbounded separatrices.

    The W^s_In branch opposite to the matched one is followed (backward
    time) out to ``radius``, joined by a great-circle arc on a sphere of
    ten times that radius to the unbounded W^u_Out branch, which is then
    followed back in to P_Out.
    """
    other_s = "minus" if stable_branch == "plus" else "plus"
    other_u = "minus" if unstable_branch == "plus" else "plus"
    ws = trace_separatrix(p, "p_in_stable", other_s, cfg, max_time=max_time)
    wu = trace_separatrix(p, "p_out_unstable", other_u, cfg, max_time=max_time)
    a = _escape_piece(ws, radius)
    b = _escape_piece(wu, radius)
    if a is None or b is None:
        return None
    far = 10.0 * radius
    ua, ub = a[-1] / np.linalg.norm(a[-1]), b[-1] / np.linalg.norm(b[-1])
    ang = math.acos(float(np.clip(ua @ ub, -1.0, 1.0)))
    s = np.linspace(0.0, 1.0, 181)
    if ang < 1e-9:
        arc = np.repeat(ua[None, :], len(s), axis=0)
    else:
        arc = (np.sin((1 - s) * ang)[:, None] * ua + np.sin(s * ang)[:, None] * ub) / math.sin(ang)
    return np.vstack([a, far * arc, b[::-1]])


def _knot_or_none(loop: np.ndarray) -> AlexPoly | None:
    try:
        return knot_polynomial(_thin(loop, 1e-4), projection=(0.0123, 0.0456, 1.0))
    except RosslerError:
        return None


CLOSURES = ("infinity", "chord")


def certify_trefoil(
    p: Params,
    cfg: IntegratorConfig | None = None,
    *,
    mismatch_tol: float = 1e-3,
    max_time: float = 300.0,
    closure: str = "infinity",
    escape_radius: float = 1000.0,
    exclude_radius: float = 1e-3,
) -> TrefoilCertificate | Refutation:
    """Check the trefoil conditions for the heteroclinic loop at ``p``.

    Θ is the bounded W^u_Out branch from P_Out up to its arrival at P_In.
    Two closures from P_In back to P_Out are built and both knot types are
    reported: ``"infinity"`` runs out along the unbounded W^s_In branch and
    back in along the unbounded W^u_Out branch; ``"chord"`` is a short arc
    offset 1e-2 |P_Out - P_In| from the straight chord. ``closure`` names
    the one the certificate is judged on.
    """
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}")
    p = Params.coerce(p)
    try:
        hm = hetero_mismatch(p, cfg, max_time=max_time)
    except RosslerError as exc:
        return Refutation(p, [f"mismatch undefined: {exc}"])
    reasons = []
    if hm.value >= mismatch_tol:
        reasons.append(f"mismatch {hm.value:.3g} not below {mismatch_tol:g}")
    wu, keep = _theta(p, cfg, max_time)
    curve = wu.curve
    t_end = curve.t[keep - 1]
    fp = fixed_points(p)
    # both fixed points lie on the plane; the crossings at the seed and at
    # the arrival belong to the fixed points, not to Θ
    hits = [
        e for e in wu.crossings(full_plane=False, exclude_radius=exclude_radius)
        if e.t <= t_end
    ]
    count = len(hits)
    if count != 1:
        reasons.append("no section crossing" if count == 0 else "multiple section crossings")
    transverse = bool(hits) and all(
        abs(e.ydot_rate) > transversality_floor(e.state) for e in hits
    )
    if hits and not transverse:
        reasons.append("section crossing is not transverse")
    theta = np.vstack([fp.p_out[None, :], curve.y[:keep], fp.p_in[None, :]])

    arc, offset, normal = _chord_closure(p, fp.p_in, fp.p_out)
    interior = theta[(np.linalg.norm(theta - fp.p_in, axis=1) > 4 * offset)
                     & (np.linalg.norm(theta - fp.p_out, axis=1) > 4 * offset)]
    clearance = (
        float(np.min(np.linalg.norm(interior[:, None, :] - arc[None, ::4, :], axis=2)))
        if len(interior) else math.inf
    )
    chord_poly = _knot_or_none(np.vstack([theta, arc[1:-1]]))
    path = _infinity_closure(p, cfg, hm.stable_branch, hm.unstable_branch, escape_radius, max_time)
    inf_poly = None if path is None else _knot_or_none(
        np.vstack([theta, fp.p_in[None, :], path, fp.p_out[None, :]])
    )
    polys = {"infinity": inf_poly, "chord": chord_poly}
    if closure == "chord" and clearance <= 2 * offset:
        reasons.append("closing arc passes too close to the loop")
    if closure == "infinity" and path is None:
        reasons.append("an unbounded separatrix did not escape")
    poly = polys[closure]
    if poly is None:
        reasons.append("no generic projection for the closed loop")
    elif poly.coeffs != TREFOIL.coeffs:
        reasons.append(f"loop knot polynomial is {poly}, not t^2 - t + 1")
    p0 = hits[0].point if hits else SectionPoint(math.nan, math.nan, p)
    cert = TrefoilCertificate(
        params=p,
        p0=p0,
        theta_curve=theta,
        crossing_count_on_section=count,
        transverse=bool(transverse),
        knot_poly=poly,
        mismatch=hm.value,
        closure={
            "used": closure,
            "surrogate": True,
            "alexander_infinity": None if inf_poly is None else list(inf_poly.coeffs),
            "alexander_chord": None if chord_poly is None else list(chord_poly.coeffs),
            "chord_offset": float(offset),
            "chord_normal": normal.tolist(),
            "chord_clearance": clearance,
            "escape_radius": escape_radius,
        },
    )
    if reasons:
        return Refutation(p, reasons, cert)
    return cert


def write_certificate_json(path, result) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)


def write_separatrix_csv(path, seps: list[Separatrix]) -> None:
    """Rows ``curve,t,x,y,z`` for each traced separatrix."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "t", "x", "y", "z"])
        for sep in seps:
            name = f"{sep.source}_{sep.branch}"
            for t, s in zip(sep.curve.t, sep.curve.y):
                w.writerow([name, f"{t:.17g}", *(f"{v:.17g}" for v in s)])


class TrefoilSearch(BaseEstimator):
    """Estimator wrapper: search for the trefoil parameter, then certify it.

    After ``fit`` the found parameters are in ``params_``, the mismatch in
    ``value_``, the search record in ``result_`` and the certificate (or
    refutation) in ``certificate_``.
    """

    def __init__(self, a=0.468, b=0.3, c=4.615, free=("a", "c"), box=0.05, tol=1e-3,
                 maxiter=200, certify=True, rel_tol=1e-10, abs_tol=1e-12):
        self.a = a
        self.b = b
        self.c = c
        self.free = free
        self.box = box
        self.tol = tol
        self.maxiter = maxiter
        self.certify = certify
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol

    def fit(self, X=None, y=None):
        cfg = IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)
        res = trefoil_search(Params(self.a, self.b, self.c), tuple(self.free), self.box, cfg,
                             tol=self.tol, maxiter=self.maxiter)
        self.result_ = res
        self.params_ = res.params
        self.value_ = res.value
        self.found_ = res.found
        self.certificate_ = (
            certify_trefoil(res.params, cfg, mismatch_tol=self.tol) if self.certify else None
        )
        return self

    def score(self, X=None, y=None) -> float:
        """Negative mismatch at the found parameters."""
        check_is_fitted(self, "value_")
        return -self.value_
