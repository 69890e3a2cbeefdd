"""Periodic points of the return map and their fixed-point indices.

Periodic points of period k are zeros of g(x) = f^k(x) - x in the chart
(u, v) = (x, z) of H_p. They are found by damped Newton iteration with a
central-difference Jacobian, checked for minimal period and merged up to
cyclic shift. The index of an isolated zero is the winding number of g
along a small circle around it.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import LoopHitsDiscontinuity, LoopTooCoarse, UndecidedPoint
from .flow import Params
from .geometry import SectionPoint, embed
from .integrator import (
    NEAR_BOUNDARY,
    IntegratorConfig,
    Termination,
    integrate,
    next_section_crossing,
    section_crossings,
    transversality_floor,
)
from .knots import canonical_word
from .return_map import UNDECIDED, Partition2, _pmap, classify

__all__ = [
    "PeriodicOrbit",
    "IndexReport",
    "NewtonFailure",
    "DEFAULT_ORBIT_CONFIG",
    "return_power",
    "newton_periodic",
    "recurrence_seeds",
    "itinerary_seeds",
    "find_periodic",
    "attach_word",
    "loop_winding",
    "fixed_point_index",
    "linear_index",
    "PeriodicOrbitFinder",
    "write_orbits_json",
    "write_orbit_curves_csv",
]

ACCEPT_RESIDUAL = 1e-9
DIVISOR_REJECT = 1e-4
DEDUP_TOL = 1e-6
FD_STEP = 1e-6
# Newton needs f^k accurate well below the acceptance residual
DEFAULT_ORBIT_CONFIG = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def return_power(p: Params, uv, k: int, cfg: IntegratorConfig | None = None):
    """``f^k`` of a chart point with its crossings.

    Returns ``(image, events)`` where ``image`` is None if any of the k
    returns fails, is near-tangent, or starts off the closed half-plane.
    """
    u, v = float(uv[0]), float(uv[1])
    events = []
    for _ in range(k):
        if not (math.isfinite(u) and math.isfinite(v)) or v - u / p.a < -NEAR_BOUNDARY:
            return None, events
        hit = next_section_crossing(p, np.array([u, -u / p.a, v]), cfg)
        if isinstance(hit, Termination) or hit.near_tangent:
            return None, events
        events.append(hit)
        u, v = hit.point.u, hit.point.v
    return np.array([u, v]), events


def _fk(p, x, k, cfg):
    return return_power(p, x, k, cfg)[0]


@dataclass(frozen=True)
class NewtonFailure:
    seed: tuple[float, float]
    k: int
    reason: str
    history: tuple[float, ...] = ()


def _jacobian(p, x, k, cfg, h):
    J = np.empty((2, 2))
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        a, b = _fk(p, x + e, k, cfg), _fk(p, x - e, k, cfg)
        if a is None or b is None:
            return None
        J[:, i] = (a - b) / (2 * h)
    return J


def newton_periodic(
    p: Params,
    x0,
    k: int,
    cfg: IntegratorConfig | None = None,
    *,
    tol: float = ACCEPT_RESIDUAL,
    fd_step: float = FD_STEP,
    max_iter: int = 40,
):
    """Damped Newton iteration for ``f^k(x) = x``.

    Returns ``(x, history, jacobian)`` on success, where ``jacobian`` is the
    central-difference estimate of D f^k at the last iterate, or a
    :class:`NewtonFailure`.
    """
    cfg = cfg or DEFAULT_ORBIT_CONFIG
    x = np.asarray(x0, dtype=float).copy()
    seed = (float(x[0]), float(x[1]))
    hist: list[float] = []
    J = None
    for _ in range(max_iter):
        F = _fk(p, x, k, cfg)
        if F is None:
            return NewtonFailure(seed, k, "map undefined at iterate", tuple(hist))
        g = F - x
        r = float(np.linalg.norm(g))
        hist.append(r)
        J = _jacobian(p, x, k, cfg, fd_step)
        if J is None:
            return NewtonFailure(seed, k, "jacobian stencil leaves the domain", tuple(hist))
        if r <= tol:
            return x, hist, J
        A = J - np.eye(2)
        try:
            dx = -np.linalg.solve(A, g)
        except np.linalg.LinAlgError:
            return NewtonFailure(seed, k, "singular Newton matrix", tuple(hist))
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * dx
            Fn = _fk(p, xn, k, cfg)
            if Fn is not None and np.linalg.norm(Fn - xn) < r:
                break
            lam *= 0.5
        else:
            return NewtonFailure(seed, k, "line search failed", tuple(hist))
        x = xn
    return NewtonFailure(seed, k, "iteration limit", tuple(hist))


@dataclass
class PeriodicOrbit:
    """A periodic orbit of the return map.

    ``points[i + 1] = f(points[i])``; ``multipliers`` are the eigenvalues of
    the finite-difference D f^k at ``points[0]`` and ``floquet_ratio`` is its
    determinant.
    """

    params: Params
    k: int
    points: list[SectionPoint]
    residual: float
    floquet_ratio: float
    multipliers: np.ndarray
    jacobian: np.ndarray
    period_time: float
    transverse: bool
    curve3d: np.ndarray | None = None
    closure_error: float = math.nan
    word: str | None = None
    newton_history: list[float] = field(default_factory=list)

    @property
    def uv(self) -> np.ndarray:
        return np.array([q.uv for q in self.points])

    def same_as(self, other: "PeriodicOrbit", tol: float = DEDUP_TOL) -> bool:
        if other.k != self.k:
            return False
        a, b = self.uv, other.uv
        return any(
            np.max(np.linalg.norm(a - np.roll(b, -j, axis=0), axis=1)) < tol
            for j in range(self.k)
        )

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "k": self.k,
            "points": self.uv.tolist(),
            "residual": self.residual,
            "floquet_ratio": self.floquet_ratio,
            "multipliers": [[float(m.real), float(m.imag)] for m in self.multipliers],
            "period_time": self.period_time,
            "transverse": self.transverse,
            "closure_error": self.closure_error,
            "word": self.word,
        }


def _build_orbit(p, x, k, J, hist, cfg, with_curve: bool) -> PeriodicOrbit | str:
    pts = [np.asarray(x, dtype=float)]
    events = []
    cur = pts[0]
    for _ in range(k):
        img, ev = return_power(p, cur, 1, cfg)
        if img is None:
            return "orbit point has no return"
        events.extend(ev)
        pts.append(img)
        cur = img
    residual = float(np.linalg.norm(pts[-1] - pts[0]))
    if residual > ACCEPT_RESIDUAL:
        return f"residual {residual:.3g} above acceptance"
    # minimality: no proper divisor period
    for d in range(1, k):
        if k % d == 0 and np.linalg.norm(pts[d] - pts[0]) < DIVISOR_REJECT:
            return f"not minimal: period divides {d}"
    transverse = all(abs(e.ydot_rate) > transversality_floor(e.state) for e in events)
    T = float(sum(e.t for e in events))
    orbit = PeriodicOrbit(
        params=p,
        k=k,
        points=[SectionPoint(q[0], q[1], p) for q in pts[:-1]],
        residual=residual,
        floquet_ratio=float(np.linalg.det(J)),
        multipliers=np.linalg.eigvals(J),
        jacobian=J,
        period_time=T,
        transverse=bool(transverse),
        newton_history=list(hist),
    )
    if with_curve:
        traj = integrate(p, embed(orbit.points[0], p), cfg, (0.0, T), raise_on_fault=False)
        orbit.curve3d = traj.y
        orbit.closure_error = float(np.linalg.norm(traj.y[-1] - traj.y[0]))
    return orbit


def recurrence_seeds(
    p: Params,
    k: int,
    cfg: IntegratorConfig | None = None,
    *,
    start=None,
    n_returns: int = 600,
    burn_in: int = 100,
    n_seeds: int = 8,
    min_separation: float = 1e-3,
) -> np.ndarray:
    """Section points of a long run with the smallest ``|x_{i+k} - x_i|``.

    Seeds closer than ``min_separation`` to an already chosen one are
    skipped so that distinct near-returns are tried.
    """
    p = Params.coerce(p)
    if start is None:
        start = np.array([-1.0, 1.0 / p.a, 0.0])
    events, _ = section_crossings(p, np.asarray(start, dtype=float), n_returns + burn_in, cfg)
    X = np.array([e.point.uv for e in events])[burn_in:]
    if len(X) <= k:
        return np.empty((0, 2))
    d = np.linalg.norm(X[k:] - X[:-k], axis=1)
    chosen: list[np.ndarray] = []
    for i in np.argsort(d):
        if len(chosen) >= n_seeds:
            break
        if all(np.linalg.norm(X[i] - c) >= min_separation for c in chosen):
            chosen.append(X[i])
    return np.array(chosen).reshape(-1, 2)


def itinerary_seeds(
    p: Params,
    k: int,
    part: Partition2,
    grid,
    cfg: IntegratorConfig | None = None,
    *,
    words=None,
    per_word: int = 2,
) -> dict[str, np.ndarray]:
    """Grid points whose first ``2k`` symbols repeat with period ``k``.

    For each word (up to cyclic shift) the points with the smallest
    ``|f^k(x) - x|`` are kept. ``words`` restricts the search.
    """
    p = Params.coerce(p)
    grid = np.asarray(grid, dtype=float).reshape(-1, 2)
    wanted = None if words is None else {canonical_word(w) for w in words}
    found: dict[str, list[tuple[float, np.ndarray]]] = {}
    for x in grid:
        letters = []
        cur = x
        img_k = None
        ok = True
        for i in range(2 * k):
            s = classify(part, cur)
            if s == UNDECIDED:
                ok = False
                break
            letters.append(str(s))
            nxt = _fk(p, cur, 1, cfg)
            if nxt is None:
                ok = i == 2 * k - 1
                break
            cur = nxt
            if i == k - 1:
                img_k = cur
        if not ok or img_k is None:
            continue
        w = "".join(letters)
        if w[:k] != w[k:]:
            continue
        key = canonical_word(w[:k])
        if wanted is not None and key not in wanted:
            continue
        found.setdefault(key, []).append((float(np.linalg.norm(img_k - x)), x))
    return {
        w: np.array([x for _, x in sorted(c, key=lambda t: t[0])[:per_word]])
        for w, c in found.items()
    }


def find_periodic(
    p: Params,
    k: int,
    seeds,
    cfg: IntegratorConfig | None = None,
    *,
    workers: int = 1,
    with_curve: bool = True,
    failures: list | None = None,
) -> list[PeriodicOrbit]:
    """Periodic orbits of minimal period ``k`` from Newton solves at ``seeds``.

    Failed seeds are appended to ``failures`` (if given) as
    :class:`NewtonFailure` records. Duplicates under cyclic shift are
    merged keeping the smaller residual.
    """
    if k < 1:
        raise ValueError("period must be at least 1")
    p = Params.coerce(p)
    cfg = cfg or DEFAULT_ORBIT_CONFIG
    seeds = np.asarray(seeds, dtype=float).reshape(-1, 2)

    def solve(x0):
        res = newton_periodic(p, x0, k, cfg)
        if isinstance(res, NewtonFailure):
            return res
        x, hist, J = res
        orb = _build_orbit(p, x, k, J, hist, cfg, with_curve)
        if isinstance(orb, str):
            return NewtonFailure((float(x0[0]), float(x0[1])), k, orb, tuple(hist))
        return orb

    out: list[PeriodicOrbit] = []
    for res in _pmap(solve, list(seeds), workers):
        if isinstance(res, NewtonFailure):
            if failures is not None:
                failures.append(res)
            continue
        dup = next((i for i, o in enumerate(out) if o.same_as(res)), None)
        if dup is None:
            out.append(res)
        elif res.residual < out[dup].residual:
            out[dup] = res
    return out


def attach_word(orbit: PeriodicOrbit, part: Partition2) -> str:
    """Symbol word of the orbit; raises :class:`UndecidedPoint` in the band."""
    letters = []
    for i, q in enumerate(orbit.points):
        s = classify(part, q)
        if s == UNDECIDED:
            raise UndecidedPoint(f"orbit point {i} ({q.u:.6g}, {q.v:.6g}) lies in the tolerance band")
        letters.append(str(s))
    orbit.word = "".join(letters)
    return orbit.word


# --------------------------------------------------------------------------
# fixed-point index


@dataclass(frozen=True)
class IndexReport:
    center: SectionPoint
    k: int
    loop_radius: float
    winding: int
    n_loop: int
    min_displacement: float
    linear_oracle: int | None = None

    def to_dict(self) -> dict:
        return {
            "center": [self.center.u, self.center.v],
            "k": self.k,
            "loop_radius": self.loop_radius,
            "winding": self.winding,
            "n_loop": self.n_loop,
            "min_displacement": self.min_displacement,
            "linear_oracle": self.linear_oracle,
        }


def linear_index(jacobian) -> int:
    """Index of an isolated zero of ``A x - x``: sign det(A - I)."""
    d = float(np.linalg.det(np.asarray(jacobian) - np.eye(2)))
    return 0 if d == 0 else int(math.copysign(1, d))


def _displacements(p, pts, k, cfg, workers):
    def one(q):
        img, ev = return_power(p, q, k, cfg)
        if img is None:
            return None
        return img - q, sum(e.t for e in ev)

    return _pmap(one, list(pts), workers)


def loop_winding(
    p: Params,
    center,
    radius: float,
    k: int,
    cfg: IntegratorConfig | None = None,
    *,
    n_loop: int = 256,
    max_loop: int = 4096,
    flight_jump: float = 0.5,
    workers: int = 1,
) -> tuple[int, int, float]:
    """Degree of ``x -> f^k(x) - x`` along a circle.

    The circle is refined (doubling ``n_loop``) until every angle increment
    is below pi/2. Returns ``(winding, n_loop used, min |displacement|)``.

    Raises
    ------
    LoopHitsDiscontinuity
        If a loop point leaves the section, fails to return, or the total
        flight time jumps by more than ``flight_jump`` between neighbours.
    LoopTooCoarse
        If ``max_loop`` points do not resolve the angle.
    """
    p = Params.coerce(p)
    cfg = cfg or DEFAULT_ORBIT_CONFIG
    c = np.asarray(center.uv if isinstance(center, SectionPoint) else center, dtype=float)
    if not radius > 0:
        raise ValueError("loop radius must be positive")
    n = int(n_loop)
    cache: dict[int, tuple] = {}
    while n <= max_loop:
        th = 2 * np.pi * np.arange(n) / n
        pts = c + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
        if np.any(pts[:, 1] - pts[:, 0] / p.a < -NEAR_BOUNDARY):
            raise LoopHitsDiscontinuity("loop leaves the section half-plane")
        # reuse evaluations of the coarser loop
        step = max_loop // n
        todo = [i for i in range(n) if i * step not in cache]
        for i, r in zip(todo, _displacements(p, pts[todo], k, cfg, workers)):
            if r is None:
                raise LoopHitsDiscontinuity(f"loop point {pts[i]} has no {k}-fold return")
            cache[i * step] = r
        disp = np.array([cache[i * step][0] for i in range(n)])
        times = np.array([cache[i * step][1] for i in range(n)])
        if np.max(np.abs(np.diff(np.append(times, times[0])))) > flight_jump:
            raise LoopHitsDiscontinuity("flight time jumps along the loop")
        ang = np.arctan2(disp[:, 1], disp[:, 0])
        inc = np.diff(np.append(ang, ang[0]))
        inc = (inc + np.pi) % (2 * np.pi) - np.pi
        if np.max(np.abs(inc)) < np.pi / 2:
            w = int(round(inc.sum() / (2 * np.pi)))
            return w, n, float(np.min(np.linalg.norm(disp, axis=1)))
        n *= 2
    raise LoopTooCoarse(f"angle increments unresolved with {max_loop} loop points")


def fixed_point_index(
    p: Params,
    orbit: PeriodicOrbit,
    loop_radius: float = 1e-3,
    n_loop: int = 256,
    cfg: IntegratorConfig | None = None,
    *,
    point: int = 0,
    workers: int = 1,
) -> IndexReport:
    """Winding number of ``f^k - id`` on a circle around one orbit point."""
    p = Params.coerce(p)
    c = orbit.points[point]
    w, n, dmin = loop_winding(p, c, loop_radius, orbit.k, cfg, n_loop=n_loop, workers=workers)
    if dmin <= 10 * max(orbit.residual, ACCEPT_RESIDUAL):
        raise LoopHitsDiscontinuity("a loop point is numerically a fixed point of f^k")
    oracle = linear_index(orbit.jacobian) if point == 0 else None
    return IndexReport(c, orbit.k, float(loop_radius), w, n, dmin, oracle)


# --------------------------------------------------------------------------
# estimator and output


class PeriodicOrbitFinder(BaseEstimator):
    """Find periodic orbits of minimal periods ``1..max_period``.

    ``fit(X)`` uses the rows of ``X`` as extra Newton seeds in addition to
    recurrence seeds from a long run. Found orbits are in ``orbits_``.
    """

    def __init__(self, a=0.2, b=0.2, c=5.7, max_period=4, n_returns=600, n_seeds=8,
                 rel_tol=1e-12, abs_tol=1e-14, n_jobs=1):
        self.a = a
        self.b = b
        self.c = c
        self.max_period = max_period
        self.n_returns = n_returns
        self.n_seeds = n_seeds
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        p = Params(self.a, self.b, self.c)
        cfg = IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol)
        extra = np.empty((0, 2)) if X is None else check_array(X, ensure_min_samples=0)
        if extra.shape[1] != 2:
            raise ValueError("seeds must have two columns (u, v)")
        self.orbits_ = []
        self.failures_ = []
        for k in range(1, int(self.max_period) + 1):
            seeds = recurrence_seeds(p, k, cfg, n_returns=self.n_returns, n_seeds=self.n_seeds)
            seeds = np.vstack([seeds, extra])
            self.orbits_.extend(
                find_periodic(p, k, seeds, cfg, workers=self.n_jobs, failures=self.failures_)
            )
        return self

    def predict(self, X=None):
        """Periods of the found orbits."""
        check_is_fitted(self, "orbits_")
        return np.array([o.k for o in self.orbits_], dtype=int)


def write_orbits_json(path, orbits: list[PeriodicOrbit], indices: dict | None = None) -> None:
    recs = []
    for i, o in enumerate(orbits):
        d = o.to_dict()
        if indices and i in indices:
            d["index"] = indices[i].to_dict()
        recs.append(d)
    with open(path, "w") as fh:
        json.dump(recs, fh, indent=2, sort_keys=True)


def write_orbit_curves_csv(path, orbits: list[PeriodicOrbit]) -> None:
    """Rows ``orbit,x,y,z`` with each orbit's closed 3D polyline."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["orbit", "x", "y", "z"])
        for i, o in enumerate(orbits):
            if o.curve3d is None:
                continue
            for s in o.curve3d:
                w.writerow([i, *(f"{v:.17g}" for v in s)])
