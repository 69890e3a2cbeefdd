"""The first-return map on H_p, its discontinuities and a two-symbol coding.

Discontinuities of the return map are the points whose orbit touches the
boundary line l_p before returning: on one side of such a point the orbit
crosses H_p near l_p, on the other it misses and returns a loop later.
They are located along scan lines by looking for jumps of the image and
refining by bisection until the near-side image lies on l_p.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import NoDiscontinuityFound, OffSection
from .flow import Params, fixed_points
from .geometry import SectionPoint, embed
from .integrator import (
    NEAR_BOUNDARY,
    CrossingEvent,
    IntegratorConfig,
    Termination,
    next_section_crossing,
)

__all__ = [
    "UNDECIDED",
    "ReturnResult",
    "ScanGrid",
    "DiscontinuityStructure",
    "Partition2",
    "SymbolicItinerary",
    "first_return",
    "iterate",
    "return_images",
    "find_discontinuities",
    "build_partition",
    "classify",
    "itinerary",
    "FirstReturnMap",
    "SymbolicCoder",
    "write_return_samples_csv",
    "write_polylines_csv",
]

UNDECIDED = 0


@dataclass(frozen=True)
class ReturnResult:
    """Outcome of one application of the return map.

    ``outcome`` is one of ``returned``, ``near_tangent``,
    ``fixed_point_limit``, ``blow_up``, ``time_limit``, ``step_underflow``.
    For ``returned`` and ``near_tangent`` the crossing is attached.
    """

    outcome: str
    point: SectionPoint | None = None
    flight_time: float | None = None
    event: CrossingEvent | None = None
    fixed_point: str | None = None

    @property
    def returned(self) -> bool:
        return self.outcome == "returned"


def _check_section_point(p: Params, sp) -> SectionPoint:
    if not isinstance(sp, SectionPoint):
        u, v = sp
        sp = SectionPoint(u, v, p)
    if not (math.isfinite(sp.u) and math.isfinite(sp.v)):
        raise ValueError("section point must be finite")
    if sp.v - sp.u / p.a < -NEAR_BOUNDARY:
        raise OffSection(f"({sp.u:.6g}, {sp.v:.6g}) lies outside the closed half-plane H_p")
    return sp


def first_return(p: Params, sp, cfg: IntegratorConfig | None = None) -> ReturnResult:
    """Apply the first-return map once."""
    p = Params.coerce(p)
    sp = _check_section_point(p, sp)
    hit = next_section_crossing(p, embed(sp, p), cfg)
    if isinstance(hit, Termination):
        return ReturnResult(hit.kind, fixed_point=hit.fixed_point, flight_time=hit.t)
    outcome = "near_tangent" if hit.near_tangent else "returned"
    return ReturnResult(outcome, hit.point, hit.t, hit)


def iterate(p: Params, sp, k: int, cfg: IntegratorConfig | None = None) -> list[ReturnResult]:
    """Up to ``k`` successive returns, stopping at the first non-return."""
    if k < 1:
        raise ValueError("k must be at least 1")
    p = Params.coerce(p)
    out = []
    cur = sp
    for _ in range(k):
        r = first_return(p, cur, cfg)
        out.append(r)
        if not r.returned:
            break
        cur = r.point
    return out


def _raw_image(p: Params, uv, cfg, power: int = 1):
    """Chart image of ``f^power`` used for scanning.

    Near-tangent crossings are kept (they are the limit values the scanner
    refines toward). A fixed-point limit maps to the chart of that fixed
    point with infinite time; escapes give NaN. Returns
    (u, v, boundary gap, total flight time) of the last image.
    """
    u, v = float(uv[0]), float(uv[1])
    total = 0.0
    for _ in range(power):
        if v - u / p.a < -NEAR_BOUNDARY:
            return math.nan, math.nan, math.nan, math.nan
        hit = next_section_crossing(p, np.array([u, -u / p.a, v]), cfg)
        if isinstance(hit, Termination):
            if hit.kind != "fixed_point_limit":
                return math.nan, math.nan, math.nan, math.nan
            fp = fixed_points(p)
            s = fp.p_in if hit.fixed_point == "p_in" else fp.p_out
            return float(s[0]), float(s[2]), 0.0, math.inf
        u, v = hit.point.u, hit.point.v
        total += hit.t
    return u, v, v - u / p.a, total


def _pmap(fn, items, workers: int):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def return_images(
    p: Params, uv, cfg: IntegratorConfig | None = None, *, power: int = 1, workers: int = 1
) -> np.ndarray:
    """Images of an ``(n, 2)`` array of chart points under ``f^power``.

    Returns an ``(n, 4)`` array of (u', v', boundary gap, flight time); NaN
    rows for orbits that escape or do not return in time.
    """
    p = Params.coerce(p)
    uv = np.asarray(uv, dtype=float).reshape(-1, 2)
    rows = _pmap(lambda q: _raw_image(p, q, cfg, power), list(uv), workers)
    return np.array(rows, dtype=float).reshape(-1, 4)


# --------------------------------------------------------------------------
# discontinuity scanning


@dataclass(frozen=True)
class ScanGrid:
    """Scan lines of constant ``v`` (``axis="u"``) or constant ``u``."""

    u_range: tuple[float, float]
    v_range: tuple[float, float]
    n_lines: int = 21
    n_points: int = 201
    axis: str = "u"

    def __post_init__(self):
        if self.axis not in ("u", "v"):
            raise ValueError("axis must be 'u' or 'v'")
        if self.n_lines < 1 or self.n_points < 3:
            raise ValueError("scan needs at least one line of three points")
        for lo, hi in (self.u_range, self.v_range):
            if not hi > lo:
                raise ValueError("empty scan window")

    @property
    def line_values(self) -> np.ndarray:
        lo, hi = self.v_range if self.axis == "u" else self.u_range
        if self.n_lines == 1:
            return np.array([0.5 * (lo + hi)])
        return np.linspace(lo, hi, self.n_lines)

    @property
    def along_values(self) -> np.ndarray:
        lo, hi = self.u_range if self.axis == "u" else self.v_range
        return np.linspace(lo, hi, self.n_points)

    def line_points(self, i: int) -> np.ndarray:
        s = self.along_values
        c = np.full_like(s, self.line_values[i])
        return np.column_stack([s, c] if self.axis == "u" else [c, s])

    @property
    def line_spacing(self) -> float:
        vals = self.line_values
        return float(vals[1] - vals[0]) if len(vals) > 1 else math.inf

    @property
    def point_spacing(self) -> float:
        s = self.along_values
        return float(s[1] - s[0])

    def contains(self, uv, margin: float = 0.0) -> bool:
        u, v = uv
        return (
            self.u_range[0] + margin <= u <= self.u_range[1] - margin
            and self.v_range[0] + margin <= v <= self.v_range[1] - margin
        )


@dataclass
class DiscontinuityStructure:
    """Discontinuity curves of the return map inside a scan window.

    ``components`` are all chained discontinuity polylines of ``f``;
    ``delta_polyline`` is the one selected as delta. ``rho_polylines`` are
    the preimage curves ``f^-1(delta)``, the surrogate used for coding.
    """

    params: Params
    delta_polyline: np.ndarray
    delta0: SectionPoint
    rho_polylines: list[np.ndarray]
    resolution: float
    components: list[np.ndarray] = field(default_factory=list)
    delta_interior_endpoint: SectionPoint | None = None
    delta_endpoint_distance_to_p0: float | None = None
    delta0_gap: float = math.nan
    rejected_brackets: int = 0
    jump_thresholds: np.ndarray | None = None

    def to_dict(self) -> dict:
        ie = self.delta_interior_endpoint
        return {
            "params": self.params.to_dict(),
            "resolution": self.resolution,
            "delta": self.delta_polyline.tolist(),
            "delta0": [self.delta0.u, self.delta0.v],
            "delta0_gap": self.delta0_gap,
            "delta_interior_endpoint": None if ie is None else [ie.u, ie.v],
            "delta_endpoint_distance_to_p0": self.delta_endpoint_distance_to_p0,
            "rho": [r.tolist() for r in self.rho_polylines],
            "n_components": len(self.components),
            "rejected_brackets": self.rejected_brackets,
        }


def _bisect_jump(p, xl, xr, il, ir, cfg, power, tol, thr=0.0, max_iter=64):
    """Refine a jump between ``xl`` and ``xr`` until one side's image hits l_p.

    Sides are told apart by the flight time, which jumps by at least part of
    a loop where a tangential crossing is lost. Returns (point, gap, partner)
    or None when the jump does not come from a boundary hit (an escape, a
    fixed-point limit, or a steep but continuous stretch whose image gap
    closes below ``thr``).
    """
    best = None
    for _ in range(max_iter):
        if thr > 0.0 and np.linalg.norm(il[:2] - ir[:2]) < thr:
            return None
        for x, im in ((xl, il), (xr, ir)):
            if abs(im[2]) < tol and (best is None or abs(im[2]) < abs(best[1])):
                best = (x, im[2])
        if best is not None:
            break
        if np.linalg.norm(xr - xl) < 1e-15 * (1.0 + np.linalg.norm(xl)):
            break
        xm = 0.5 * (xl + xr)
        im = np.array(_raw_image(p, xm, cfg, power))
        if not np.all(np.isfinite(im[:3])):
            return None
        if abs(im[3] - il[3]) <= abs(im[3] - ir[3]):
            xl, il = xm, im
        else:
            xr, ir = xm, im
    if best is None:
        return None
    x = best[0]
    partner = xr if x is xl else xl
    return x, best[1], partner


def _scan_line(p, pts, cfg, power, tol, jump_factor):
    imgs = np.array([_raw_image(p, q, cfg, power) for q in pts])
    d = np.linalg.norm(np.diff(imgs[:, :2], axis=0), axis=1)
    finite = np.isfinite(d)
    if not finite.any():
        return [], math.nan, 0
    thr = jump_factor * float(np.median(d[finite]))
    found = []
    rejected = 0
    for j in np.where(finite & (d > thr))[0]:
        r = _bisect_jump(p, pts[j], pts[j + 1], imgs[j], imgs[j + 1], cfg, power, tol, thr)
        if r is None:
            rejected += 1
        else:
            found.append(r)
    return found, thr, rejected


def _chain(points: np.ndarray, cap: float) -> list[np.ndarray]:
    """Mutual-nearest-neighbour chaining into ordered polylines."""
    n = len(points)
    if n == 0:
        return []
    if n == 1:
        return [points.copy()]
    tree = cKDTree(points)
    k = min(3, n)
    dist, idx = tree.query(points, k=k)
    near = [set() for _ in range(n)]
    for i in range(n):
        for dd, j in zip(dist[i, 1:], idx[i, 1:]):
            if j != i and dd <= cap:
                near[i].add(int(j))
    adj = [set() for _ in range(n)]
    for i in range(n):
        for j in near[i]:
            if i in near[j]:
                adj[i].add(j)
                adj[j].add(i)
    seen = np.zeros(n, dtype=bool)
    comps = []
    # start from path ends first so that paths come out ordered
    order = sorted(range(n), key=lambda i: (len(adj[i]) != 1, i))
    for s in order:
        if seen[s]:
            continue
        path = [s]
        seen[s] = True
        prev, cur = -1, s
        while True:
            nxt = [j for j in sorted(adj[cur]) if j != prev and not seen[j]]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen[cur] = True
            path.append(cur)
        comps.append(points[path])
    return comps


def _interior(p: Params, scan: ScanGrid, q, margin: float) -> bool:
    return scan.contains(q, margin) and (q[1] - q[0] / p.a) > margin


def _scan(p, scan, cfg, power, tol, jump_factor, workers):
    results = _pmap(
        lambda i: _scan_line(p, scan.line_points(i), cfg, power, tol, jump_factor),
        list(range(scan.n_lines)),
        workers,
    )
    found = [r for res in results for r in res[0]]
    thresholds = np.array([res[1] for res in results])
    rejected = sum(res[2] for res in results)
    return found, thresholds, rejected


def find_discontinuities(
    p: Params,
    scan: ScanGrid,
    cfg: IntegratorConfig | None = None,
    *,
    rho_scan: ScanGrid | None = None,
    p0=None,
    tol: float = 1e-6,
    jump_factor: float = 10.0,
    workers: int = 1,
) -> DiscontinuityStructure:
    """Locate delta, its boundary endpoint and the preimage curves of delta.

    Parameters
    ----------
    scan : ScanGrid
        Window for the discontinuity curves of ``f``.
    rho_scan : ScanGrid, optional
        Window for the preimage curves (defaults to ``scan``).
    p0 : SectionPoint or pair, optional
        Where delta is expected to terminate; used to pick delta among
        several candidates and reported as a distance.

    Raises
    ------
    NoDiscontinuityFound
        If no jump along any scan line refines to a boundary hit.
    """
    p = Params.coerce(p)
    cfg = cfg or IntegratorConfig()
    found, thresholds, rejected = _scan(p, scan, cfg, 1, tol, jump_factor, workers)
    if not found:
        raise NoDiscontinuityFound("no image jump refined to a boundary hit in the scan window")
    pts = np.array([f[0] for f in found])
    res = max(scan.point_spacing, scan.line_spacing if scan.n_lines > 1 else 0.0)
    cap = 5.0 * res
    comps = _chain(pts, cap)
    margin = 2.0 * res
    p0 = None if p0 is None else np.asarray(p0.uv if isinstance(p0, SectionPoint) else p0, float)

    def n_interior(c):
        return int(_interior(p, scan, c[0], margin)) + int(_interior(p, scan, c[-1], margin))

    def length(c):
        return float(np.sum(np.linalg.norm(np.diff(c, axis=0), axis=1))) if len(c) > 1 else 0.0

    single = [c for c in comps if n_interior(c) == 1 and len(c) > 1]
    pool = single or [c for c in comps if len(c) > 1] or comps
    if p0 is not None:
        delta = min(pool, key=lambda c: float(np.min(np.linalg.norm(c - p0, axis=1))))
    else:
        delta = max(pool, key=length)

    ends = [delta[0], delta[-1]]
    inner = [e for e in ends if _interior(p, scan, e, margin)]
    if len(inner) == 1:
        interior_end = inner[0]
        bnd_end = ends[1] if interior_end is ends[0] else ends[0]
    else:
        interior_end = None
        # boundary endpoint: the one closer to l_p
        bnd_end = min(ends, key=lambda e: e[1] - e[0] / p.a)
    if bnd_end is ends[0]:
        delta = delta[::-1].copy()  # delta runs from its interior end to delta0
    dist_p0 = None
    if p0 is not None:
        ref = interior_end if interior_end is not None else delta[
            int(np.argmin(np.linalg.norm(delta - p0, axis=1)))
        ]
        dist_p0 = float(np.linalg.norm(ref - p0))

    rho = _find_rho(p, rho_scan or scan, cfg, delta, tol, workers)
    return DiscontinuityStructure(
        params=p,
        delta_polyline=delta,
        delta0=SectionPoint(bnd_end[0], bnd_end[1], p),
        rho_polylines=rho,
        resolution=res,
        components=comps,
        delta_interior_endpoint=None
        if interior_end is None
        else SectionPoint(interior_end[0], interior_end[1], p),
        delta_endpoint_distance_to_p0=dist_p0,
        delta0_gap=float(bnd_end[1] - bnd_end[0] / p.a),
        rejected_brackets=rejected,
        jump_thresholds=thresholds,
    )


def _segments_cross(p1, p2, poly: np.ndarray) -> bool:
    a = poly[:-1]
    b = poly[1:]
    d = p2 - p1
    e = b - a
    den = d[0] * e[:, 1] - d[1] * e[:, 0]
    w = a - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / den
        t = (w[:, 0] * d[1] - w[:, 1] * d[0]) / den
    ok = (den != 0) & (s >= 0) & (s <= 1) & (t >= 0) & (t <= 1)
    return bool(np.any(ok))


def _rho_line(p, pts, cfg, delta, tol):
    imgs = np.array([_raw_image(p, q, cfg, 1) for q in pts])
    out = []
    for j in range(len(pts) - 1):
        i1, i2 = imgs[j, :2], imgs[j + 1, :2]
        if not (np.all(np.isfinite(i1)) and np.all(np.isfinite(i2))):
            continue
        if not _segments_cross(i1, i2, delta):
            continue
        xl, xr = pts[j], pts[j + 1]
        il = np.array(_raw_image(p, xl, cfg, 2))
        ir = np.array(_raw_image(p, xr, cfg, 2))
        if not (np.all(np.isfinite(il[:3])) and np.all(np.isfinite(ir[:3]))):
            continue
        r = _bisect_jump(p, xl, xr, il, ir, cfg, 2, tol)
        if r is not None:
            out.append(r[0])
    return out


def _find_rho(p, scan, cfg, delta, tol, workers):
    """Preimage curves of delta.

    Brackets are scan-line cells whose images straddle the delta polyline;
    each is refined as a jump of f∘f, i.e. until the second image lies on
    the boundary line.
    """
    if len(delta) < 2:
        return []
    lines = _pmap(
        lambda i: _rho_line(p, scan.line_points(i), cfg, delta, tol),
        list(range(scan.n_lines)),
        workers,
    )
    keep = [x for line in lines for x in line]
    if not keep:
        return []
    res = max(scan.point_spacing, scan.line_spacing if scan.n_lines > 1 else 0.0)
    return [c for c in _chain(np.array(keep), 5.0 * res) if len(c) > 1]


def _dist_to_polyline(q, poly: np.ndarray) -> float:
    if len(poly) == 1:
        return float(np.linalg.norm(q - poly[0]))
    a = poly[:-1]
    d = poly[1:] - a
    L2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    t = np.clip(np.sum((q - a) * d, axis=1) / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    return float(np.min(np.linalg.norm(proj - q, axis=1)))


def _side(q, poly: np.ndarray) -> tuple[float, float]:
    """(signed side, distance) of ``q`` relative to the nearest segment."""
    a = poly[:-1]
    d = poly[1:] - a
    L2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    t = np.clip(np.sum((q - a) * d, axis=1) / L2, 0.0, 1.0)
    proj = a + t[:, None] * d
    dist = np.linalg.norm(proj - q, axis=1)
    k = int(np.argmin(dist))
    # beyond an end, extend the end segment
    w = q - a[k]
    cross = d[k, 0] * w[1] - d[k, 1] * w[0]
    return float(np.sign(cross)), float(dist[k])


# --------------------------------------------------------------------------
# coding


@dataclass
class Partition2:
    """Two-piece partition of H_p relative to the preimage curves of delta.

    A point is coded by its side of the nearest preimage curve: the side of
    the P0 reference is symbol 2, the other side symbol 1.
    """

    params: Params
    rho_polylines: list[np.ndarray]
    ref_one: SectionPoint
    ref_two: SectionPoint
    resolution: float
    _two_side: list[float] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.rho_polylines:
            raise ValueError("partition needs at least one preimage curve")
        self._two_side = [_side(self.ref_two.uv, r)[0] for r in self.rho_polylines]

    def __call__(self, sp) -> int:
        return classify(self, sp)


def build_partition(
    structure: DiscontinuityStructure, p0, ref_one=None, resolution: float | None = None
) -> Partition2:
    """Partition from a discontinuity structure.

    ``p0`` is the symbol-2 reference; ``ref_one`` defaults to a point next to
    the projection of P_In on the boundary.
    """
    p = structure.params
    if not isinstance(p0, SectionPoint):
        p0 = SectionPoint(p0[0], p0[1], p)
    if ref_one is None:
        ref_one = SectionPoint(-1e-2, 0.0, p)
    elif not isinstance(ref_one, SectionPoint):
        ref_one = SectionPoint(ref_one[0], ref_one[1], p)
    res = structure.resolution * 1e-3 if resolution is None else resolution
    return Partition2(p, structure.rho_polylines, ref_one, p0, res)


def classify(part: Partition2, sp) -> int:
    """Symbol 1 or 2, or ``UNDECIDED`` (0) inside a tolerance band."""
    q = sp.uv if isinstance(sp, SectionPoint) else np.asarray(sp, dtype=float)
    if not np.all(np.isfinite(q)):
        return UNDECIDED
    if abs(q[1] - q[0] / part.params.a) < 1e-9:
        return UNDECIDED
    best = None
    for r, s2 in zip(part.rho_polylines, part._two_side):
        s, dist = _side(q, r)
        if best is None or dist < best[1]:
            best = (s, dist, s2)
    s, dist, s2 = best
    if dist < part.resolution or s == 0.0:
        return UNDECIDED
    return 2 if s == s2 else 1


@dataclass(frozen=True)
class SymbolicItinerary:
    word: str
    start: SectionPoint
    valid_length: int
    stop_reason: str = "complete"


def itinerary(
    p: Params, sp, length: int, part: Partition2, cfg: IntegratorConfig | None = None
) -> SymbolicItinerary:
    """Symbols of ``sp, f(sp), f^2(sp), ...`` up to ``length`` letters."""
    p = Params.coerce(p)
    sp = _check_section_point(p, sp)
    letters = []
    cur = sp
    reason = "complete"
    for i in range(length):
        s = classify(part, cur)
        if s == UNDECIDED:
            reason = "undecided"
            break
        letters.append(str(s))
        if i == length - 1:
            break
        r = first_return(p, cur, cfg)
        if not r.returned:
            reason = r.outcome
            break
        cur = r.point
    return SymbolicItinerary("".join(letters), sp, len(letters), reason)


# --------------------------------------------------------------------------
# estimator wrappers


def _config_from(est) -> IntegratorConfig:
    return IntegratorConfig(
        rel_tol=est.rel_tol, abs_tol=est.abs_tol, max_step=est.max_step, max_time=est.max_time
    )


class FirstReturnMap(TransformerMixin, BaseEstimator):
    """Return map as a transformer on ``(n, 2)`` arrays of chart points.

    ``transform`` gives the images; rows whose orbit does not return
    transversally are NaN. ``flight_times_`` and ``outcomes_`` describe the
    last transformed batch.
    """

    def __init__(self, a=0.468, b=0.3, c=4.615, rel_tol=1e-10, abs_tol=1e-12,
                 max_step=0.1, max_time=1000.0, n_jobs=1):
        self.a = a
        self.b = b
        self.c = c
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_step = max_step
        self.max_time = max_time
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        self.params_ = Params(self.a, self.b, self.c)
        self.config_ = _config_from(self)
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = check_array(X, ensure_min_features=2)
        if X.shape[1] != 2:
            raise ValueError("expected chart coordinates (u, v)")
        p, cfg = self.params_, self.config_

        def one(q):
            try:
                return first_return(p, (q[0], q[1]), cfg)
            except OffSection:
                return ReturnResult("off_section")

        results = _pmap(one, list(X), self.n_jobs)
        out = np.full((len(X), 2), np.nan)
        self.flight_times_ = np.full(len(X), np.nan)
        self.outcomes_ = np.array([r.outcome for r in results])
        for i, r in enumerate(results):
            if r.returned:
                out[i] = r.point.uv
                self.flight_times_[i] = r.flight_time
        return out


class SymbolicCoder(BaseEstimator):
    """Fits the discontinuity structure and codes points with symbols 1/2.

    ``predict`` returns 1, 2 or 0 (undecided) per chart point.
    """

    def __init__(self, a=0.468, b=0.3, c=4.615, u_range=(-1.7, -0.05),
                 v_range=(-0.3, 0.3), n_lines=11, n_points=201, p0=None,
                 rel_tol=1e-10, abs_tol=1e-12, max_step=0.1, max_time=1000.0, n_jobs=1):
        self.a = a
        self.b = b
        self.c = c
        self.u_range = u_range
        self.v_range = v_range
        self.n_lines = n_lines
        self.n_points = n_points
        self.p0 = p0
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_step = max_step
        self.max_time = max_time
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.p0 is None:
            raise ValueError("p0 (the symbol-2 reference point) is required")
        self.params_ = Params(self.a, self.b, self.c)
        scan = ScanGrid(tuple(self.u_range), tuple(self.v_range), self.n_lines, self.n_points)
        self.structure_ = find_discontinuities(
            self.params_, scan, _config_from(self), p0=self.p0, workers=self.n_jobs
        )
        self.partition_ = build_partition(self.structure_, self.p0)
        return self

    def predict(self, X):
        if not hasattr(self, "partition_"):
            raise NotFittedError("SymbolicCoder is not fitted yet")
        X = check_array(X, ensure_all_finite=False, ensure_min_features=2)
        return np.array([classify(self.partition_, q) for q in X], dtype=int)

    def itinerary(self, sp, length: int) -> SymbolicItinerary:
        if not hasattr(self, "partition_"):
            raise NotFittedError("SymbolicCoder is not fitted yet")
        return itinerary(self.params_, sp, length, self.partition_, _config_from(self))


# --------------------------------------------------------------------------
# output


def write_return_samples_csv(path, p: Params, points, cfg=None, part: Partition2 | None = None):
    """Rows ``u,v,u_next,v_next,flight_time,symbol`` (symbol 0 if uncoded)."""
    p = Params.coerce(p)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "v", "u_next", "v_next", "flight_time", "symbol"])
        for q in np.asarray(points, dtype=float).reshape(-1, 2):
            r = first_return(p, (q[0], q[1]), cfg)
            sym = classify(part, q) if part is not None else UNDECIDED
            if r.returned:
                vals = [q[0], q[1], r.point.u, r.point.v, r.flight_time]
            else:
                vals = [q[0], q[1], math.nan, math.nan, math.nan]
            w.writerow([f"{x:.17g}" for x in vals] + [sym])


def write_polylines_csv(path, curves: dict[str, np.ndarray]) -> None:
    """Rows ``curve_id,u,v``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve_id", "u", "v"])
        for name, poly in curves.items():
            for u, v in np.asarray(poly).reshape(-1, 2):
                w.writerow([name, f"{u:.17g}", f"{v:.17g}"])
