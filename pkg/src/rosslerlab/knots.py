"""Knot typing of closed space curves and the L(0,1) template.

Diagrams are read off a parallel projection: segment-pair intersections
give the crossings, depth decides over/under, and the crossing sign comes
from the orientation of the two strands. The Alexander polynomial is the
determinant of a reduced crossing/arc matrix, computed exactly by modular
evaluation and interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numba
import numpy as np

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegenerateDiagram, NonGenericProjection

__all__ = [
    "GaussCode",
    "AlexPoly",
    "gauss_code",
    "reduce_code",
    "alexander",
    "knot_polynomial",
    "generic_code",
    "KnotTyper",
    "torus_alexander",
    "torus_knot_id",
    "canonical_word",
    "is_primitive",
    "enumerate_words",
    "necklace_count",
    "primitive_necklace_count",
    "template_orbit",
    "template_braid",
    "template_embed",
    "trefoil_curve",
    "figure_eight_curve",
    "FIGURE_EIGHT_CODE",
    "knot_report",
    "TEMPLATE_CONVENTION",
]

MAX_SEGMENTS = 20_000
ANGLE_TOL = 1e-3
DEPTH_TOL = 1e-9
VERTEX_TOL = 1e-9
_PRIME = 2_147_483_629  # below 2**31 so products fit in int64


# --------------------------------------------------------------------------
# diagrams


@dataclass(frozen=True)
class GaussCode:
    """Crossing visits in traversal order: (crossing id, is_over, sign)."""

    entries: tuple[tuple[int, bool, int], ...] = ()

    @property
    def n_crossings(self) -> int:
        return len({c for c, _, _ in self.entries})

    def __len__(self) -> int:
        return len(self.entries)

    def validate(self) -> None:
        seen: dict[int, list[tuple[bool, int]]] = {}
        for c, over, s in self.entries:
            seen.setdefault(c, []).append((over, s))
        for c, visits in seen.items():
            if len(visits) != 2:
                raise DegenerateDiagram(f"crossing {c} visited {len(visits)} times")
            (o1, s1), (o2, s2) = visits
            if o1 == o2:
                raise DegenerateDiagram(f"crossing {c} is not once over and once under")
            if s1 != s2 or s1 not in (-1, 1):
                raise DegenerateDiagram(f"crossing {c} has inconsistent sign")

    def signs(self) -> dict[int, int]:
        return {c: s for c, _, s in self.entries}


def _basis(direction) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if not n > 0:
        raise ValueError("projection direction must be nonzero")
    d = d / n
    helper = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2, d


@numba.njit(cache=True)
def _intersections(px, py, depth):
    """All proper crossings between non-adjacent segments of a closed polygon.

    Returns rows (i, j, s, t, sin_angle, depth_i, depth_j) with i < j and
    s, t the positions along segments i and j.
    """
    n = px.shape[0]
    cap = 1024
    out = np.empty((cap, 7))
    m = 0
    xmin = np.empty(n)
    xmax = np.empty(n)
    ymin = np.empty(n)
    ymax = np.empty(n)
    for i in range(n):
        k = (i + 1) % n
        xmin[i] = min(px[i], px[k])
        xmax[i] = max(px[i], px[k])
        ymin[i] = min(py[i], py[k])
        ymax[i] = max(py[i], py[k])
    for i in range(n):
        i1 = (i + 1) % n
        ax, ay = px[i], py[i]
        dx, dy = px[i1] - ax, py[i1] - ay
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if xmax[j] < xmin[i] or xmin[j] > xmax[i] or ymax[j] < ymin[i] or ymin[j] > ymax[i]:
                continue
            j1 = (j + 1) % n
            bx, by = px[j], py[j]
            ex, ey = px[j1] - bx, py[j1] - by
            den = dx * ey - dy * ex
            if den == 0.0:
                continue
            wx, wy = bx - ax, by - ay
            s = (wx * ey - wy * ex) / den
            t = (wx * dy - wy * dx) / den
            if s < 0.0 or s > 1.0 or t < 0.0 or t > 1.0:
                continue
            if m == cap:
                grown = np.empty((2 * cap, 7))
                grown[:m] = out[:m]
                out = grown
                cap *= 2
            nd = math.sqrt(dx * dx + dy * dy)
            ne = math.sqrt(ex * ex + ey * ey)
            out[m, 0] = i
            out[m, 1] = j
            out[m, 2] = s
            out[m, 3] = t
            out[m, 4] = den / (nd * ne)
            out[m, 5] = depth[i] + s * (depth[i1] - depth[i])
            out[m, 6] = depth[j] + t * (depth[j1] - depth[j])
            m += 1
    return out[:m]


def _resample(curve: np.ndarray, max_segments: int) -> np.ndarray:
    if len(curve) <= max_segments:
        return curve
    step = int(math.ceil(len(curve) / max_segments))
    return curve[::step]


def gauss_code(curve, projection=(0.0, 0.0, 1.0), *, close_tol: float = 1e-6) -> GaussCode:
    """Gauss code of a closed polyline seen along ``projection``.

    The polyline may repeat its first vertex at the end. Crossing sign is
    +1 when the under strand passes from right to left of the over strand
    as seen from the viewer (right-handed crossing).

    Raises
    ------
    NonGenericProjection
        On grazing crossings, near-equal depths or crossings through
        projected vertices; retry with a perturbed direction.
    """
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 3:
        raise ValueError("curve must be an (n, 3) array with n >= 3")
    if np.linalg.norm(pts[0] - pts[-1]) <= close_tol:
        pts = pts[:-1]  # drop the repeated vertex; the polygon closes itself
    pts = _resample(pts, MAX_SEGMENTS)
    e1, e2, d = _basis(projection)
    px, py, depth = pts @ e1, pts @ e2, pts @ d
    rows = _intersections(px, py, depth)
    n = len(pts)
    visits = []
    for cid, (i, j, s, t, sin_ang, di, dj) in enumerate(rows):
        if abs(sin_ang) < ANGLE_TOL:
            raise NonGenericProjection("grazing crossing in projection")
        if abs(di - dj) < DEPTH_TOL:
            raise NonGenericProjection("strands meet in space or depths too close")
        if min(s, 1 - s, t, 1 - t) < VERTEX_TOL:
            raise NonGenericProjection("crossing through a projected vertex")
        i_over = di > dj
        # sign of (over x under) seen from +d; sin_ang is (seg i) x (seg j)
        sign = 1 if (sin_ang > 0) == i_over else -1
        visits.append((i + s, cid, bool(i_over), sign))
        visits.append((j + t, cid, not i_over, sign))
    visits.sort()
    code = GaussCode(tuple((c, o, sg) for _, c, o, sg in visits))
    return code


def _relabel(entries) -> GaussCode:
    ids = {}
    out = []
    for c, o, s in entries:
        ids.setdefault(c, len(ids))
        out.append((ids[c], o, s))
    return GaussCode(tuple(out))


def reduce_code(code: GaussCode) -> GaussCode:
    """Remove Reidemeister I loops and simple Reidemeister II bigons."""
    entries = list(code.entries)
    changed = True
    while changed and entries:
        changed = False
        m = len(entries)
        # R1: the two visits of a crossing are cyclically adjacent
        for k in range(m):
            if entries[k][0] == entries[(k + 1) % m][0]:
                c = entries[k][0]
                entries = [e for e in entries if e[0] != c]
                changed = True
                break
        if changed:
            continue
        # R2: crossings c1, c2 passed consecutively twice, both times on the
        # same level (over-over, under-under), with opposite signs
        pos: dict[int, list[int]] = {}
        for k, (c, _, _) in enumerate(entries):
            pos.setdefault(c, []).append(k)
        for k in range(m):
            c1, o1, s1 = entries[k]
            c2, o2, s2 = entries[(k + 1) % m]
            if c1 == c2 or o1 != o2 or s1 == s2:
                continue
            other1 = [q for q in pos[c1] if q != k][0]
            other2 = [q for q in pos[c2] if q != (k + 1) % m][0]
            if (other1 - other2) % m in (1, m - 1):
                entries = [e for e in entries if e[0] not in (c1, c2)]
                changed = True
                break
    return _relabel(entries)


# --------------------------------------------------------------------------
# Alexander polynomial


@dataclass(frozen=True)
class AlexPoly:
    """Integer coefficients, lowest degree first, normalised up to +-t^k."""

    coeffs: tuple[int, ...] = (1,)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _normalise(self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def at_one(self) -> int:
        return sum(self.coeffs)

    def is_symmetric(self) -> bool:
        c = self.coeffs
        return c == c[::-1] or c == tuple(-x for x in c[::-1])

    def __str__(self) -> str:
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            a = self.coeffs[k]
            if a == 0:
                continue
            mag = abs(a)
            mono = "" if k == 0 else ("t" if k == 1 else f"t^{k}")
            body = str(mag) if (mono == "" or mag != 1) else ""
            sgn = "-" if a < 0 else "+"
            terms.append((sgn, body + mono))
        if not terms:
            return "0"
        s = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sgn, t in terms[1:]:
            s += f" {sgn} {t}"
        return s


def _normalise(coeffs) -> tuple[int, ...]:
    c = [int(x) for x in coeffs]
    while c and c[0] == 0:
        c.pop(0)
    while c and c[-1] == 0:
        c.pop()
    if not c:
        return (0,)
    if c[-1] < 0:
        c = [-x for x in c]
    return tuple(c)


@numba.njit(cache=True)
def _det_mod(m, p):
    n = m.shape[0]
    a = m.copy()
    det = 1
    for col in range(n):
        piv = -1
        for r in range(col, n):
            if a[r, col] % p != 0:
                piv = r
                break
        if piv < 0:
            return 0
        if piv != col:
            for k in range(n):
                tmp = a[col, k]
                a[col, k] = a[piv, k]
                a[piv, k] = tmp
            det = (p - det) % p
        pv = a[col, col] % p
        det = (det * pv) % p
        # modular inverse by Fermat
        inv = 1
        base = pv
        e = p - 2
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for r in range(col + 1, n):
            f = (a[r, col] % p) * inv % p
            if f != 0:
                for k in range(col, n):
                    a[r, k] = (a[r, k] - f * (a[col, k] % p)) % p
    return det % p


def _alexander_matrix(code: GaussCode):
    """Linear-in-t crossing/arc matrix as (constant part, t part)."""
    entries = code.entries
    n = code.n_crossings
    unders = [k for k, (_, o, _) in enumerate(entries) if not o]
    m = len(entries)
    # arc a ends at the a-th under visit and starts after the previous one
    arc_of_pos = np.empty(m, dtype=np.int64)
    a = 0
    for k in range(m):
        arc_of_pos[k] = a
        if not entries[k][1]:
            a = (a + 1) % n
    # positions after the last under visit wrap into arc 0
    last_under = unders[-1]
    for k in range(last_under + 1, m):
        arc_of_pos[k] = 0
    A0 = np.zeros((n, n), dtype=np.int64)
    A1 = np.zeros((n, n), dtype=np.int64)
    under_rank = {k: r for r, k in enumerate(unders)}
    over_pos = {c: k for k, (c, o, _) in enumerate(entries) if o}
    for k in unders:
        c, _, sign = entries[k]
        r = under_rank[k]
        incoming = r
        outgoing = (r + 1) % n
        over = arc_of_pos[over_pos[c]]
        row = c
        # (1 - t) on the over arc
        A0[row, over] += 1
        A1[row, over] -= 1
        if sign > 0:
            A1[row, incoming] += 1   # t
            A0[row, outgoing] -= 1   # -1
        else:
            A0[row, incoming] -= 1   # -1
            A1[row, outgoing] += 1   # t
    return A0, A1


def alexander(code: GaussCode) -> AlexPoly:
    """Alexander polynomial of a knot diagram given by its Gauss code.

    Raises
    ------
    DegenerateDiagram
        For malformed codes.
    """
    code.validate()
    code = reduce_code(code)
    n = code.n_crossings
    if n == 0:
        return AlexPoly((1,))
    A0, A1 = _alexander_matrix(code)
    M0 = A0[1:, 1:]
    M1 = A1[1:, 1:]
    size = n - 1
    if size == 0:
        return AlexPoly((1,))
    p = _PRIME
    xs = list(range(2, size + 3))
    ys = [int(_det_mod((M0 + x * M1) % p, p)) for x in xs]
    coeffs = _interpolate_mod(xs, ys, p)
    signed = [c if c <= p // 2 else c - p for c in coeffs]
    poly = AlexPoly(tuple(signed))
    if abs(poly.at_one()) != 1:
        raise DegenerateDiagram(f"diagram gives {poly} with |value at 1| != 1")
    return poly


def _interpolate_mod(xs, ys, p) -> list[int]:
    """Coefficients (low to high) of the interpolating polynomial mod p."""
    n = len(xs)
    coeffs = [0] * n
    for i in range(n):
        # basis polynomial prod_{j!=i} (x - xj) / (xi - xj)
        basis = [1]
        denom = 1
        for j in range(n):
            if j == i:
                continue
            basis = [(b1 - xs[j] * b0) % p for b0, b1 in zip(basis + [0], [0] + basis)]
            denom = denom * (xs[i] - xs[j]) % p
        scale = ys[i] * pow(denom, p - 2, p) % p
        for k in range(n):
            coeffs[k] = (coeffs[k] + scale * basis[k]) % p
    return coeffs


def generic_code(curve, projection=None, *, rng=None, tries: int = 20) -> tuple[GaussCode, np.ndarray]:
    """Gauss code from the first generic view, perturbing non-generic ones.

    Returns the code and the projection direction used.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    direction = np.array([0.0, 0.0, 1.0]) if projection is None else np.asarray(projection, float)
    for _ in range(tries):
        try:
            return gauss_code(curve, direction), direction
        except NonGenericProjection:
            direction = direction / np.linalg.norm(direction) + 1e-2 * rng.standard_normal(3)
    raise NonGenericProjection("no generic projection found")


def knot_polynomial(curve, projection=None, *, rng=None, tries: int = 20) -> AlexPoly:
    """Alexander polynomial of a closed curve, retrying non-generic views."""
    return alexander(generic_code(curve, projection, rng=rng, tries=tries)[0])


def torus_alexander(p: int, q: int) -> AlexPoly:
    """(t^{pq} - 1)(t - 1) / ((t^p - 1)(t^q - 1))."""
    from numpy.polynomial import polynomial as P

    num = P.polymul(_tk_minus_one(p * q), _tk_minus_one(1))
    den = P.polymul(_tk_minus_one(p), _tk_minus_one(q))
    quo, rem = P.polydiv(num, den)
    if np.any(np.abs(rem) > 1e-9):
        raise ArithmeticError("torus-knot quotient is not exact")
    return AlexPoly(tuple(int(round(x)) for x in quo))


def _tk_minus_one(k: int) -> np.ndarray:
    c = np.zeros(k + 1)
    c[0] = -1.0
    c[k] = 1.0
    return c


def torus_knot_id(poly: AlexPoly, max_pq: int = 12) -> tuple[int, int] | None:
    """The unique torus knot T(p, q), 2 <= p < q <= max_pq, with this polynomial."""
    hits = [
        (p, q)
        for p in range(2, max_pq + 1)
        for q in range(p + 1, max_pq + 1)
        if math.gcd(p, q) == 1 and torus_alexander(p, q).coeffs == poly.coeffs
    ]
    return hits[0] if len(hits) == 1 else None


# --------------------------------------------------------------------------
# fixtures


def trefoil_curve(n: int = 600) -> np.ndarray:
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    r = 2 + np.cos(3 * t)
    return np.column_stack([r * np.cos(2 * t), r * np.sin(2 * t), np.sin(3 * t)])


def figure_eight_curve(n: int = 800) -> np.ndarray:
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    r = 2 + np.cos(2 * t)
    return np.column_stack([r * np.cos(3 * t), r * np.sin(3 * t), np.sin(4 * t)])


# standard alternating four-crossing diagram, two crossings of each sign
FIGURE_EIGHT_CODE = GaussCode(
    (
        (0, True, -1), (1, False, -1), (2, True, 1), (3, False, 1),
        (1, True, -1), (0, False, -1), (3, True, 1), (2, False, 1),
    )
)


# --------------------------------------------------------------------------
# words and the L(0,1) template


def canonical_word(word: str) -> str:
    """Lexicographically least rotation."""
    w = str(word)
    if not w or set(w) - {"1", "2"}:
        raise ValueError("template words are nonempty strings over '1' and '2'")
    return min(w[i:] + w[:i] for i in range(len(w)))


def is_primitive(word: str) -> bool:
    n = len(word)
    return all(word != word[d:] + word[:d] for d in range(1, n) if n % d == 0)


def enumerate_words(max_len: int, min_len: int = 1) -> list[str]:
    """Primitive cyclic words over {1, 2} (Lyndon words), by length then lexically."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    out = []
    for n in range(max(1, min_len), max_len + 1):
        for letters in product("12", repeat=n):
            w = "".join(letters)
            if w == canonical_word(w) and is_primitive(w):
                out.append(w)
    return out


def _mobius(n: int) -> int:
    res, k, m = 1, 2, n
    while k * k <= m:
        if m % k == 0:
            m //= k
            if m % k == 0:
                return 0
            res = -res
        k += 1
    if m > 1:
        res = -res
    return res


def primitive_necklace_count(n: int, alphabet: int = 2) -> int:
    return sum(_mobius(d) * alphabet ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def necklace_count(n: int, alphabet: int = 2) -> int:
    """All rotation classes of length ``n``, primitive or not."""
    return sum(
        _totient(d) * alphabet ** (n // d) for d in range(1, n + 1) if n % d == 0
    ) // n


def _totient(n: int) -> int:
    return sum(1 for k in range(1, n + 1) if math.gcd(k, n) == 1)


TEMPLATE_CONVENTION = {
    "template": "L(0,1)",
    "branch_map": "tent: symbol 1 x -> 2x (order kept), symbol 2 x -> 2 - 2x (order reversed)",
    "strand_order": "positions of the periodic tent-map orbit of the word",
    "twist": "positive half twist on the symbol-2 strip",
    "merge": "positive crossings where the strips re-join",
    "closure": "closed braid around the z-axis, viewed along z",
}


def template_orbit(word: str) -> list[Fraction]:
    """Branch-line positions of the periodic orbit with itinerary ``word``.

    Uses the tent map, whose branches realise the two strips: symbol 1
    keeps order, symbol 2 reverses it.
    """
    w = str(word)
    if not w:
        raise ValueError("empty word")
    # x0 = g_{w0}(g_{w1}(... g_{w_{k-1}}(x0))) with g1(y)=y/2, g2(y)=1-y/2
    alpha, beta = Fraction(1), Fraction(0)  # composite map y -> alpha*y + beta
    for s in reversed(w):
        if s == "1":
            alpha, beta = alpha / 2, beta / 2
        else:
            alpha, beta = -alpha / 2, 1 - beta / 2
    x0 = beta / (1 - alpha)
    pts = [x0]
    for s in w[:-1]:
        x = pts[-1]
        pts.append(2 * x if s == "1" else 2 - 2 * x)
    return pts


def template_braid(word: str) -> tuple[int, list[tuple[int, int]]]:
    """Strand count and braid word (generator index, sign) of the template orbit."""
    w = str(word)
    xs = template_orbit(w)
    k = len(xs)
    order = sorted(range(k), key=lambda i: xs[i])  # strand ids by position
    nxt = {i: (i + 1) % k for i in range(k)}
    gens: list[tuple[int, int]] = []
    cur = list(order)

    def bubble(target_key, sign, lo, hi):
        # adjacent swaps sorting cur[lo:hi] by target_key
        for pas in range(hi - lo):
            swapped = False
            for q in range(lo, hi - 1 - pas):
                if target_key(cur[q]) > target_key(cur[q + 1]):
                    cur[q], cur[q + 1] = cur[q + 1], cur[q]
                    gens.append((q, sign))
                    swapped = True
            if not swapped:
                break

    n1 = sum(1 for i in range(k) if w[i] == "1")
    # half twist reverses the symbol-2 strands, which sit above the others
    bubble(lambda i: -xs[i], +1, n1, k)
    # merge: sort everything by the position of the next orbit point
    bubble(lambda i: xs[nxt[i]], +1, 0, k)
    if [xs[nxt[i]] for i in cur] != sorted(xs):
        raise AssertionError("template braid does not close up")
    return k, gens


def template_embed(word: str, samples_per_crossing: int = 24, height: float = 0.4) -> np.ndarray:
    """Closed polyline of the template orbit of ``word`` (a closed braid)."""
    w = canonical_word(word)
    if not is_primitive(w):
        raise ValueError(f"{word!r} is a proper power; its orbit is not a knot")
    k, gens = template_braid(w)
    n_steps = max(len(gens), 1) + 2
    radii = 3.0 + np.arange(k, dtype=float)
    # track which strand sits at which slot
    slot_of = list(range(k))  # slot_of[strand] = slot
    strands = [[] for _ in range(k)]
    m = samples_per_crossing
    steps = list(gens) + [None, None]
    for step, g in enumerate(steps):
        tau = np.linspace(0.0, 1.0, m, endpoint=False)
        phi = 2 * np.pi * (step + tau) / n_steps
        for s in range(k):
            r = np.full(m, radii[slot_of[s]])
            z = np.zeros(m)
            if g is not None:
                q, sign = g
                if slot_of[s] in (q, q + 1):
                    outward = slot_of[s] == q
                    target = q + 1 if outward else q
                    blend = 0.5 * (1 - np.cos(np.pi * tau))
                    r = radii[slot_of[s]] + (radii[target] - radii[slot_of[s]]) * blend
                    up = outward if sign > 0 else not outward
                    z = (1.0 if up else -1.0) * height * np.sin(np.pi * tau)
            strands[s].append(np.column_stack([r * np.cos(phi), r * np.sin(phi), z]))
        if g is not None:
            q, _ = g
            a = slot_of.index(q)
            b = slot_of.index(q + 1)
            slot_of[a], slot_of[b] = q + 1, q
    # glue strands into one loop: strand ending in slot j continues as the
    # strand that started in slot j
    start_slot = list(range(k))
    end_slot = slot_of
    by_start = {start_slot[s]: s for s in range(k)}
    pieces = []
    s = 0
    for _ in range(k):
        pieces.append(np.concatenate(strands[s]))
        s = by_start[end_slot[s]]
    if s != 0:
        raise AssertionError("template orbit closes into several components")
    curve = np.concatenate(pieces)
    return np.vstack([curve, curve[:1]])


def knot_report(word_or_name: str, curve, *, projection=None, metadata=None) -> dict:
    """Crossing counts, Alexander polynomial and torus type of a closed curve."""
    code, direction = generic_code(curve, projection)
    poly = alexander(code)
    rep = {
        "word": word_or_name,
        "crossings": code.n_crossings,
        "crossings_reduced": reduce_code(code).n_crossings,
        "projection": [float(x) for x in direction],
        "alexander": list(poly.coeffs),
        "alexander_text": str(poly),
        "torus": torus_knot_id(poly),
    }
    if metadata:
        rep["metadata"] = metadata
    return rep


class KnotTyper(BaseEstimator):
    """Estimator wrapper mapping closed 3D curves to Alexander polynomials.

    Stateless: ``fit`` only validates the settings. ``predict`` takes a
    sequence of ``(n, 3)`` arrays.
    """

    def __init__(self, projection=(0.0123, 0.0456, 1.0), tries=20, random_state=0):
        self.projection = projection
        self.tries = tries
        self.random_state = random_state

    def fit(self, X=None, y=None):
        if int(self.tries) < 1:
            raise ValueError("tries must be at least 1")
        self.projection_ = np.asarray(self.projection, dtype=float)
        if self.projection_.shape != (3,) or not np.linalg.norm(self.projection_) > 0:
            raise ValueError("projection must be a nonzero 3-vector")
        return self

    def predict(self, curves) -> list[AlexPoly]:
        check_is_fitted(self, "projection_")
        rng = np.random.default_rng(self.random_state)
        return [
            knot_polynomial(np.asarray(c, dtype=float), self.projection_, rng=rng, tries=self.tries)
            for c in curves
        ]
