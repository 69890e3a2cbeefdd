"""The cross-section H_p and the tangency curves of the coordinate planes.

H_p is the upper half of the plane {y' = 0} = {x + a y = 0}, charted by
(u, v) = (x, z). Its boundary is the tangency line l_p, where v = u / a.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

import numpy as np

from .exceptions import OffSection, UndefinedAtPole
from .flow import Params, vector_field

__all__ = [
    "SectionPoint",
    "TangencyCurves",
    "SignChamber",
    "embed",
    "embed_points",
    "project",
    "boundary_gap",
    "in_open_section",
    "tangency_curves",
    "sigma_subarc",
    "sign_chamber",
    "trapping_violation",
    "sample_curves",
    "write_curves_csv",
]

SIGN_ZERO = 1e-10
PLANE_TOL = 1e-8


@dataclass(frozen=True)
class SectionPoint:
    """A point of the plane {x + a y = 0} in chart coordinates (u, v) = (x, z)."""

    u: float
    v: float
    params: Params | None = None

    def __post_init__(self):
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))

    @property
    def uv(self) -> np.ndarray:
        return np.array([self.u, self.v])

    def boundary_gap(self, p: Params | None = None) -> float:
        p = p or self.params
        return self.v - self.u / p.a

    def in_open_section(self, p: Params | None = None) -> bool:
        return self.boundary_gap(p) > 0.0


def embed(sp: SectionPoint, p: Params | None = None) -> np.ndarray:
    p = p or sp.params
    if p is None:
        raise ValueError("embedding needs parameters")
    return np.array([sp.u, -sp.u / p.a, sp.v])


def embed_points(p: Params, uv) -> np.ndarray:
    uv = np.asarray(uv, dtype=float)
    u, v = uv[..., 0], uv[..., 1]
    return np.stack([u, -u / p.a, v], axis=-1)


def project(p: Params, s) -> SectionPoint:
    """Chart coordinates of a state lying on {x + a y = 0}.

    Raises
    ------
    OffSection
        If ``|x + a y| > 1e-8 (1 + |s|)``.
    """
    s = np.asarray(s, dtype=float)
    g = s[0] + p.a * s[1]
    if not abs(g) <= PLANE_TOL * (1.0 + np.linalg.norm(s)):
        raise OffSection(f"x + a*y = {g:.3e} is not on the section plane")
    return SectionPoint(s[0], s[2], p)


def boundary_gap(p: Params, uv) -> np.ndarray:
    """Signed distance-like gap ``v - u/a``; positive inside open H_p."""
    uv = np.asarray(uv, dtype=float)
    return uv[..., 1] - uv[..., 0] / p.a


def in_open_section(p: Params, uv) -> np.ndarray:
    return boundary_gap(p, uv) > 0.0


class TangencyCurves(NamedTuple):
    sigma: Callable[[np.ndarray], np.ndarray]
    l_p: Callable[[np.ndarray], np.ndarray]
    delta: Callable[[np.ndarray], np.ndarray]


def tangency_curves(p: Params) -> TangencyCurves:
    """Parametrizations, by x, of the loci where the flow is tangent to
    {x'=0} (sigma), to {y'=0} (l_p) and to {z'=0} within {x'=0} (delta)."""
    a, b, c = p.a, p.b, p.c

    def sigma(x):
        x = np.asarray(x, dtype=float)
        w = x * (b + 1.0) / (a + c - x)
        return np.stack([x, -w, w], axis=-1)

    def l_p(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x, -x / a, x / a], axis=-1)

    def delta(x):
        x = np.asarray(x, dtype=float)
        return np.stack([x, b * x / (x - c), b * x / (c - x)], axis=-1)

    return TangencyCurves(sigma, l_p, delta)


def sigma_subarc(p: Params, x: float) -> str:
    """Which sub-arc of sigma the parameter value ``x`` belongs to.

    Returns one of ``"sigma1"`` (x < 0), ``"sigma3"`` (0 < x < c-ab),
    ``"sigma2"`` (c-ab < x < a+c), ``"sigma4"`` (x > a+c) or ``"endpoint"``
    at the two equilibria.
    """
    pole = p.a + p.c
    if x == pole:
        raise UndefinedAtPole(f"sigma is undefined at x = a + c = {pole}")
    x_out = p.c - p.a * p.b
    if x == 0.0 or x == x_out:
        return "endpoint"
    if x < 0.0:
        return "sigma1"
    if x < x_out:
        return "sigma3"
    if x < pole:
        return "sigma2"
    return "sigma4"


class SignChamber(NamedTuple):
    sx: int
    sy: int
    sz: int


def _sign(v: float) -> int:
    if abs(v) < SIGN_ZERO:
        return 0
    return 1 if v > 0 else -1


def sign_chamber(p: Params, s) -> SignChamber:
    f = vector_field(p, s)
    return SignChamber(_sign(f[0]), _sign(f[1]), _sign(f[2]))


def trapping_violation(p: Params, traj, margin: float = 1e-6) -> float | None:
    """First time at which ``traj`` enters {z < -b - margin}, or None.

    Forward orbits can never enter {z < -b}, so a hit flags an integration
    fault. Checks the samples and a few dense-output points inside each step.
    """
    floor = -p.b - margin
    t = np.asarray(traj.t)
    z = np.asarray(traj.y)[:, 2]
    times = [t[z < floor]]
    if len(t) > 1:
        frac = np.linspace(0.0, 1.0, 7)[1:-1]
        tt = (t[:-1, None] + frac[None, :] * np.diff(t)[:, None]).ravel()
        times.append(tt[traj.sol(tt)[:, 2] < floor])
    hits = np.concatenate(times)
    if not hits.size:
        return None
    # earliest along the integration direction
    d = 1.0 if len(t) < 2 or t[-1] >= t[0] else -1.0
    return float(hits[np.argmin(d * hits)])


def sample_curves(p: Params, xs: Iterable[float]) -> list[tuple[str, float, float, float]]:
    """Rows (curve, x, y, z) of sigma, l_p and delta at the given x values,
    skipping each curve's pole."""
    curves = tangency_curves(p)
    rows = []
    xs = np.asarray(list(xs), dtype=float)
    for name, fn, pole in (
        ("sigma", curves.sigma, p.a + p.c),
        ("l_p", curves.l_p, None),
        ("delta", curves.delta, p.c),
    ):
        keep = xs if pole is None else xs[xs != pole]
        for x, y, z in fn(keep):
            rows.append((name, float(x), float(y), float(z)))
    return rows


def write_curves_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "x", "y", "z"])
        for name, x, y, z in rows:
            w.writerow([name, f"{x:.17g}", f"{y:.17g}", f"{z:.17g}"])
