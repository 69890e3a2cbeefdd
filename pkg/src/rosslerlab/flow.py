"""Rössler vector field in the (a, b, c) normal form.

    x' = -y - z
    y' = x + a y
    z' = b x + z (x - c)

States are plain float arrays of shape ``(3,)`` (or ``(n, 3)`` where noted).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import ConversionUndefined, DegenerateFixedPoints

__all__ = [
    "Params",
    "ClassicParams",
    "FixedPoints",
    "vector_field",
    "jacobian",
    "divergence",
    "fixed_points",
    "classic_p1",
    "classic_to_shifted",
    "shifted_to_classic",
    "classic_params_to_shifted",
]

DEGENERATE_TOL = 1e-10


@dataclass(frozen=True)
class Params:
    """A parameter point (a, b, c)."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.a == 0.0:
            raise ValueError("parameter a must be nonzero")

    @classmethod
    def coerce(cls, p) -> "Params":
        if isinstance(p, Params):
            return p
        if isinstance(p, dict):
            return cls(p["a"], p["b"], p["c"])
        a, b, c = p
        return cls(a, b, c)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)

    def in_standard_range(self) -> bool:
        return 0.0 < self.a < 1.0 and 0.0 < self.b < 1.0 and self.c > 1.0

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}


@dataclass(frozen=True)
class ClassicParams:
    """Parameters (A, B, C) of the original form X' = -Y-Z, Y' = X+AY, Z' = B+Z(X-C)."""

    A: float
    B: float
    C: float

    @property
    def discriminant(self) -> float:
        return self.C * self.C - 4.0 * self.A * self.B


class FixedPoints(NamedTuple):
    p_in: np.ndarray
    p_out: np.ndarray


def vector_field(p: Params, s) -> np.ndarray:
    """Evaluate the field at ``s``; accepts a single state or an ``(n, 3)`` stack."""
    s = np.asarray(s, dtype=float)
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    return np.stack([-y - z, x + p.a * y, p.b * x + z * (x - p.c)], axis=-1)


def jacobian(p: Params, s) -> np.ndarray:
    x, _, z = np.asarray(s, dtype=float)
    return np.array(
        [
            [0.0, -1.0, -1.0],
            [1.0, p.a, 0.0],
            [p.b + z, 0.0, x - p.c],
        ]
    )


def divergence(p: Params, s) -> float:
    # same expression as the Jacobian trace: 0 + a + (x - c)
    x = float(np.asarray(s, dtype=float)[0])
    return 0.0 + p.a + (x - p.c)


def fixed_points(p: Params) -> FixedPoints:
    """Both equilibria, from the closed form followed by one Newton polish.

    Raises
    ------
    DegenerateFixedPoints
        When ``|c - ab| < 1e-10`` and the two equilibria coincide.
    """
    if abs(p.c - p.a * p.b) < DEGENERATE_TOL:
        raise DegenerateFixedPoints(
            f"c - ab = {p.c - p.a * p.b:.3e}: fixed points coincide"
        )
    p_in = np.zeros(3)
    p_out = np.array([p.c - p.a * p.b, p.b - p.c / p.a, p.c / p.a - p.b])
    return FixedPoints(_newton_polish(p, p_in), _newton_polish(p, p_out))


def _newton_polish(p: Params, s: np.ndarray) -> np.ndarray:
    f = vector_field(p, s)
    if not np.any(f):
        return s
    try:
        step = np.linalg.solve(jacobian(p, s), f)
    except np.linalg.LinAlgError:
        return s
    polished = s - step
    if np.linalg.norm(vector_field(p, polished)) <= np.linalg.norm(f):
        return polished
    return s


def classic_p1(cp: ClassicParams) -> float:
    disc = cp.discriminant
    if not disc > 0.0:
        raise ConversionUndefined(f"C^2 - 4AB = {disc:.6g} must be positive")
    if cp.A == 0.0:
        raise ConversionUndefined("A must be nonzero")
    return (-cp.C + math.sqrt(disc)) / (2.0 * cp.A)


def classic_params_to_shifted(cp: ClassicParams) -> Params:
    """Normal-form parameters equivalent to ``cp``: a = A, b = -p1, c = C + A p1."""
    p1 = classic_p1(cp)
    return Params(cp.A, -p1, cp.C + cp.A * p1)


def classic_to_shifted(cp: ClassicParams, classic_state) -> np.ndarray:
    """Map a classic-form state (X, Y, Z) to the normal-form state (x, y, z)."""
    p1 = classic_p1(cp)
    X, Y, Z = np.asarray(classic_state, dtype=float)
    return np.array([X + cp.A * p1, Y - p1, Z + p1])


def shifted_to_classic(cp: ClassicParams, state) -> np.ndarray:
    p1 = classic_p1(cp)
    x, y, z = np.asarray(state, dtype=float)
    return np.array([x - cp.A * p1, y + p1, z - p1])
