"""Eigen-analysis of the 3x3 Jacobian at the equilibria.

The characteristic cubic is solved in closed form (Cardano for one real root,
the trigonometric form for three) and every root gets one Newton polish.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateFixedPoints, NotSaddleFocus
from .flow import Params, fixed_points, jacobian

__all__ = [
    "Spectrum",
    "SaddleFocusReport",
    "AssumptionStatus",
    "char_poly",
    "eigen3",
    "saddle_report",
    "check_assumptions",
]


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of a real 3x3 matrix.

    With a complex pair, ``gamma`` is the real eigenvalue and ``rho ± i omega``
    the pair (``omega > 0``). With three real roots, ``is_complex_pair`` is
    False, ``real_roots`` holds them in ascending order and ``rho``/``omega``
    are NaN.
    """

    gamma: float
    rho: float
    omega: float
    is_complex_pair: bool
    borderline: bool = False
    real_roots: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("gamma", "rho", "omega"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "is_complex_pair", bool(self.is_complex_pair))
        object.__setattr__(self, "borderline", bool(self.borderline))
        object.__setattr__(self, "real_roots", tuple(float(r) for r in self.real_roots))

    @property
    def eigenvalues(self) -> np.ndarray:
        if self.is_complex_pair:
            return np.array(
                [self.gamma, complex(self.rho, self.omega), complex(self.rho, -self.omega)]
            )
        return np.array(self.real_roots, dtype=complex)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "rho": self.rho,
            "omega": self.omega,
            "is_complex_pair": self.is_complex_pair,
            "borderline": self.borderline,
            "real_roots": list(self.real_roots),
        }


def char_poly(m) -> tuple[float, float, float]:
    """Coefficients (p2, p1, p0) of ``l^3 + p2 l^2 + p1 l + p0 = det(l I - m)``."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    minors = (
        m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
        + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    )
    det = (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )
    return -tr, minors, -det


def _polish(p2: float, p1: float, p0: float, lam: float) -> float:
    f = ((lam + p2) * lam + p1) * lam + p0
    df = (3.0 * lam + 2.0 * p2) * lam + p1
    if df == 0.0:
        return lam
    better = lam - f / df
    fb = ((better + p2) * better + p1) * better + p0
    return better if abs(fb) <= abs(f) else lam


def eigen3(m, borderline_tol: float = 1e-12) -> Spectrum:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        raise ValueError("eigen3 expects a finite 3x3 matrix")
    p2, p1, p0 = char_poly(m)
    shift = -p2 / 3.0
    P = p1 - p2 * p2 / 3.0
    Q = 2.0 * p2**3 / 27.0 - p2 * p1 / 3.0 + p0
    # 4P^3 + 27Q^2 > 0 <=> one real root and a complex pair
    disc = 4.0 * P**3 + 27.0 * Q * Q
    scale = max(1.0, float(np.abs(m).max()))
    borderline = abs(disc) <= borderline_tol * scale**6

    if disc > 0.0 and not borderline:
        sq = math.sqrt(Q * Q / 4.0 + P**3 / 27.0)
        t = np.cbrt(-Q / 2.0 + sq) + np.cbrt(-Q / 2.0 - sq)
        gamma = _polish(p2, p1, p0, float(t) + shift)
        # deflate: l^3 + p2 l^2 + p1 l + p0 = (l - gamma)(l^2 + e1 l + e0)
        e1 = p2 + gamma
        e0 = p1 + gamma * e1
        rho = -e1 / 2.0
        omega2 = e0 - e1 * e1 / 4.0
        if omega2 > 0.0:
            return Spectrum(gamma, rho, math.sqrt(omega2), True, False)
        # rounding pushed the pair onto the real axis
        r = math.sqrt(max(0.0, -omega2))
        roots = sorted(_polish(p2, p1, p0, v) for v in (gamma, rho - r, rho + r))
        return Spectrum(gamma, math.nan, math.nan, False, True, tuple(roots))

    if P >= 0.0:
        roots = [shift] * 3
    else:
        amp = 2.0 * math.sqrt(-P / 3.0)
        arg = 3.0 * Q / (2.0 * P) * math.sqrt(-3.0 / P)
        phi = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        roots = [amp * math.cos(phi - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    # polish the most isolated root, then deflate: close roots are
    # ill-conditioned for Newton, the quadratic keeps trace and product exact
    iso = _polish(p2, p1, p0, max(roots, key=lambda r: sum(abs(r - o) for o in roots)))
    e1 = p2 + iso
    e0 = p1 + iso * e1
    d = e1 * e1 / 4.0 - e0
    if d < 0.0:
        borderline = True
        d = 0.0
    r = math.sqrt(d)
    roots = sorted([iso, -e1 / 2.0 - r, -e1 / 2.0 + r])
    # the "real" eigenvalue is the one farthest from the other two
    gamma = max(roots, key=lambda r: sum(abs(r - o) for o in roots))
    return Spectrum(gamma, math.nan, math.nan, False, borderline, tuple(roots))


@dataclass(frozen=True)
class SaddleFocusReport:
    spectrum_in: Spectrum
    spectrum_out: Spectrum
    nu_in: float
    nu_out: float

    @property
    def shilnikov_in(self) -> bool:
        return bool(self.nu_in < 1.0)

    @property
    def shilnikov_out(self) -> bool:
        return bool(self.nu_out < 1.0)

    def to_dict(self) -> dict:
        return {
            "spectrum_in": self.spectrum_in.to_dict(),
            "spectrum_out": self.spectrum_out.to_dict(),
            "nu_in": self.nu_in,
            "nu_out": self.nu_out,
            "shilnikov_in": self.shilnikov_in,
            "shilnikov_out": self.shilnikov_out,
        }


def _spectra(p: Params) -> tuple[Spectrum, Spectrum]:
    fp = fixed_points(p)
    return eigen3(jacobian(p, fp.p_in)), eigen3(jacobian(p, fp.p_out))


def _dimension_pattern_ok(sp_in: Spectrum, sp_out: Spectrum) -> tuple[bool, str]:
    if not (sp_in.is_complex_pair and sp_out.is_complex_pair):
        return False, "a fixed point has no complex-conjugate pair"
    if not (sp_in.gamma < 0.0 < sp_in.rho):
        return False, (
            f"P_In needs gamma<0<rho (1D stable, 2D unstable); "
            f"got gamma={sp_in.gamma:.6g}, rho={sp_in.rho:.6g}"
        )
    if not (sp_out.rho < 0.0 < sp_out.gamma):
        return False, (
            f"P_Out needs rho<0<gamma (2D stable, 1D unstable); "
            f"got gamma={sp_out.gamma:.6g}, rho={sp_out.rho:.6g}"
        )
    return True, "P_In: 1D stable / 2D unstable; P_Out: 2D stable / 1D unstable"


def saddle_report(p: Params) -> SaddleFocusReport:
    """Saddle indices ``nu = |rho/gamma|`` at both equilibria.

    Raises
    ------
    NotSaddleFocus
        If either spectrum lacks a complex pair or the stable/unstable
        dimensions differ from (1, 2) at P_In and (2, 1) at P_Out.
    """
    p = Params.coerce(p)
    sp_in, sp_out = _spectra(p)
    ok, why = _dimension_pattern_ok(sp_in, sp_out)
    if not ok:
        raise NotSaddleFocus(why)
    return SaddleFocusReport(
        sp_in, sp_out, abs(sp_in.rho / sp_in.gamma), abs(sp_out.rho / sp_out.gamma)
    )


@dataclass
class AssumptionStatus:
    a1: bool
    a2: bool
    a3: bool
    a4: bool
    reasons: dict[str, str] = field(default_factory=dict)
    report: SaddleFocusReport | None = None
    # a3 read literally asks rho_Out > 0, which contradicts the 2D stable
    # manifold it also requires at P_Out; this records that reading
    a3_literal_text: bool | None = None

    @property
    def all_pass(self) -> bool:
        return self.a1 and self.a2 and self.a3 and self.a4

    def to_dict(self) -> dict:
        return {
            "a1": self.a1,
            "a2": self.a2,
            "a3": self.a3,
            "a4": self.a4,
            "all_pass": self.all_pass,
            "reasons": dict(self.reasons),
            "a3_literal_text": self.a3_literal_text,
            "report": None if self.report is None else self.report.to_dict(),
        }


def check_assumptions(p: Params) -> AssumptionStatus:
    p = Params.coerce(p)
    reasons: dict[str, str] = {}

    a1 = p.in_standard_range()
    reasons["a1"] = (
        "a, b in (0,1) and c > 1" if a1
        else f"need a, b in (0,1) and c > 1; got ({p.a}, {p.b}, {p.c})"
    )

    try:
        sp_in, sp_out = _spectra(p)
    except DegenerateFixedPoints as exc:
        for k in ("a2", "a3", "a4"):
            reasons[k] = str(exc)
        return AssumptionStatus(a1, False, False, False, reasons)

    def is_saddle_focus(sp: Spectrum) -> bool:
        return sp.is_complex_pair and sp.gamma * sp.rho < 0.0

    a2 = bool(is_saddle_focus(sp_in) and is_saddle_focus(sp_out))
    reasons["a2"] = (
        "two distinct fixed points, both saddle-foci" if a2
        else "two distinct fixed points, but not both saddle-foci"
    )

    a3, reasons["a3"] = _dimension_pattern_ok(sp_in, sp_out)

    report = None
    if sp_in.is_complex_pair and sp_out.is_complex_pair:
        report = SaddleFocusReport(
            sp_in, sp_out, abs(sp_in.rho / sp_in.gamma), abs(sp_out.rho / sp_out.gamma)
        )
        a4 = bool(report.nu_in < 1.0 or report.nu_out < 1.0)
        reasons["a4"] = f"nu_in={report.nu_in:.6g}, nu_out={report.nu_out:.6g}"
        literal = bool(sp_in.gamma < 0.0 < sp_in.rho and sp_out.gamma > 0.0 and sp_out.rho > 0.0)
    else:
        a4 = False
        reasons["a4"] = "saddle indices undefined without complex pairs"
        literal = False
    return AssumptionStatus(a1, a2, a3, a4, reasons, report, literal)
