"""Acceptance criteria, one test each.

Every criterion collects named checks (including its runtime budget),
records one PASS/FAIL line and then asserts. The lines are printed in the
terminal summary.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from rosslerlab.exceptions import BlowUp, DegenerateFixedPoints, LoopHitsDiscontinuity
from rosslerlab.flow import Params, fixed_points, vector_field
from rosslerlab.geometry import sigma_subarc, tangency_curves, trapping_violation
from rosslerlab.integrator import (
    IntegratorConfig,
    integrate,
    section_crossings,
    transversality_floor,
)
from rosslerlab.knots import (
    FIGURE_EIGHT_CODE,
    AlexPoly,
    alexander,
    enumerate_words,
    figure_eight_curve,
    is_primitive,
    knot_polynomial,
    necklace_count,
    primitive_necklace_count,
    template_embed,
    torus_alexander,
    torus_knot_id,
    trefoil_curve,
)
from rosslerlab.manifolds import TrefoilCertificate, certify_trefoil, trefoil_search
from rosslerlab.periodic import (
    attach_word,
    find_periodic,
    fixed_point_index,
    linear_index,
    loop_winding,
    recurrence_seeds,
)
from rosslerlab.return_map import ScanGrid, build_partition, find_discontinuities
from rosslerlab.spectral import check_assumptions, saddle_report

NOMINAL = Params(0.468, 0.3, 4.615)
CLASSIC = Params(0.2, 0.2, 5.7)
UNKNOT = AlexPoly((1,))
TREFOIL = AlexPoly((1, -1, 1))

RESULTS: dict[int, str] = {}


class Criterion:
    """Collects checks for one criterion and records its summary line."""

    def __init__(self, number: int, budget: float):
        self.number = number
        self.budget = budget
        self.checks: list[tuple[str, bool, str]] = []
        self.t0 = time.perf_counter()

    def check(self, name: str, ok, detail: str = "") -> bool:
        self.checks.append((name, bool(ok), detail))
        return bool(ok)

    def finish(self, extra_time: float = 0.0) -> None:
        elapsed = time.perf_counter() - self.t0 + extra_time
        self.check("runtime", elapsed < self.budget, f"{elapsed:.1f}s < {self.budget:g}s")
        failed = [c for c in self.checks if not c[1]]
        verdict = "FAIL" if failed else "PASS"
        shown = failed if failed else self.checks
        text = "; ".join(f"{n}: {d}" if d else n for n, _, d in shown)
        RESULTS[self.number] = f"criterion {self.number:2d}: {verdict}  {text}"
        assert not failed, RESULTS[self.number]

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        if exc is not None and not isinstance(exc, AssertionError):
            self.check("error", False, f"{type(exc).__name__}: {exc}")
            self.finish()
        return False


@pytest.fixture(scope="module")
def search():
    t0 = time.perf_counter()
    res = trefoil_search(NOMINAL)
    cert = certify_trefoil(res.params) if res.found else None
    return res, cert, time.perf_counter() - t0


@pytest.fixture(scope="module")
def candidate(search):
    """Orbits of periods 1-4 and their words at the searched parameter."""
    res, cert, _ = search
    t0 = time.perf_counter()
    p = res.params
    p0 = cert.p0.uv if isinstance(cert, TrefoilCertificate) else (-1.5490703, -0.0462138)
    structure = find_discontinuities(p, ScanGrid((-1.7, -0.05), (-0.3, 0.3), 7, 161), p0=p0)
    part = build_partition(structure, p0)
    orbits = {k: find_periodic(p, k, recurrence_seeds(p, k)) for k in (1, 2, 3, 4)}
    words = {k: [attach_word(o, part) for o in orbs] for k, orbs in orbits.items()}
    return p, orbits, words, time.perf_counter() - t0


def test_criterion_01_spectra():
    with Criterion(1, 1.0) as cr:
        rep = saddle_report(NOMINAL)
        si, so = rep.spectrum_in, rep.spectrum_out
        want = [
            ("gamma_In", si.gamma, -4.551586), ("rho_In", si.rho, 0.202428),
            ("omega_In", si.omega, 0.970593), ("gamma_Out", so.gamma, 0.413139),
            ("rho_Out", so.rho, -0.0427694), ("omega_Out", so.omega, 3.29073),
        ]
        for name, got, ref in want:
            cr.check(name, abs(got - ref) <= 1e-4, f"{got:.7f} vs {ref} (|d|={abs(got - ref):.1e})")
        cr.check("nu_In<1", rep.nu_in < 1, f"{rep.nu_in:.5f}")
        cr.check("nu_Out<1", rep.nu_out < 1, f"{rep.nu_out:.5f}")
        cr.finish()


def test_criterion_02_assumption_gate():
    with Criterion(2, 1.0) as cr:
        st = check_assumptions(NOMINAL)
        cr.check("a1-a4 at (0.468,0.3,4.615)", st.all_pass)
        cr.check("a1 fails at (0.5,0.5,0.2)", not check_assumptions(Params(0.5, 0.5, 0.2)).a1)
        raised = []
        for off in (0.0, 5e-11, -5e-11, 9e-11):
            try:
                fixed_points(Params(0.5, 0.4, 0.2 + off))
                raised.append(False)
            except DegenerateFixedPoints:
                raised.append(True)
        cr.check("DegenerateFixedPoints for |c-ab|<1e-10", all(raised), str(raised))
        fixed_points(Params(0.5, 0.4, 0.2 + 1e-6))
        cr.finish()


def test_criterion_03_integrator():
    with Criterion(3, 10.0) as cr:
        s0 = np.array([1.0, 1.0, 0.0])
        ref = integrate(CLASSIC, s0, IntegratorConfig(rel_tol=1e-13, abs_tol=1e-15), (0.0, 10.0)).y_final
        errs = [np.linalg.norm(integrate(CLASSIC, s0, None, (0.0, 10.0), fixed_step=h).y_final - ref)
                for h in (0.02, 0.01)]
        order = math.log2(errs[0] / errs[1])
        cr.check("order>=4.5", order >= 4.5, f"{order:.2f}")
        fwd = integrate(CLASSIC, s0, None, (0.0, 20.0))
        try:
            back = integrate(CLASSIC, fwd.y_final, None, (20.0, 0.0))
            err, detail = float(np.linalg.norm(back.y_final - s0)), ""
        except BlowUp as exc:
            err, detail = math.inf, f" ({exc})"
        cr.check("round trip T=20 <= 1e-6", err <= 1e-6, f"error {err:.2e}{detail}")
        cr.finish()


def test_criterion_04_section_contract():
    with Criterion(4, 30.0) as cr:
        evs, traj = section_crossings(CLASSIC, [1.0, 1.0, 0.0], 500, IntegratorConfig(), record=True)
        cr.check("500 returns", len(evs) == 500, str(len(evs)))
        plane = max(abs(e.state[0] + CLASSIC.a * e.state[1]) for e in evs)
        cr.check("|x+ay|<=1e-9", plane <= 1e-9, f"max {plane:.1e}")
        cr.check("z>x/a", all(e.state[2] > e.state[0] / CLASSIC.a for e in evs))
        margin = min(abs(e.ydot_rate) / transversality_floor(e.state) for e in evs)
        cr.check("transverse", margin > 1, f"min rate/floor {margin:.1e}")
        zmin = float(traj.y[:, 2].min())
        cr.check("no trapping violation", trapping_violation(CLASSIC, traj) is None,
                 f"min z {zmin:.4f} vs -b-1e-6")
        cr.finish()


def test_criterion_05_geometry():
    with Criterion(5, 5.0) as cr:
        tc = tangency_curves(NOMINAL)
        fp = fixed_points(NOMINAL)
        cr.check("sigma(0)=P_In", np.allclose(tc.sigma(0.0), fp.p_in, atol=1e-12))
        x_out = NOMINAL.c - NOMINAL.a * NOMINAL.b
        cr.check("sigma(c-ab)=P_Out", np.allclose(tc.sigma(x_out), fp.p_out, atol=1e-12))
        xs = np.random.default_rng(0).uniform(-20, 20, 1000)
        F = vector_field(NOMINAL, tc.l_p(xs))
        want = NOMINAL.b * xs + xs**2 / NOMINAL.a - NOMINAL.c * xs / NOMINAL.a
        err = max(np.abs(F[:, :2]).max(), np.abs(F[:, 2] - want).max())
        cr.check("F(l_p(x)) identity", err <= 1e-10, f"max err {err:.1e} over 1000 x")
        pole = NOMINAL.a + NOMINAL.c
        sign = {"sigma1": -1, "sigma2": -1, "sigma3": 1, "sigma4": 1}
        ok = True
        for lo, hi in ((-30, -1e-3), (1e-3, x_out - 1e-3), (x_out + 1e-3, pole - 1e-3), (pole + 1e-3, 30)):
            for x in np.linspace(lo, hi, 200):
                ok &= np.sign(vector_field(NOMINAL, tc.sigma(x))[1]) == sign[sigma_subarc(NOMINAL, x)]
        cr.check("sign pattern on sigma1-4", ok, "y' < 0 on sigma1,2 and > 0 on sigma3,4")
        cr.finish()


def _cyclic_period(word):
    n = len(word)
    return next(d for d in range(1, n + 1) if n % d == 0 and word == word[d:] + word[:d])


def test_criterion_06_periodic_orbits(candidate):
    p, orbits, words, setup = candidate
    with Criterion(6, 300.0) as cr:
        (orb,) = find_periodic(CLASSIC, 1, recurrence_seeds(CLASSIC, 1))
        w = fixed_point_index(CLASSIC, orb).winding
        cr.check("classic period-1 residual", orb.residual <= 1e-9, f"{orb.residual:.1e}")
        cr.check("classic winding = linear oracle", w == linear_index(orb.jacobian) and abs(w) == 1,
                 f"winding {w:+d}, multipliers {np.round(orb.multipliers.real, 3).tolist()}")
        exemplars = {}
        for k in (1, 2, 3, 4):
            ok = [(o, wd) for o, wd in zip(orbits[k], words[k])
                  if o.residual <= 1e-9 and _cyclic_period(wd) == k]
            if ok:
                exemplars[k] = ok[0][1]
        cr.check("minimal periods 1-4", sorted(exemplars) == [1, 2, 3, 4],
                 f"words {exemplars}, counts {[len(orbits[k]) for k in (1, 2, 3, 4)]}")
        cr.check("distinct words", len(set(exemplars.values())) == len(exemplars))
        worst = max(o.residual for os in orbits.values() for o in os)
        cr.check("residuals<=1e-9", worst <= 1e-9, f"max {worst:.1e}")
        cr.finish(extra_time=setup)


def _clean_pair(p, orbit, radii=(1e-3, 5e-4, 2.5e-4, 1.25e-4, 6.25e-5)):
    """Windings at the largest clean radius and at half of it."""
    for r in radii:
        try:
            return r, (fixed_point_index(p, orbit, r).winding,
                       fixed_point_index(p, orbit, r / 2).winding)
        except LoopHitsDiscontinuity:
            continue
    return None, None


def test_criterion_07_fixed_point_index(candidate):
    p, orbits, words, _ = candidate
    with Criterion(7, 120.0) as cr:
        stable = True
        n, shrunk = 0, 0
        for os in orbits.values():
            for o in os:
                r, pair = _clean_pair(p, o)
                stable &= pair is not None and pair[0] == pair[1] == linear_index(o.jacobian)
                shrunk += r is not None and r < 1e-3
                n += 1
        cr.check("windings stable under halving", stable,
                 f"{n} orbits, {shrunk} needed a loop below 1e-3 to avoid a discontinuity")
        (one,) = orbits[1]
        disc = [loop_winding(p, one.uv[0], r, 1)[0] for r in (0.04, 0.02)]
        cr.check("D_s surrogate disc total +1", disc == [1, 1], f"word {words[1][0]!r} disc: {disc}")
        c1 = find_periodic(CLASSIC, 1, recurrence_seeds(CLASSIC, 1))[0].uv[0]
        c2 = find_periodic(CLASSIC, 2, recurrence_seeds(CLASSIC, 2))[0].uv[0]
        w1 = loop_winding(CLASSIC, c1, 0.01, 2)[0]
        w2 = loop_winding(CLASSIC, c2, 0.01, 2)[0]
        mid = 0.5 * (c1 + c2)
        w12 = loop_winding(CLASSIC, mid, 0.5 * np.linalg.norm(c1 - c2) + 0.02, 2)[0]
        cr.check("additivity", w12 == w1 + w2, f"{w12} = {w1} + {w2}")
        cr.finish()


def test_criterion_08_heteroclinic(search):
    res, cert, elapsed = search
    with Criterion(8, 600.0) as cr:
        monotone = all(b <= a for a, b in zip(res.best_trace, res.best_trace[1:]))
        cr.check("mismatch<1e-3", res.found,
                 f"{res.value:.1e} at a={res.params.a:.10f}, c={res.params.c:.10f}")
        cr.check("monotone accepted steps", monotone)
        if res.found:
            ok = isinstance(cert, TrefoilCertificate)
            cr.check("certificate", ok, "" if ok else "; ".join(cert.reasons))
            if ok:
                cr.check("crossing count 1", cert.crossing_count_on_section == 1)
                cr.check("transverse", cert.transverse)
                cr.check("Alexander t^2-t+1", cert.knot_poly == TREFOIL,
                         f"{cert.knot_poly} (closure {cert.closure['used']}, surrogate)")
        else:
            cr.check("refutation emitted", cert is not None)
        cr.finish(extra_time=elapsed)


def test_criterion_09_knot_pipeline():
    with Criterion(9, 30.0) as cr:
        produced = []
        rng = np.random.default_rng(2024)
        tre = knot_polynomial(trefoil_curve(), rng=rng)
        produced.append(tre)
        cr.check("trefoil", tre == TREFOIL, str(tre))
        fig = knot_polynomial(figure_eight_curve(), rng=rng)
        produced += [fig, alexander(FIGURE_EIGHT_CODE)]
        cr.check("figure-eight", fig == alexander(FIGURE_EIGHT_CODE) == AlexPoly((1, -3, 1)), str(fig))
        dirs = rng.normal(size=(20, 3))
        polys = [knot_polynomial(trefoil_curve(), d, rng=rng) for d in dirs]
        produced += polys
        cr.check("20-projection invariance", set(polys) == {TREFOIL})
        ids = {q: torus_knot_id(torus_alexander(2, q)) for q in (3, 5, 7)}
        produced += [torus_alexander(2, q) for q in (3, 5, 7)]
        cr.check("torus_knot_id", ids == {q: (2, q) for q in (3, 5, 7)}, str(ids))
        good = all(abs(x.at_one()) == 1 and x.is_symmetric() for x in produced)
        cr.check("Delta(1)=+-1 and palindromic", good, f"{len(produced)} polynomials")
        cr.finish()


def test_criterion_10_template(candidate):
    p, orbits, words, _ = candidate
    with Criterion(10, 60.0) as cr:
        ws = enumerate_words(6)
        at6 = [w for w in ws if len(w) == 6]
        cr.check("9 primitive necklaces at length 6", len(at6) == 9 == primitive_necklace_count(6))
        cr.check("14 necklaces at length 6", necklace_count(6) == 14)
        polys = {w: knot_polynomial(template_embed(w)) for w in ws}
        cr.check("'1','2' unknotted", polys["1"] == polys["2"] == UNKNOT)
        torus = {w: torus_knot_id(q) for w, q in polys.items() if q != UNKNOT}
        named = sorted({t for t in torus.values() if t})
        cr.check("nontrivial torus knot named", bool(named) and all(torus.values()), str(named))
        cr.check("all polynomials valid",
                 all(abs(q.at_one()) == 1 and q.is_symmetric() for q in polys.values()))
        matched, mism = 0, []
        for os, wds in zip(orbits.values(), words.values()):
            for o, w in zip(os, wds):
                if is_primitive(w):
                    flow = knot_polynomial(o.curve3d)
                    tmpl = knot_polynomial(template_embed(w))
                    matched += 1
                    if flow != tmpl:
                        mism.append(w)
        cr.check("flow orbit = template orbit", matched > 0 and not mism,
                 f"{matched} orbits compared, mismatches {mism}")
        cr.finish()
