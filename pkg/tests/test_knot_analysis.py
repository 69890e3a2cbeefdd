from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.exceptions import NotFittedError

from rosslerlab.exceptions import DegenerateDiagram, NonGenericProjection
from rosslerlab.knots import (
    FIGURE_EIGHT_CODE,
    AlexPoly,
    GaussCode,
    KnotTyper,
    alexander,
    canonical_word,
    enumerate_words,
    figure_eight_curve,
    gauss_code,
    generic_code,
    is_primitive,
    knot_polynomial,
    knot_report,
    necklace_count,
    primitive_necklace_count,
    reduce_code,
    template_embed,
    torus_alexander,
    torus_knot_id,
    trefoil_curve,
)

VIEW = (0.0123, 0.0456, 1.0)
UNKNOT = AlexPoly((1,))
TREFOIL = AlexPoly((1, -1, 1))


def _random_dirs(rng, n):
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def _check_poly(poly):
    assert abs(poly.at_one()) == 1
    assert poly.is_symmetric()


def test_circle_has_empty_code():
    t = np.linspace(0, 2 * np.pi, 200)
    circle = np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)])
    code = gauss_code(circle, VIEW)
    assert len(code) == 0 and alexander(code) == UNKNOT


def test_trefoil_code():
    code = gauss_code(trefoil_curve(), VIEW)
    code.validate()
    assert len(code) == 6 and code.n_crossings == 3
    assert len(set(code.signs().values())) == 1
    assert alexander(code) == TREFOIL


def test_segment_intersection_oracle():
    # brute-force count of crossing pairs in the projection
    curve = trefoil_curve(300)
    code = gauss_code(curve, VIEW)
    from rosslerlab.knots import _basis

    e1, e2, _ = _basis(VIEW)
    P = np.column_stack([curve[:-1] @ e1, curve[:-1] @ e2])
    n = len(P)
    hits = 0
    for i in range(n):
        a, b = P[i], P[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            c, d = P[j], P[(j + 1) % n]
            def orient(p, q, r):
                return np.sign((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
            if orient(a, b, c) != orient(a, b, d) and orient(c, d, a) != orient(c, d, b):
                hits += 1
    assert hits == code.n_crossings


def test_figure_eight():
    assert alexander(FIGURE_EIGHT_CODE) == AlexPoly((1, -3, 1))
    assert knot_polynomial(figure_eight_curve()) == AlexPoly((1, -3, 1))


@pytest.mark.parametrize("curve,want", [
    (trefoil_curve(), TREFOIL), (figure_eight_curve(), AlexPoly((1, -3, 1))),
])
def test_projection_invariance(rng, curve, want):
    polys = {knot_polynomial(curve, d, rng=rng) for d in _random_dirs(rng, 20)}
    assert polys == {want}


def test_mirror_invariance():
    curve = trefoil_curve()
    mirror = curve * np.array([1.0, 1.0, -1.0])
    a, b = gauss_code(curve, VIEW), gauss_code(mirror, VIEW)
    assert set(a.signs().values()) == {-s for s in b.signs().values()}
    assert alexander(a) == alexander(b)


def test_nongeneric_projection_is_detected():
    with pytest.raises(NonGenericProjection):
        gauss_code(trefoil_curve(), (0.0, 0.0, 1.0))
    code, used = generic_code(trefoil_curve(), (0.0, 0.0, 1.0), rng=np.random.default_rng(1))
    assert alexander(code) == TREFOIL and not np.allclose(used, [0.0, 0.0, 1.0])


def test_degenerate_diagram():
    with pytest.raises(DegenerateDiagram):
        alexander(GaussCode(((0, True, 1), (0, True, 1))))
    with pytest.raises(DegenerateDiagram):
        alexander(GaussCode(((0, True, 1),)))


def test_reduce_code_removes_kink():
    code = GaussCode(((0, True, 1), (0, False, 1)))
    assert len(reduce_code(code)) == 0


@pytest.mark.parametrize("p,q", [(2, 3), (2, 5), (2, 7), (3, 4), (3, 5)])
def test_torus_knot_id(p, q):
    assert torus_knot_id(torus_alexander(p, q)) == (p, q)


def test_torus_knot_id_unknot():
    assert torus_knot_id(UNKNOT) is None
    assert torus_alexander(2, 5) == AlexPoly((1, -1, 1, -1, 1))


def test_word_enumeration():
    assert enumerate_words(2) == ["1", "2", "12"]
    assert enumerate_words(3) == ["1", "2", "12", "112", "122"]
    for n in range(1, 9):
        assert len(enumerate_words(n, n)) == primitive_necklace_count(n)
    assert primitive_necklace_count(6) == (2**6 - 2**3 - 2**2 + 2) // 6 == 9
    assert necklace_count(6) == 14
    assert len(enumerate_words(4, 2)) == 6
    with pytest.raises(ValueError):
        enumerate_words(0)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="12", min_size=1, max_size=10))
def test_canonical_word(w):
    c = canonical_word(w)
    assert c in (w + w) and c == canonical_word(c)
    assert is_primitive(w) == is_primitive(c)


def test_template_pipeline(rng):
    seen = {}
    for w in enumerate_words(6):
        curve = template_embed(w)
        assert np.linalg.norm(curve[0] - curve[-1]) < 1e-12
        polys = {knot_polynomial(curve, d, rng=rng) for d in _random_dirs(rng, 3)}
        assert len(polys) == 1
        seen[w] = polys.pop()
        _check_poly(seen[w])
    assert seen["1"] == seen["2"] == UNKNOT
    assert torus_knot_id(seen["1222"]) == (2, 3)
    assert torus_knot_id(seen["12122"]) == (2, 5)
    assert torus_knot_id(seen["121222"]) == (3, 5)


def test_template_rejects_powers():
    with pytest.raises(ValueError):
        template_embed("1212")
    with pytest.raises(ValueError):
        canonical_word("13")


def test_report_and_estimator():
    rep = knot_report("trefoil", trefoil_curve())
    assert rep["alexander"] == [1, -1, 1] and list(rep["torus"]) == [2, 3]
    est = KnotTyper()
    with pytest.raises(NotFittedError):
        est.predict([trefoil_curve()])
    assert est.fit().predict([trefoil_curve(), figure_eight_curve()]) == [
        TREFOIL, AlexPoly((1, -3, 1))]
    with pytest.raises(ValueError):
        KnotTyper(projection=(0, 0, 0)).fit()


def test_flow_orbits_match_template(trefoil_orbits, trefoil_partition):
    from rosslerlab.periodic import attach_word

    compared = 0
    for orbs in trefoil_orbits.values():
        for o in orbs:
            w = attach_word(o, trefoil_partition)
            poly = knot_polynomial(o.curve3d)
            _check_poly(poly)
            if is_primitive(w):
                assert poly == knot_polynomial(template_embed(w))
                compared += 1
    assert compared >= 4
