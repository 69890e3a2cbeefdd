from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import special_ortho_group

from rosslerlab.exceptions import NotSaddleFocus
from rosslerlab.flow import Params, fixed_points, jacobian
from rosslerlab.spectral import char_poly, check_assumptions, eigen3, saddle_report


def test_identity_has_triple_root():
    sp = eigen3(np.eye(3))
    assert not sp.is_complex_pair
    np.testing.assert_allclose(sp.real_roots, [1.0, 1.0, 1.0], atol=1e-12)


def test_p_in_spectrum_matches_reference_pair(nominal):
    sp = eigen3(jacobian(nominal, fixed_points(nominal).p_in))
    assert sp.is_complex_pair
    assert sp.rho == pytest.approx(0.202428, abs=1e-4)
    assert sp.omega == pytest.approx(0.970593, abs=1e-4)


def test_p_in_real_eigenvalue_from_trace(nominal):
    # gamma + 2 rho = trace = a - c fixes gamma once the pair is known
    sp = eigen3(jacobian(nominal, fixed_points(nominal).p_in))
    assert sp.gamma == pytest.approx((nominal.a - nominal.c) - 2 * sp.rho, abs=1e-12)
    assert sp.gamma == pytest.approx(-4.551856, abs=1e-6)


def test_p_out_spectrum_matches_reference(nominal):
    sp = eigen3(jacobian(nominal, fixed_points(nominal).p_out))
    assert sp.gamma == pytest.approx(0.413139, abs=1e-4)
    assert sp.rho == pytest.approx(-0.0427694, abs=1e-4)
    assert sp.omega == pytest.approx(3.29073, abs=1e-4)


def test_eigen3_agrees_with_numpy(rng):
    for _ in range(200):
        m = rng.normal(size=(3, 3)) * 3
        sp = eigen3(m)
        ours = np.sort_complex(sp.eigenvalues)
        ref = np.sort_complex(np.linalg.eigvals(m))
        if not sp.borderline:
            np.testing.assert_allclose(ours, ref, atol=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=9, max_size=9))
def test_trace_and_determinant_identities(entries):
    m = np.array(entries).reshape(3, 3)
    sp = eigen3(m)
    ev = sp.eigenvalues
    scale = 1.0 + np.abs(m).max()
    assert abs(ev.sum().real - np.trace(m)) <= 1e-9 * scale
    assert abs(np.prod(ev).real - np.linalg.det(m)) <= 1e-9 * scale**3
    p2, p1, p0 = char_poly(m)
    for lam in ev:
        assert abs(((lam + p2) * lam + p1) * lam + p0) <= 1e-8 * (1 + np.linalg.norm(m) ** 3)
    if sp.is_complex_pair:
        assert sp.omega > 0


def test_saddle_indices(nominal):
    rep = saddle_report(nominal)
    assert rep.nu_in == pytest.approx(0.04447, abs=1e-4)
    assert rep.nu_out == pytest.approx(0.10352, abs=1e-4)
    assert rep.shilnikov_in and rep.shilnikov_out


def test_saddle_report_orthogonal_invariance(nominal):
    J = jacobian(nominal, fixed_points(nominal).p_out)
    Q = special_ortho_group.rvs(3, random_state=3)
    a, b = eigen3(J), eigen3(Q @ J @ Q.T)
    assert b.gamma == pytest.approx(a.gamma, abs=1e-9)
    assert b.rho == pytest.approx(a.rho, abs=1e-9)
    assert b.omega == pytest.approx(a.omega, abs=1e-9)


def test_three_real_roots_is_not_saddle_focus():
    # a > 2 makes the (x, y) block, and with it the P_In spectrum, real
    p = Params(2.5, 0.3, 4.0)
    assert not eigen3(jacobian(p, fixed_points(p).p_in)).is_complex_pair
    with pytest.raises(NotSaddleFocus):
        saddle_report(p)


def test_assumptions_pass_at_nominal_point(nominal):
    st_ = check_assumptions(nominal)
    assert st_.a1 and st_.a2 and st_.a3 and st_.a4
    # the printed rho_Out > 0 reading would contradict the 2D stable manifold
    assert st_.a3_literal_text is False


def test_a1_fails_for_small_c():
    st_ = check_assumptions(Params(0.5, 0.5, 0.2))
    assert not st_.a1
    assert "c > 1" in st_.reasons["a1"]


def test_classic_point_reported(classic):
    st_ = check_assumptions(classic)
    assert st_.a1
    assert set(st_.reasons) == {"a1", "a2", "a3", "a4"}


def test_degenerate_point_fails_a2_without_raising():
    st_ = check_assumptions(Params(0.5, 0.4, 0.2))
    assert not st_.a2 and not st_.a3 and not st_.a4


def test_a4_equivalence(rng):
    for _ in range(50):
        p = Params(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95), rng.uniform(1.5, 8))
        st_ = check_assumptions(p)
        if st_.report is not None:
            assert st_.a4 == (min(st_.report.nu_in, st_.report.nu_out) < 1)
