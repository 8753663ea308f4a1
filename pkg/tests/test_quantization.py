import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepspec import quantization as q

MU = 1.5 * math.pi


@pytest.fixture(scope="module")
def params():
    return q.SemiclassicalParams(1e-2, mu_plus=MU, mu_minus=MU)


def test_params_validation():
    with pytest.raises(ValueError):
        q.SemiclassicalParams(0.0)
    with pytest.raises(ValueError):
        q.SemiclassicalParams(1e-2, alpha=1.0)
    with pytest.warns(UserWarning):
        q.SemiclassicalParams(0.2)
    p = q.SemiclassicalParams(1e-4)
    assert p.window == pytest.approx(1e-2)
    assert p.with_mu(1.0).mu_minus == 1.0
    assert p.with_h(1e-3).h == 1e-3


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(-30, 30))
def test_half_gap_matches_arccos(g, y):
    w = q.half_gap(g, y)
    assert 0.0 < w < math.pi
    # high-precision reference: the float arccos form loses everything near w = 0
    with mpmath.workdps(60):
        ref = float(mpmath.acos(mpmath.cos(g) / mpmath.sqrt(1 + mpmath.exp(2 * mpmath.pi * y))))
    assert w == pytest.approx(ref, rel=1e-9, abs=1e-15)


def test_half_gap_extremes():
    # the true value e^{-400 pi} underflows to 0
    assert q.half_gap(0.0, -400.0) == 0.0
    assert q.half_gap(0.0, -50.0) > 0.0
    assert q.half_gap(0.0, 400.0) == pytest.approx(math.pi / 2)


def test_phase_data_consistency(quartic, params):
    d = q.phase_data(0.03, quartic, params)
    assert d.a_plus == pytest.approx(d.a_minus)
    assert d.eps == pytest.approx(0.03 / math.sqrt(2.0))
    assert np.isfinite(d.f) and np.isfinite(d.g)


def test_window_roots_solve_condition(quartic, params):
    win = q.enumerate_window(quartic, params)
    assert len(win.family_a) > 5 and len(win.family_b) > 5
    for r in win.merged:
        assert abs(r.residual) < 1e-10
        assert abs(q.cdvp_residual(r.energy, quartic, params)) < 1e-10
        assert r.lam_lo <= r.lam <= r.lam_hi
        assert abs(r.energy) <= params.window
    assert np.all(np.diff(win.energies) >= 0)
    rows = list(win.rows())
    assert rows[0] == ("branch", "index", "lambda", "energy", "residual")


def test_families_follow_branch_equations(quartic, params):
    win = q.enumerate_window(quartic, params)
    for r in win.family_a[:5]:
        assert q.y_of_lambda(r.lam, quartic, params) == pytest.approx(2 * math.pi * r.index, abs=1e-9)
    for r in win.family_b[:5]:
        assert q.z_of_lambda(r.lam, quartic, params) == pytest.approx(2 * math.pi * r.index, abs=1e-9)


@pytest.mark.parametrize("h", [1e-2, 1e-3])
def test_interleaving(quartic, asymmetric, h):
    for V in (quartic, asymmetric):
        win = q.enumerate_window(V, q.SemiclassicalParams(h, mu_plus=MU, mu_minus=MU))
        rep = q.check_interleaving(win)
        assert rep.violations == [] and rep.collisions == []
        assert win.anomalies == []
        assert rep.shared_indices > 0


def test_transfer_matrices_are_unitary(quartic, params):
    for y in (-30.0, -1.0, 0.0, 0.4, 30.0):
        assert q.transfer_q(y, params.h).unitarity_defect() < 1e-14
    for E in np.linspace(-0.09, 0.09, 13):
        t = q.transfer_t(q.phase_data(E, quartic, params), params)
        assert t.unitarity_defect() < 1e-12


def test_det_condition_tracks_residual(quartic, params):
    for E in np.linspace(-0.08, 0.08, 9):
        res = q.cdvp_residual(E, quartic, params)
        assert q.det_condition(E, quartic, params) == pytest.approx(2 * abs(res), rel=1e-9, abs=1e-13)
        val, _ = q.signed_det(E, quartic, params)
        assert abs(val) == pytest.approx(2 * abs(res), rel=1e-9, abs=1e-13)


def test_regular_rules(quartic):
    top = q.regular_bs_top(quartic, 1e-2, (0.2, 0.4))
    right, left = q.regular_bs_bottom(quartic, 1e-2, (-0.249, -0.1))
    assert len(top) > 3 and right == pytest.approx(left)
    # ground level of a well with curvature 4 is close to v_min + h (omega = 2)
    assert right[0] == pytest.approx(-0.25 + 1e-2, abs=1e-3)
    with pytest.raises(ValueError):
        q.regular_bs_top(quartic, 1e-2, (-0.1, 0.2))
    with pytest.raises(ValueError):
        q.regular_bs_bottom(quartic, 1e-2, (-0.2, 0.1))


def test_enumerate_energies_subrange(quartic, params):
    win = q.enumerate_energies(quartic, params, 0.01, 0.05)
    e = win.energies
    assert e.size > 0 and np.all((e >= 0.01) & (e <= 0.05))


def test_q_at_zero_and_modulus():
    t = q.transfer_q(0.0, 0.5)
    r = 1.0 / math.sqrt(2.0)
    assert np.allclose(t.entries, r * np.array([[1, 1j], [1j, 1]]), atol=1e-15)
    rng = np.random.default_rng(7)
    for y in rng.uniform(-5, 5, 20):
        e = q.transfer_q(y, 1e-3).e_factor
        assert abs(e) == pytest.approx(1.0 / math.sqrt(1.0 + math.exp(-2 * math.pi * y)), rel=1e-14)
