import math

import numpy as np
import pytest

from sepspec import analysis
from sepspec.quantization import SemiclassicalParams

MU = 1.5 * math.pi


def test_linear_fit_exact():
    s, c, r2 = analysis.linear_fit([0, 1, 2, 3], [1, 3, 5, 7])
    assert (s, c, r2) == pytest.approx((2.0, 1.0, 1.0))


def test_monotone_match_picks_best_offset():
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([0.0, 1.01, 2.01, 3.01, 9.0])
    x, y, d = analysis.monotone_match(a, b)
    assert d == 1 and np.allclose(y - x, 0.01)
    x, y, d = analysis.monotone_match(b, a)
    assert d == 1 and np.allclose(x - y, 0.01)
    assert analysis.monotone_match([], [1.0])[0].size == 0


def test_alternation_and_smoothed_minimum():
    doublets = np.sort(np.concatenate([np.arange(10.0), np.arange(10.0) + 1e-6]))
    assert analysis.alternation_ratio(doublets, 5.0) < 1e-5
    regular = np.arange(20.0)
    assert analysis.alternation_ratio(regular, 5.0) == pytest.approx(1.0)
    ev = np.cumsum(np.abs(np.linspace(-1, 1, 41)) + 0.1)
    loc, val = analysis.smoothed_minimum(ev)
    assert loc == pytest.approx(ev[20], abs=ev[21] - ev[19])
    with pytest.raises(analysis.InsufficientLevels):
        analysis.alternation_ratio([0.0, 1.0, 2.0], 1.0)


def test_find_zeros_simple_and_touching():
    z = analysis.find_zeros(np.sin, np.linspace(0.5, 10.0, 57))
    assert [m for _, m in z] == [1, 1, 1]
    assert np.allclose([x for x, _ in z], [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-9)
    touch = analysis.find_zeros(lambda x: (x - 0.3) ** 2, np.linspace(0.0, 1.0, 11))
    assert len(touch) == 1 and touch[0][1] == 2 and touch[0][0] == pytest.approx(0.3, abs=1e-5)


def test_gap_interval(quartic):
    lo, hi = analysis.gap_interval(quartic, 0.5)
    w = math.sqrt(2.0)
    assert (lo, hi) == pytest.approx((math.pi * w, 6 * math.pi * w))


def test_count_brackets_reference_values(quartic):
    lo, hi = analysis.count_brackets(quartic, 1e-4, 0.5, delta=0.0)
    assert (lo, hi) == (103, 209)


def test_calibration_and_compare(quartic):
    cal = analysis.calibrate(quartic, 1e-2)
    assert cal.matching_rms < 1e-4 < cal.uncalibrated_rms
    assert 0.0 <= cal.mu_plus < 2 * math.pi and cal.mu_plus == cal.mu_minus
    params = SemiclassicalParams(1e-2).with_mu(cal.mu_plus, cal.mu_minus)
    rep = analysis.compare(quartic, 1e-2, params)
    assert rep.count_mismatch <= 1
    assert rep.rms_diff < 0.25 * rep.gap_stats["median_gap"]
    assert list(rep.rows())[0] == ("semiclassical", "oracle", "difference")


def test_dual_sweep_small(quartic):
    params = SemiclassicalParams(1e-2, mu_plus=MU, mu_minus=MU)
    sw = analysis.dual_sweep(quartic, params, points=200)
    assert sw.matched and sw.max_unitarity_defect < 1e-11


def test_regular_limit_and_implied_maslov(quartic):
    p = SemiclassicalParams(1e-2, mu_plus=MU, mu_minus=MU)
    assert analysis.implied_maslov(p, "top") == pytest.approx(0.5)
    assert analysis.implied_maslov(p, "bottom") == pytest.approx((0.5, 0.5))
    r = analysis.regular_limit(quartic, p, "top", (0.2, 0.4))
    assert r.max_normalized < 0.1 and r.singular_count == r.regular_count
    with pytest.raises(ValueError):
        analysis.regular_limit(quartic, p, "middle", (0.2, 0.4))


def test_scaling_fits_expose_residuals(quartic):
    p = SemiclassicalParams(1e-2, mu_plus=MU, mu_minus=MU)
    fit = analysis.gap_scaling(quartic, p, [1e-2, 5e-3, 2e-3])
    assert fit.residuals.shape == (3,)
    assert len(list(fit.rows())) == 4
    cnt = analysis.count_scaling(quartic, p, [1e-2, 5e-3, 2e-3])
    assert all(cnt.extras["within_brackets"])
