import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sepspec.potential import (
    ParseError,
    PotentialModel,
    format_potential,
    parse_potential,
    real_roots,
    recenter,
    validate_double_well,
)


def test_parse_basic():
    V = parse_potential("x^4 - x^2")
    assert V.coefficients == (0.0, 0.0, -1.0, 0.0, 1.0)
    assert V(0.5) == pytest.approx(0.0625 - 0.25)


def test_parse_forms():
    V = parse_potential(" 2.5*x^4 - 1e-1 x^3 -3x^2 + 0 ")
    assert V.coefficients == (0.0, 0.0, -3.0, -0.1, 2.5)
    assert parse_potential("-x^2 + x^4").coefficients == (0.0, 0.0, -1.0, 0.0, 1.0)
    assert parse_potential("x^4 - x^2 - x^2").coefficients[2] == -2.0


@pytest.mark.parametrize("text, col", [("x^4 - $x^2", 7), ("x^4 - x^2.5", 9), ("x^4 * - x", 5)])
def test_parse_errors_report_column(text, col):
    with pytest.raises(ParseError) as err:
        parse_potential(text)
    assert err.value.column == col


@pytest.mark.parametrize("text", ["x^2", "x^5 - x^2", "1"])
def test_parse_rejects_low_or_odd_degree(text):
    with pytest.raises(ParseError):
        parse_potential(text)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=4, max_size=4),
       st.floats(1e-3, 1e3))
def test_format_roundtrip_is_bit_exact(low, lead):
    V = PotentialModel(tuple(low) + (lead,))
    W = parse_potential(format_potential(V))
    assert W.coefficients == V.coefficients


def test_derivatives():
    V = parse_potential("x^6 - 2*x^4 + x^2 - x^2 - x^2")
    x = 0.7
    assert V.eval(x, 1) == pytest.approx(6 * x**5 - 8 * x**3 - 2 * x)
    assert V.eval(x, 2) == pytest.approx(30 * x**4 - 24 * x**2 - 2)
    assert V.eval(x, 3) == pytest.approx(120 * x**3 - 48 * x)
    with pytest.raises(ValueError):
        V.eval(x, 4)


def test_real_roots_exact_and_clustered():
    r = real_roots([0.0, 0.0, -1.0, 0.0, 1.0])
    assert r[0] == pytest.approx(-1.0) and r[2] == pytest.approx(1.0)
    assert abs(r[1]) < 1e-12
    r = real_roots([0.0, -2.0, 0.0, 4.0])
    assert r == pytest.approx([-math.sqrt(0.5), 0.0, math.sqrt(0.5)], abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=5, unique=True))
def test_real_roots_recover_product(roots):
    roots = sorted(roots)
    if np.min(np.diff(roots)) < 1e-3:
        return
    coeffs = np.polynomial.polynomial.polyfromroots(roots)
    found = real_roots(list(coeffs))
    assert np.allclose(found, roots, atol=1e-8)


def test_validate_quartic(quartic):
    rep = validate_double_well(quartic)
    assert rep.passed
    assert rep.barrier_curvature == pytest.approx(math.sqrt(2.0))
    assert [x for x, _ in rep.well_minima] == pytest.approx([-math.sqrt(0.5), math.sqrt(0.5)])
    assert rep.v_min == pytest.approx(-0.25)


@pytest.mark.parametrize("text, check", [
    ("x^4 + x^2", "curvature_at_origin"),
    ("x^4 - x^2 + 1", "value_at_origin"),
    ("x^4 - x^2 + x", "slope_at_origin"),
    ("-x^4 - x^2", "confinement"),
])
def test_validate_reports_violations(text, check):
    rep = validate_double_well(parse_potential(text))
    assert not rep.passed
    assert check in {v.check for v in rep.violations}


def test_recenter_asymmetric(asymmetric):
    rep = validate_double_well(asymmetric)
    assert rep.passed
    assert not asymmetric.is_even
    assert abs(asymmetric.coefficients[0]) < 1e-14 and abs(asymmetric.coefficients[1]) < 1e-12


def test_mirror_and_scale(quartic):
    W = parse_potential("x^4 - x^2 + 0.1*x^3")
    assert W.mirrored()(0.3) == pytest.approx(W(-0.3))
    assert quartic.scaled(2.0)(0.4) == pytest.approx(2 * quartic(0.4))
    assert quartic.is_even
