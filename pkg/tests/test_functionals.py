import json
import math

import pytest

from fqshape import families
from fqshape.domain import measure
from fqshape.functionals import (disc_value, evaluate, f_half_bound, f_q_bound, lipschitz_f_q_bound,
                                 verify_auxiliary, verify_F_half_bounds, verify_isoperimetric, verify_polya,
                                 verify_saint_venant)
from fqshape.reports import compare, dumps, round_floats
from fqshape.torsion import annulus_oracle, rectangle_oracle

DISC_T = math.pi / 8


@pytest.fixture(scope="module")
def disc_m():
    return measure(families.disc())


def test_disc_values():
    assert disc_value(0.5) == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
    assert disc_value(0.45) == pytest.approx(0.83080, abs=1e-5)
    assert disc_value(0.4) == pytest.approx(0.97613, abs=1e-5)


def test_evaluate_disc(disc_m):
    fv = evaluate(disc_m, DISC_T, 0.5)
    # the 512-gon is slightly smaller than the circle
    assert fv.F_q == pytest.approx(math.sqrt(2) / 2, rel=1e-4)
    assert fv.F_qk_lower == fv.F_qk_upper == pytest.approx(fv.F_q)


def test_evaluate_square_and_long_rectangle():
    fv = evaluate(measure(families.square()), rectangle_oracle(1, 1), 0.5)
    assert fv.F_q == pytest.approx(4 * math.sqrt(0.0351442), rel=1e-5)
    T = rectangle_oracle(100, 1)
    fv = evaluate(measure(families.rectangle(100, 1)), T, 0.5)
    assert fv.F_q == pytest.approx(202 * math.sqrt(T) / 1000, rel=1e-12)
    assert fv.F_q == pytest.approx(3 ** -0.5, rel=0.01)


@pytest.mark.parametrize("kwargs", [dict(q=0), dict(q=0.6), dict(T=0), dict(k=-1)])
def test_evaluate_rejects(disc_m, kwargs):
    args = dict(m=disc_m, T=DISC_T, q=0.5, k=0) | kwargs
    with pytest.raises(ValueError):
        evaluate(**args)


def test_relaxed_interval_with_slits():
    m = measure(families.radial_slit_disc(0.9))
    fv = evaluate(m, 0.35, 0.5, 1)
    assert fv.F_q < fv.F_qk_lower < fv.F_qk_upper
    assert fv.F_qk_upper / fv.F_q == pytest.approx((m.perimeter + 1.8) / m.perimeter, rel=1e-9)


@pytest.mark.parametrize("t", [0.1, 3.0, 17.0])
def test_scale_invariance(t):
    base = families.k_hole_disc(3)
    T = 0.2
    a = evaluate(measure(base), T, 0.37, 3)
    b = evaluate(measure(base.scaled(t)), T * t ** 4, 0.37, 3)
    assert b.F_q == pytest.approx(a.F_q, rel=1e-9)
    assert b.F_qk_upper == pytest.approx(a.F_qk_upper, rel=1e-9)


def test_isoperimetric(disc_m):
    r = verify_isoperimetric(disc_m)
    assert r.passed and r.equality
    r = verify_isoperimetric(measure(families.square()))
    assert r.passed and not r.equality
    assert r.lhs == pytest.approx(4)


def test_saint_venant():
    m = measure(families.annulus(0.5, 1.0))
    r = verify_saint_venant(m, annulus_oracle(0.5, 1.0))
    assert r.lhs == pytest.approx(0.00891, abs=1e-5)
    assert r.passed and not r.equality
    r = verify_saint_venant(measure(families.disc()), DISC_T)
    assert r.passed and r.equality
    assert not verify_saint_venant(m, 0.3 * m.area ** 2).passed


def test_polya_square():
    m = measure(families.square())
    for k in (0, 1):
        slit, boundary = verify_polya(m, rectangle_oracle(1, 1), 0.5, k)
        assert slit.rhs == pytest.approx(1 / 48)
        assert boundary.rhs == pytest.approx(1 / 48)
        assert slit.passed and boundary.passed


def test_polya_hole_term_loosens():
    m = measure(families.k_hole_disc(3))
    one = verify_polya(m, 0.1, 0.2, 1)[0]
    three = verify_polya(m, 0.1, 0.2, 3)[0]
    D1, D3 = (1 / math.sqrt(3 * r.rhs) for r in (one, three))
    assert D3 - D1 == pytest.approx(2 * math.pi * 2 * 0.2)


def test_f_half_bounds(disc_m):
    assert f_half_bound(disc_m, 0) == pytest.approx(3 ** -0.5, rel=1e-12)
    assert f_half_bound(disc_m, 1) == f_half_bound(disc_m, 0)
    assert f_half_bound(disc_m, 3) == pytest.approx(3 ** -0.5 / 3, rel=1e-12)
    assert f_q_bound(disc_m, 0.25, 3) == pytest.approx(0.43091, abs=1e-5)
    assert lipschitz_f_q_bound(0.45, 1) == pytest.approx(0.678346, abs=1e-6)
    assert lipschitz_f_q_bound(0.25, 3) == pytest.approx(f_q_bound(disc_m, 0.25, 3), rel=1e-12)


def test_f_half_bound_with_slit():
    # slits raise H^1 above P and so weaken the bound
    m = measure(families.radial_slit_disc(0.9))
    assert f_half_bound(m, 0) == pytest.approx(m.perimeter / (math.sqrt(3) * (m.perimeter + 1.8)), rel=1e-9)


def test_verify_F_half_reports(disc_m):
    fv = evaluate(disc_m, DISC_T, 0.45)
    reports = verify_F_half_bounds(fv, 0)
    assert [r.name for r in reports] == ["f_half_lower", "f_q_lower"]
    assert all(r.passed for r in reports)
    assert len(verify_F_half_bounds(evaluate(disc_m, DISC_T, 0.5), 0)) == 1


def test_auxiliary_examples(disc_m):
    bonn, inr = verify_auxiliary(disc_m, 1.0, 0)
    assert bonn.passed and inr.passed
    assert bonn.rhs == pytest.approx(math.pi, rel=1e-4)
    m = measure(families.rectangle(100, 1))
    bonn, inr = verify_auxiliary(m, 0.5, 1)
    assert (bonn.lhs, bonn.rhs) == pytest.approx((100, 101))
    assert bonn.passed and inr.passed
    assert not verify_auxiliary(m, 40.0, 0)[1].passed


def test_compare_orientation_and_errors():
    r = compare("x", "x", 1.0, "<=", 2.0, 0.0)
    assert r.margin == 1.0 and r.passed
    r = compare("x", "x", 1.0, ">=", 2.0, 0.5)
    assert r.margin == -1.0 and not r.passed
    assert compare("x", "x", 1.0, ">=", 1.4, 0.5).passed
    with pytest.raises(ValueError):
        compare("x", "x", 1.0, "<", 2.0, 0.0)


def test_report_json_non_finite():
    r = compare("x", "x", math.inf, ">=", 1.0, 0.0)
    data = r.to_json()
    assert data["lhs"] is None and data["margin"] is None
    json.dumps(data, allow_nan=False)


def test_dumps_rounding_and_order():
    import numpy as np

    text = dumps({"b": np.float64(1 / 3), "a": [math.nan, 2, True]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [None, 2, True], "b": 0.333333333333}
    assert round_floats(1.23456789012345) == 1.23456789012
