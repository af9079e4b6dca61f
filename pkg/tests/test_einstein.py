import csv
import io
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from finsler_kahler import einstein as es
from finsler_kahler.errors import DomainError, ParameterError

import oracles

P = es.EinsteinParams


def test_worked_values():
    p = P(2.0, -1.0, 1.0)
    assert es.u_function(p) == pytest.approx(2.0 + math.sqrt(6.0), rel=1e-15)
    assert es.v_function(p) == pytest.approx((4.0 - math.sqrt(6.0)) / 2.0, rel=1e-15)
    assert es.integrability_defect(p) < 1e-12


@pytest.mark.parametrize("t", [0.0, 0.3, 7.0])
def test_flat_case(t):
    p = P(1.5, 0.0, t)
    assert es.u_function(p) == 3.0
    assert es.v_function(p) == 0.0
    assert es.integrability_defect(p) == 0.0


def test_time_zero():
    for c in (-2.0, 0.5, 3.0):
        p = P(2.0, c, 0.0)
        assert es.u_function(p) == 4.0
        assert es.v_function(p) == pytest.approx(-3.0 * c / 4.0, rel=1e-15)
        assert es.integrability_defect(p) < 1e-15


@pytest.mark.parametrize("t", [1e-6, 1e-8, 1e-12])
def test_small_time_limit(t):
    assert es.v_function(P(2.0, -1.0, t)) == pytest.approx(0.75, abs=1e-6)


@given(
    A=st.floats(0.2, 10.0),
    c=st.floats(-5.0, 5.0),
    t=st.floats(0.0, 20.0),
)
def test_values_match_high_precision_oracle(A, c, t):
    assume(A * A - 2.0 * c * t > 1e-3 * A * A)
    assume(t > 1e-6)
    p = P(A, c, t)
    u, v, rhs = oracles.einstein_mp(A, c, t)
    assert es.u_function(p) == pytest.approx(u, rel=1e-14)
    scale = max(1.0, abs(c) / A)
    assert abs(es.v_function(p) - v) <= 1e-12 * scale
    assert abs(es.integrability_rhs(p) - rhs) <= 1e-10 * scale
    assert es.integrability_defect(p) <= 1e-10 * scale


@given(A=st.floats(0.1, 10.0), c=st.floats(-5.0, -1e-3), t=st.floats(0.0, 100.0))
def test_negative_curvature_is_always_admissible(A, c, t):
    rep = es.domain_check(P(A, c, t))
    assert rep.ok and not rep.inconsistent
    assert es.v_function(P(A, c, t)) > 0.0


def test_grid_defect():
    rows = es.sweep([1.0, 2.0, 5.0], [-2.0, -1.0, -0.5], np.round(np.arange(1, 301) * 0.01, 2))
    assert len(rows) == 3 * 3 * 300
    assert max(r[5] for r in rows) < 1e-9
    assert all(r[6] for r in rows)


def test_domain_bound_conflict_is_flagged():
    rep = es.domain_check(P(2.0, 1.0, 3.0))
    assert rep.tube_ok and rep.tube_bound == 4.0
    assert rep.radicand == -2.0
    assert rep.inconsistent and not rep.ok
    assert rep.as_dict()["inconsistent"] is True
    with pytest.raises(DomainError, match="A\\^2/\\(2c\\)"):
        es.u_function(P(2.0, 1.0, 3.0))


def test_domain_report_positive_curvature_inside():
    rep = es.domain_check(P(2.0, 1.0, 1.0))
    assert rep.ok and not rep.inconsistent
    outside = es.domain_check(P(2.0, 1.0, 5.0))
    assert not outside.tube_ok and not outside.inconsistent and not outside.ok


def test_boundary_of_the_radicand():
    p = P(2.0, 1.0, 2.0)
    assert es.u_function(p) == 2.0
    with pytest.raises(DomainError):
        es.u_derivative(p)


def test_parameter_validation():
    with pytest.raises(ParameterError):
        P(0.0, 1.0, 1.0)
    with pytest.raises(ParameterError):
        P(1.0, 1.0, -0.1)


def test_sweep_csv_layout():
    rows = es.sweep([2.0], [-1.0, 1.0], [1.0, 3.0])
    text = es.sweep_csv(rows)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert list(parsed[0]) == ["A", "c", "t", "u", "v", "defect", "domain_ok"]
    assert len(parsed) == 4
    bad = parsed[3]
    assert (bad["c"], bad["t"], bad["u"], bad["domain_ok"]) == ("1.0", "3.0", "nan", "false")
    assert float(parsed[0]["u"]) == 2.0 + math.sqrt(6.0)
    buf = io.StringIO()
    assert es.sweep_csv(rows, buf) is None and buf.getvalue() == text
