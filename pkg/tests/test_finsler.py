import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from finsler_kahler import finsler as fs
from finsler_kahler import jetcalc as jc
from finsler_kahler.errors import DomainError, ParameterError, RegularityError
from finsler_kahler.verify import sample_points

import oracles

BUILTINS = {
    "euclidean": fs.euclidean(2),
    "polar": fs.polar(),
    "randers": fs.randers([0.5, 0.0]),
    "quartic": fs.quartic(2),
}

angle = st.floats(0.0, 2 * np.pi)
radius = st.floats(0.1, 10.0)
base = st.floats(0.5, 2.0)


def _point(r, phi, x1=1.0, x2=0.3):
    return fs.PhasePoint([x1, x2], [r * np.cos(phi), r * np.sin(phi)])


# phase points -----------------------------------------------------------------


def test_phase_point_rejects_null_section_and_non_finite():
    with pytest.raises(DomainError, match="y = 0"):
        fs.PhasePoint([0.0, 0.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        fs.PhasePoint([np.nan], [1.0])
    with pytest.raises(DomainError):
        fs.PhasePoint([0.0, 1.0], [1.0])


def test_phase_point_is_immutable():
    p = fs.PhasePoint([1.0], [2.0])
    with pytest.raises(ValueError):
        p.y[0] = 3.0


# metric tensor ---------------------------------------------------------------


def test_euclidean_metric_is_identity():
    g = fs.metric_tensor(fs.euclidean(3), fs.PhasePoint([1, 2, 3], [0.3, -2, 5])).g
    np.testing.assert_array_equal(g, np.eye(3))


def test_quartic_metric_example():
    g = fs.metric_tensor(BUILTINS["quartic"], fs.PhasePoint([0.0, 0.0], [1.0, 1.0])).g
    r2 = np.sqrt(2.0)
    np.testing.assert_allclose(g, [[r2, -r2 / 2], [-r2 / 2, r2]], rtol=1e-14)


def test_randers_metric_example():
    g = fs.metric_tensor(BUILTINS["randers"], fs.PhasePoint([0.0, 0.0], [1.0, 0.0])).g
    assert g[0, 0] == pytest.approx(2.25, rel=1e-15)


def test_polar_metric_is_its_riemannian_matrix():
    g = fs.metric_tensor(BUILTINS["polar"], fs.PhasePoint([1.5, 0.2], [0.3, -0.7])).g
    np.testing.assert_allclose(g, [[1.0, 0.0], [0.0, 2.25]], rtol=1e-15)


@given(r=radius, phi=angle, x1=base, x2=base)
def test_randers_metric_matches_sympy(r, phi, x1, x2):
    # x-dependent Randers metric, coded twice
    def F(x, y):
        alpha = jc.sqrt(y[0] ** 2 + (1.0 + x[0] ** 2) * y[1] ** 2)
        return alpha + 0.3 * jc.sin(x[1]) * y[0]

    xs, ys = oracles.coords(2)
    F2 = (sp.sqrt(ys[0] ** 2 + (1 + xs[0] ** 2) * ys[1] ** 2) + sp.Rational(3, 10) * sp.sin(xs[1]) * ys[0]) ** 2
    p = _point(r, phi, x1, x2)
    want = oracles.evaluate(oracles.metric(F2, ys), xs, ys, p.x, p.y)
    got = fs.metric_tensor(fs.custom(F, 2), p).g
    np.testing.assert_allclose(got, want, rtol=1e-11, atol=1e-12)


@pytest.mark.parametrize("name", sorted(BUILTINS))
@given(r=radius, phi=angle)
def test_metric_is_zero_homogeneous(name, r, phi):
    F = BUILTINS[name]
    p = _point(r, phi)
    g = fs.metric_tensor(F, p).g
    for lam in (0.5, 2.0, 10.0):
        np.testing.assert_allclose(fs.metric_tensor(F, p.scaled(lam)).g, g, atol=1e-9)
    assert np.array_equal(g, g.T)


def test_metric_domain_error_off_the_slit_bundle():
    F = fs.custom(lambda x, y: jc.sqrt(y[0] - 1.0), 1)
    with pytest.raises(DomainError):
        fs.metric_tensor(F, fs.PhasePoint([0.0], [0.5]))


# inverse, energy, lowering ----------------------------------------------------


def test_inverse_metric_examples():
    np.testing.assert_array_equal(fs.inverse_metric(fs.MetricTensor(np.eye(2))).g, np.eye(2))
    np.testing.assert_allclose(fs.inverse_metric(fs.MetricTensor(np.diag([1.0, 4.0]))).g, np.diag([1.0, 0.25]))
    g = fs.metric_tensor(BUILTINS["quartic"], fs.PhasePoint([0.0, 0.0], [1.0, 1.0]))
    gi = fs.inverse_metric(g)
    assert np.max(np.abs(g.g @ gi.g - np.eye(2))) < 1e-12 * np.linalg.cond(g.g)


@pytest.mark.parametrize("g", [[[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, -1.0]], [[1.0, 2.0], [2.0, 1.0]]])
def test_inverse_metric_rejects_non_definite(g):
    with pytest.raises(RegularityError):
        fs.inverse_metric(fs.MetricTensor(np.array(g)))


def test_energy_density_examples():
    assert fs.energy_density(fs.euclidean(2), fs.PhasePoint([0, 0], [3.0, 4.0])) == 12.5
    assert fs.energy_density(BUILTINS["randers"], fs.PhasePoint([0, 0], [1.0, 0.0])) == pytest.approx(1.125)


@pytest.mark.parametrize("name", sorted(BUILTINS))
@given(r=radius, phi=angle)
def test_energy_density_quadruples_under_doubling(name, r, phi):
    F = BUILTINS[name]
    p = _point(r, phi)
    assert fs.energy_density(F, p.scaled(2.0)) == pytest.approx(4.0 * fs.energy_density(F, p), rel=1e-13)


def test_lower_index_euclidean():
    p = fs.PhasePoint([0, 0], [3.0, 4.0])
    yl = fs.lower_index(fs.euclidean(2), p)
    np.testing.assert_allclose(yl, [3.0, 4.0])
    assert yl @ p.y == pytest.approx(25.0)


@pytest.mark.parametrize("name", sorted(BUILTINS))
@given(r=radius, phi=angle)
def test_lowering_identities(name, r, phi):
    F = BUILTINS[name]
    p = _point(r, phi)
    a = fs.lower_index(F, p, "metric")
    b = fs.lower_index(F, p, "gradient")
    scale = max(1.0, F.norm(p) ** 2)
    assert abs(a @ p.y - F.norm(p) ** 2) <= 1e-10 * scale
    np.testing.assert_allclose(a, b, atol=1e-10 * scale)
    # Euler relation for the 1-homogeneous F
    grad = jc.evaluate_jet(F.F, p, 1).grad[2:]
    assert grad @ p.y == pytest.approx(F.norm(p), rel=1e-10)


def test_lower_index_rejects_unknown_method():
    with pytest.raises(ValueError):
        fs.lower_index(fs.euclidean(2), fs.PhasePoint([0, 0], [1, 0]), "other")


# validation ------------------------------------------------------------------------


def test_validate_euclidean_passes(rng):
    F = fs.euclidean(2)
    rep = fs.validate_finsler(F, sample_points(F, 100, rng))
    assert rep.passed
    assert set(rep.as_dict()["conditions"]) == {"positivity", "homogeneity", "differentiability", "definiteness"}


def test_validate_pseudo_norm_fails(rng):
    F = fs.custom(lambda x, y: jc.sqrt(y[0] ** 2 - y[1] ** 2), 2, F2=lambda x, y: y[0] ** 2 - y[1] ** 2)
    rep = fs.validate_finsler(F, sample_points(F, 200, rng))
    assert not rep.conditions["positivity"].passed
    assert not rep.conditions["definiteness"].passed
    assert rep.conditions["definiteness"].example is not None


def test_randers_out_of_range_is_refused_then_detected(rng):
    with pytest.raises(ParameterError, match="< 1"):
        fs.randers([1.5, 0.0])
    F = fs.randers([1.5, 0.0], check=False)
    rep = fs.validate_finsler(F, sample_points(F, 200, rng))
    assert not rep.conditions["definiteness"].passed
    # an explicit failing direction: y opposite to b makes F negative
    bad = fs.PhasePoint([0.0, 0.0], [-1.0, 0.0])
    assert F.norm(bad) == pytest.approx(-0.5)
    assert not fs.validate_finsler(F, [bad]).passed


def test_validate_needs_samples():
    with pytest.raises(ValueError):
        fs.validate_finsler(fs.euclidean(2), [])


def test_validate_detects_broken_homogeneity(rng):
    F = fs.custom(lambda x, y: jc.sqrt(y[0] ** 2 + y[1] ** 2) + 0.1 * (y[0] ** 2), 2)
    rep = fs.validate_finsler(F, sample_points(F, 50, rng))
    assert not rep.conditions["homogeneity"].passed
