import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finsler_kahler import connection as cn
from finsler_kahler import finsler as fs
from finsler_kahler import kahler as kh
from finsler_kahler.errors import ParameterError, RegularityError

BUILTINS = [fs.euclidean(2), fs.polar(), fs.randers([0.5, 0.0]), fs.quartic(2)]
IDS = ["euclidean", "polar", "randers", "quartic"]

# the quartic norm degenerates on the coordinate axes, so stay off them
angle = st.builds(lambda k, t: k * np.pi / 2 + t, st.integers(0, 3), st.floats(0.05, np.pi / 2 - 0.05))
radius = st.floats(0.1, 10.0)
a_values = st.sampled_from([0.5, 1.0, 2.0])

E34 = fs.PhasePoint([1.0, 0.0], [3.0, 4.0])


def _point(r, phi):
    return fs.PhasePoint([1.3, 0.4], [r * np.cos(phi), r * np.sin(phi)])


def test_model_constant_must_be_positive():
    with pytest.raises(ParameterError, match="a > 0"):
        kh.ModelParams(-1.0)
    with pytest.raises(ParameterError):
        kh.ModelParams(0.0)
    with pytest.raises(ParameterError):
        kh.ModelParams(float("inf"))


# lifts -----------------------------------------------------------------------------


def test_sasaki_lift_examples():
    np.testing.assert_array_equal(kh.sasaki_lift(fs.euclidean(2), E34).matrix, np.eye(4))
    p = fs.PhasePoint([0.0, 0.0], [1.0, 1.0])
    G = kh.sasaki_lift(fs.quartic(2), p)
    g = fs.metric_tensor(fs.quartic(2), p).g
    np.testing.assert_array_equal(G.HH, g)
    np.testing.assert_array_equal(G.VV, g)
    assert not np.any(G.HV) and not np.any(G.VH)


def test_homogeneous_lift_example():
    G = kh.homogeneous_lift(fs.euclidean(2), E34, kh.ModelParams(1.0))
    np.testing.assert_array_equal(G.HH, np.eye(2))
    np.testing.assert_allclose(G.VV, np.eye(2) / 25.0, rtol=1e-15)


@pytest.mark.parametrize("F", BUILTINS, ids=IDS)
@given(r=radius, phi=angle)
def test_homogeneous_lift_at_a_equal_norm_is_sasaki(F, r, phi):
    p = _point(r, phi)
    G = kh.homogeneous_lift(F, p, kh.ModelParams(F.norm(p))).matrix
    assert np.array_equal(G, kh.sasaki_lift(F, p).matrix)


@pytest.mark.parametrize("F", BUILTINS, ids=IDS)
@given(r=radius, phi=angle, a=a_values)
def test_lifts_are_positive_definite(F, r, phi, a):
    p = _point(r, phi)
    np.linalg.cholesky(kh.sasaki_lift(F, p).matrix)
    np.linalg.cholesky(kh.homogeneous_lift(F, p, kh.ModelParams(a)).matrix)


# complex structures ------------------------------------------------------------------


def test_almost_complex_on_frame_vectors():
    J = kh.almost_complex(fs.euclidean(2), E34).matrix
    np.testing.assert_array_equal(J @ [1, 0, 0, 0], [0, 0, -1, 0])
    np.testing.assert_array_equal(J @ [0, 0, 0, 1], [0, 1, 0, 0])


def test_homogeneous_almost_complex_example():
    J = kh.homogeneous_almost_complex(fs.euclidean(2), E34, kh.ModelParams(1.0))
    np.testing.assert_allclose(J.HV, 0.2 * np.eye(2), rtol=1e-15)
    np.testing.assert_allclose(J.VH, -5.0 * np.eye(2), rtol=1e-15)
    same = kh.homogeneous_almost_complex(fs.euclidean(2), E34, kh.ModelParams(5.0))
    np.testing.assert_array_equal(same.matrix, kh.almost_complex(fs.euclidean(2), E34).matrix)


@pytest.mark.parametrize("F", BUILTINS, ids=IDS)
@given(r=radius, phi=angle, a=a_values)
def test_involution_and_hermitian(F, r, phi, a):
    p = _point(r, phi)
    m = kh.ModelParams(a)
    J = kh.homogeneous_almost_complex(F, p, m).matrix
    assert np.max(np.abs(J @ J + np.eye(4))) < 1e-12
    assert kh.hermitian_defect(F, p, m) < 1e-10
    assert kh.compatibility_defect(kh.sasaki_lift(F, p), kh.almost_complex(F, p)) < 1e-12


def test_hermitian_defect_euclidean_is_tiny():
    for y in ([1.0, 0.0], [3.0, 4.0], [-0.2, 0.05]):
        assert kh.hermitian_defect(fs.euclidean(2), fs.PhasePoint([0, 0], y), kh.ModelParams(1.0)) < 1e-12


def test_hermitian_defect_detects_corruption():
    F = fs.quartic(2)
    p = fs.PhasePoint([0, 0], [1.0, 1.0])
    m = kh.ModelParams(1.0)
    G = kh.homogeneous_lift(F, p, m).matrix.copy()
    G[2:, 2:] *= 1.01
    defect = kh.compatibility_defect(G, kh.homogeneous_almost_complex(F, p, m))
    # a 1% change of the vertical block shows up at 1% of the block scale
    assert 1e-3 < defect / np.max(np.abs(G)) < 1e-1


def test_dual_structures_act_on_forms():
    m = kh.ModelParams(1.0)
    D = kh.dual_homogeneous_almost_complex(fs.euclidean(2), E34, m).matrix
    # dx^1 -> -(||y||/a) delta y^1, delta y^1 -> (a/||y||) dx^1
    np.testing.assert_allclose(D @ [1, 0, 0, 0], [0, 0, -5.0, 0])
    np.testing.assert_allclose(D @ [0, 0, 1, 0], [0.2, 0, 0, 0])
    J = kh.almost_complex(fs.euclidean(2), E34).matrix
    np.testing.assert_array_equal(kh.dual_almost_complex(fs.euclidean(2), E34).matrix, np.linalg.inv(J).T)


# symplectic and one-forms -----------------------------------------------------------


def test_theta_euclidean_is_canonical():
    T = kh.symplectic_form_theta(fs.euclidean(2), E34).matrix
    I, Z = np.eye(2), np.zeros((2, 2))
    np.testing.assert_array_equal(T, np.block([[Z, -I], [I, Z]]))


@pytest.mark.parametrize("F", BUILTINS, ids=IDS)
@given(r=radius, phi=angle)
def test_theta_properties(F, r, phi):
    p = _point(r, phi)
    T = kh.symplectic_form_theta(F, p).matrix
    assert np.array_equal(T, -T.T)
    dg = np.linalg.det(fs.metric_tensor(F, p).g)
    assert np.linalg.det(T) == pytest.approx(dg**2, rel=1e-9)
    # theta(U, W) = G(F U, W) for the Sasaki pair
    G = kh.sasaki_lift(F, p).matrix
    J = kh.almost_complex(F, p).matrix
    np.testing.assert_allclose(T, J.T @ G, atol=1e-14 * max(1.0, np.max(np.abs(G))))


def test_theta_degenerate_metric():
    F = fs.custom(lambda x, y: abs(y[0]), 2, F2=lambda x, y: y[0] * y[0])
    with pytest.raises(RegularityError):
        kh.symplectic_form_theta(F, fs.PhasePoint([0, 0], [1.0, 0.0]))


def test_liouville_one_form_example():
    omega, lam = kh.liouville_one_form(fs.euclidean(2), E34, kh.ModelParams(1.0))
    np.testing.assert_allclose(omega.matrix, [1 / 25, 0.0, 3.0, 4.0], rtol=1e-15)
    np.testing.assert_allclose(lam.matrix, [0.6, 0.8, -0.2, 0.0], rtol=1e-15, atol=1e-17)


def test_liouville_one_form_at_origin_is_horizontal():
    _, lam = kh.liouville_one_form(fs.euclidean(2), fs.PhasePoint([0, 0], [3.0, 4.0]), kh.ModelParams(1.0))
    assert not np.any(lam.vertical)


def test_hamiltonian_two_form_examples():
    phi = kh.hamiltonian_two_form(fs.euclidean(2), E34, kh.ModelParams(1.0))
    np.testing.assert_allclose(phi.HV, 0.2 * np.eye(2), rtol=1e-15)
    np.testing.assert_allclose(phi.VH, -0.2 * np.eye(2), rtol=1e-15)
    unit = kh.hamiltonian_two_form(fs.euclidean(2), E34, kh.ModelParams(5.0))
    np.testing.assert_array_equal(unit.HV, np.eye(2))


def test_interior_product_convention():
    phi = kh.hamiltonian_two_form(fs.euclidean(2), E34, kh.ModelParams(5.0))
    # i_X (dx^1 ^ dy^1) with X = d/dy^1 gives -dx^1
    np.testing.assert_array_equal(kh.interior_product(np.array([0, 0, 1.0, 0]), phi).matrix, [-1, 0, 0, 0])


# adapted tensors ----------------------------------------------------------------------


def test_adapted_tensor_blocks_and_conversion():
    F = fs.polar()
    p = fs.PhasePoint([2.0, 0.0], [0.0, 1.0])
    G = kh.sasaki_lift(F, p)
    fr = cn.adapted_frame(F, p)
    Gc = G.to_coordinates(fr)
    np.testing.assert_allclose(Gc, fr.coframe.T @ G.matrix @ fr.coframe, atol=1e-15)
    assert G.as_dict()["kind"] == "metric"
    with pytest.raises(ValueError):
        kh.AdaptedTensor(np.eye(2), "spinor")
    v = kh.AdaptedTensor(np.array([1.0, 2.0, 3.0, 4.0]), "vector")
    np.testing.assert_array_equal(v.horizontal, [1.0, 2.0])
    np.testing.assert_array_equal(v.to_coordinates(fr), fr.frame @ v.matrix)
