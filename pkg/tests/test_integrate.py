import csv
import io

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from finsler_kahler import finsler as fs
from finsler_kahler import integrate as ig
from finsler_kahler import kahler as kh
from finsler_kahler.dynamics import lagrangian_standard
from finsler_kahler.errors import NullSectionError, StiffnessError
from finsler_kahler.verify import harmonic_hamiltonian, projectile_lagrangian, richardson_ratio

ONE = kh.ModelParams(1.0)
E1, E2 = fs.euclidean(1), fs.euclidean(2)
RK4 = ig.IntegratorConfig("rk4-fixed", step=0.01)


def _free_flow():
    return ig.lagrangian_flow(lagrangian_standard([1.0, 1.0], 0.0, None), E2, ONE)


def _plain_flow(rhs, n=1):
    return ig.Flow(n, rhs, lambda z: (0.0, float("nan")), fs.euclidean(n))


def test_free_particle_endpoint():
    tr = ig.integrate(_free_flow(), fs.PhasePoint([0.0, 0.0], [1.0, 0.0]), (0.0, 1.0), RK4)
    assert len(tr) == 101
    np.testing.assert_allclose(tr.x[-1], [1.0, 0.0], atol=1e-12)
    assert ig.conserved_quantity_drift(tr, lambda x, y: np.hypot(*y)) < 1e-12
    assert ig.conserved_quantity_drift(tr, lambda x, y: 3.0) == 0.0


@pytest.mark.parametrize("method", ig.METHODS)
def test_free_particle_is_a_straight_line(method):
    cfg = ig.IntegratorConfig(method, step=0.05)
    tr = ig.integrate(_free_flow(), fs.PhasePoint([0.5, -1.0], [0.3, 0.8]), (0.0, 2.0), cfg)
    np.testing.assert_allclose(tr.x, [0.5, -1.0] + np.outer(tr.t, [0.3, 0.8]), atol=1e-12)
    assert np.max(np.abs(tr.y - [0.3, 0.8])) <= 1e-15


def test_harmonic_energy_drift():
    flow = ig.hamiltonian_flow(harmonic_hamiltonian(1), E1, ONE)
    tr = ig.integrate(flow, fs.PhasePoint([0.0], [1.0]), (0.0, 10.0), ig.IntegratorConfig(tol=1e-10))
    assert tr.t[-1] == 10.0
    drift = ig.conserved_quantity_drift(tr, harmonic_hamiltonian(1))
    assert drift / 0.5 < 1e-8
    assert np.max(np.abs(tr.energy - 0.5)) < 1e-8


def _harmonic_reference(t, z):
    # xdot = |y| y, ydot = -|y| x for H = (x^2 + y^2)/2 with a = 1
    s = abs(z[1])
    return [s * z[1], -s * z[0]]


def _projectile_reference(t, z):
    # xdot = y, ydot = (0, g a / |y|) for the projectile in the plane
    return [z[2], z[3], 0.0, 9.8 / np.hypot(z[2], z[3])]


@pytest.mark.parametrize(
    "flow, z0, T, reference",
    [
        (ig.hamiltonian_flow(harmonic_hamiltonian(1), E1, ONE), [0.0, 1.0], 3.0, _harmonic_reference),
        (ig.lagrangian_flow(projectile_lagrangian(2), E2, ONE), [0.0, 0.0, 3.0, 4.0], 2.0, _projectile_reference),
    ],
    ids=["harmonic", "projectile"],
)
def test_adaptive_endpoint_matches_scipy(flow, z0, T, reference):
    p0 = fs.PhasePoint.from_z(np.array(z0))
    tr = ig.integrate(flow, p0, (0.0, T), ig.IntegratorConfig(tol=1e-11))
    ref = solve_ivp(reference, (0.0, T), z0, method="DOP853", rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(tr.z[-1], ref.y[:, -1], rtol=1e-8, atol=1e-8)


def test_rk4_richardson_ratio():
    flow = ig.lagrangian_flow(projectile_lagrangian(2), E2, ONE)
    ratio = richardson_ratio(flow, fs.PhasePoint([0.0, 0.0], [3.0, 4.0]), 1.0, 0.1)
    assert 12.0 <= ratio <= 20.0


def test_implicit_midpoint_is_second_order():
    flow = ig.hamiltonian_flow(harmonic_hamiltonian(1), E1, ONE)
    p0 = fs.PhasePoint([0.0], [1.0])
    exact = solve_ivp(_harmonic_reference, (0.0, 1.0), [0.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-13).y[:, -1]
    errs = [
        np.linalg.norm(ig.integrate(flow, p0, (0.0, 1.0), ig.IntegratorConfig("implicit-midpoint", step=h)).z[-1] - exact)
        for h in (0.02, 0.01)
    ]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)


def test_midpoint_reports_non_convergence():
    flow = _plain_flow(lambda z: np.array([z[1], z[1] ** 3]))
    with pytest.raises(StiffnessError) as info:
        ig.integrate(flow, fs.PhasePoint([0.0], [10.0]), (0.0, 1.0), ig.IntegratorConfig("implicit-midpoint", step=0.5))
    assert len(info.value.trajectory) == 1


def test_null_section_abort_keeps_the_partial_trajectory():
    flow = _plain_flow(lambda z: np.array([z[1], -1.0]))
    with pytest.raises(NullSectionError) as info:
        ig.integrate(flow, fs.PhasePoint([0.0], [1.0]), (0.0, 2.0), RK4)
    tr = info.value.trajectory
    assert tr.meta["aborted"] is True
    assert len(tr) == 100
    assert tr.t[-1] == pytest.approx(0.99)
    assert np.all(tr.norm_y > 0.0)


def test_null_section_crossing_inside_an_adaptive_step():
    flow = _plain_flow(lambda z: np.array([z[1], -1.0]))
    with pytest.raises(NullSectionError) as info:
        ig.integrate(flow, fs.PhasePoint([0.0], [1.0]), (0.0, 2.0))
    assert np.all(info.value.trajectory.y > 0.0)


def test_blow_up_is_a_stiffness_error():
    flow = _plain_flow(lambda z: np.array([z[1], z[1] ** 2]))
    with pytest.raises(StiffnessError) as info:
        ig.integrate(flow, fs.PhasePoint([0.0], [1.0]), (0.0, 2.0))
    assert info.value.trajectory.t[-1] < 1.0


def test_config_and_span_validation():
    with pytest.raises(ValueError):
        ig.IntegratorConfig("euler")
    with pytest.raises(ValueError):
        ig.IntegratorConfig(step=0.0)
    with pytest.raises(ValueError):
        ig.integrate(_free_flow(), fs.PhasePoint([0.0, 0.0], [1.0, 0.0]), (1.0, 1.0))
    with pytest.raises(ValueError):
        ig.integrate(_free_flow(), fs.PhasePoint([0.0, 0.0], [1.0, 0.0]), (0.0, 1.0), ig.IntegratorConfig("rk4-fixed", 1e-3, max_steps=10))


def test_lagrangian_diagnostics():
    flow = _free_flow()
    tr = ig.integrate(flow, fs.PhasePoint([0.0, 0.0], [1.0, 0.0]), (0.0, 0.1), RK4)
    # E_L = -||y||^3 - ||y||^2 / 2 and the family-2 residual norm is ||y||
    np.testing.assert_allclose(tr.energy, -1.5)
    np.testing.assert_allclose(tr.res_family2, 1.0)
    np.testing.assert_allclose(tr.norm_y, 1.0)
    assert tr.step_size[0] == 0.0 and tr.step_size[1] == pytest.approx(0.01)
    assert tr.meta["system"] == "lagrange" and tr.meta["method"] == "rk4-fixed"


def test_csv_layout_and_round_trip():
    flow = ig.hamiltonian_flow(harmonic_hamiltonian(2), E2, ONE)
    tr = ig.integrate(flow, fs.PhasePoint([0.1, 0.2], [1.0, -0.5]), (0.0, 0.3), ig.IntegratorConfig(tol=1e-9))
    text = tr.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["t", "x1", "x2", "y1", "y2", "norm_y", "energy", "res_family2", "step_size"]
    back = np.array(rows[1:], dtype=float)
    np.testing.assert_array_equal(back[:, 0], tr.t)
    np.testing.assert_array_equal(back[:, 1:5], tr.z)
    np.testing.assert_array_equal(back[:, 6], tr.energy)
    assert np.all(np.isnan(back[:, 7]))
    buf = io.StringIO()
    assert tr.to_csv(buf) is None
    assert buf.getvalue() == text
    assert [p.z.tolist() for p in tr.points()] == tr.z.tolist()
