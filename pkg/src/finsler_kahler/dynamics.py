"""Lagrangian and Hamiltonian objects on the homogeneous almost Kahler model.

Notation used below, all evaluated at a phase point ``p = (x, y)``:

* ``s = ||y|| / a`` with ``||y|| = F(x, y)``;
* ``delta_j f = df/dx^j - N^k_j df/dy^k`` (horizontal derivative);
* ``D_i = delta_i L``.

Two sets of fiber velocities appear.  ``ydot`` is the coordinate time
derivative of ``y`` along a curve.  ``Y`` is the vertical component of the
semispray in the adapted frame; the two are related by ``Y = ydot + N y``
and coincide when the connection vanishes.

The Euler-Lagrange system is taken as printed::

    s d/dt(dL/dy^i) + D_i = 0           (family 1, drives the flow)
    (1/s) d/dt(D_i) - dL/dy^i = 0       (family 2, reported only)
"""

from dataclasses import dataclass

import numpy as np

from . import jetcalc as jc
from .connection import connection_jets, nonlinear_connection
from .errors import DegenerateLagrangianError, ParameterError
from .finsler import PhasePoint, _frozen
from .kahler import AdaptedTensor, homogeneous_almost_complex

__all__ = [
    "LagrangianSpec",
    "HamiltonianSpec",
    "SemisprayState",
    "lagrangian_standard",
    "vertical_differential",
    "kahler_form_lagrangian",
    "liouville_vector_field",
    "energy_function",
    "energy_differential",
    "el_rhs",
    "el_residual",
    "lagrangian_identity_residual",
    "hamilton_rhs",
    "HAMILTON_MODES",
]

HAMILTON_MODES = ("plain", "connection-corrected")


@dataclass(frozen=True)
class LagrangianSpec:
    """A Lagrangian ``L(x, y)``; the structured fields are informational."""

    L: object
    masses: tuple = None
    gravity: float = None
    height: object = None
    potential_mass: float = None
    name: str = "custom"

    def __call__(self, x, y):
        return self.L(x, y)


@dataclass(frozen=True)
class HamiltonianSpec:
    H: object
    name: str = "custom"

    def __call__(self, x, y):
        return self.H(x, y)


def lagrangian_standard(masses, gravity, height, potential_mass=None):
    """``L = 1/2 sum m_i (y^i)^2 - m g h(x)``.

    ``m`` defaults to the mean of the ``m_i``, i.e. the common mass when all
    components carry the same inertia.  ``height`` is a field of ``x`` alone.
    """
    masses = tuple(float(mi) for mi in np.atleast_1d(masses))
    if not all(mi > 0.0 for mi in masses):
        raise ParameterError(f"masses must be positive, got {masses}")
    m = float(np.mean(masses)) if potential_mass is None else float(potential_mass)
    if m <= 0.0:
        raise ParameterError(f"potential mass must be positive, got {m}")
    g = float(gravity)
    n = len(masses)

    def L(x, y):
        kinetic = 0.0
        for i in range(n):
            kinetic = kinetic + 0.5 * masses[i] * y[i] * y[i]
        if g == 0.0:
            return kinetic
        return kinetic - m * g * height(x)

    return LagrangianSpec(L, masses, g, height, m, "standard")


@dataclass(frozen=True)
class SemisprayState:
    """Semispray ``xi = y^i delta/delta x^i + Y^i d/dy^i`` at ``p``."""

    p: PhasePoint
    Y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Y", _frozen(self.Y))

    @property
    def X(self):
        return self.p.y

    @property
    def components(self):
        return np.concatenate([self.X, self.Y])

    @classmethod
    def from_acceleration(cls, F, p, ydot, N=None):
        if N is None:
            N = nonlinear_connection(F, p).N
        return cls(p, np.asarray(ydot, dtype=float) + N @ p.y)


@dataclass
class _LocalData:
    """Derivatives of ``L`` and the connection needed by the assembled forms."""

    n: int
    s: float  # ||y|| / a
    L: float
    Lx: np.ndarray
    Ly: np.ndarray
    Lxy: np.ndarray  # [j, i] = d^2 L / dx^j dy^i
    M: np.ndarray  # fiber Hessian
    N: np.ndarray
    D: np.ndarray  # delta_i L
    dD: np.ndarray = None  # [i, a] = d(delta_i L)/dz^a

    @property
    def hdLy(self):
        """``[j, i] = delta_j (dL/dy^i)``."""
        return self.Lxy - self.N.T @ self.M

    @property
    def hdD(self):
        """``[j, i] = delta_j delta_i L``."""
        n = self.n
        return (self.dD[:, :n] - self.dD[:, n:] @ self.N).T

    @property
    def vdD(self):
        """``[j, i] = d(delta_i L)/dy^j``."""
        return self.dD[:, self.n :].T


def _local_data(L, F, p, m, connection_derivatives=False):
    n = p.n
    s = F.norm(p) / m.a
    if connection_derivatives:
        Lj = jc.evaluate_taylor(L, p, 2)
        Nj = connection_jets(F, p, 1)
        N = np.array([[Nj[i][j].value for j in range(n)] for i in range(n)])
    else:
        Lj = jc.evaluate_taylor(L, p, 2)
        N = nonlinear_connection(F, p).N
    grad = Lj.c[1]
    hess = jc._exact_symmetric(Lj.c[2].copy())
    Lx, Ly = grad[:n], grad[n:]
    data = _LocalData(
        n=n,
        s=s,
        L=Lj.value,
        Lx=Lx,
        Ly=Ly,
        Lxy=hess[:n, n:],
        M=hess[n:, n:],
        N=N,
        D=Lx - N.T @ Ly,
    )
    if connection_derivatives:
        rows = []
        for i in range(n):
            Di = Lj.d(i)
            for k in range(n):
                Di = Di - Nj[k][i] * Lj.d(n + k)
            rows.append(Di.c[1])
        data.dD = np.array(rows)
    return data


def vertical_differential(L, F, p, m):
    """``d_F L = -s dL/dy^i dx^i + (1/s) delta_i L delta y^i``."""
    d = _local_data(L, F, p, m)
    return AdaptedTensor(np.concatenate([-d.s * d.Ly, d.D / d.s]), "one-form")


def _two_form(n, A=None, C=None, D=None, E=None):
    """Matrix of ``A_ji dx^j^dx^i + C_ji dx^j^dy^i + D_ji dy^j^dx^i + E_ji dy^j^dy^i``."""
    M = np.zeros((2 * n, 2 * n))
    h, v = slice(0, n), slice(n, 2 * n)
    if A is not None:
        M[h, h] += A - A.T
    if C is not None:
        M[h, v] += C
        M[v, h] -= C.T
    if D is not None:
        M[v, h] += D
        M[h, v] -= D.T
    if E is not None:
        M[v, v] += E - E.T
    return M + 0.0


def kahler_form_lagrangian(L, F, p, m):
    """``Phi_L`` from its four coefficient groups.

    ``s delta_j(dL/dy^i) dx^j^dx^i - (1/s) delta_j delta_i L dx^j^delta y^i
    + s d^2L/dy^j dy^i delta y^j^dx^i - (1/s) d/dy^j(delta_i L) delta y^j^delta y^i``
    """
    d = _local_data(L, F, p, m, connection_derivatives=True)
    M = _two_form(d.n, A=d.s * d.hdLy, C=-d.hdD / d.s, D=d.s * d.M, E=-d.vdD / d.s)
    return AdaptedTensor(M, "two-form")


def liouville_vector_field(xi, F, m):
    """``V = F(xi) = (a/||y||) Y^i delta/delta x^i - (||y||/a) X^i d/dy^i``."""
    J = homogeneous_almost_complex(F, xi.p, m).matrix
    return AdaptedTensor(J @ xi.components, "vector")


def energy_function(L, xi, F, m):
    """``E_L = V(L) - L = -s X^i dL/dy^i + (1/s) Y^i delta_i L - L``."""
    d = _local_data(L, F, xi.p, m)
    return float(-d.s * (xi.X @ d.Ly) + (xi.Y @ d.D) / d.s - d.L)


def energy_differential(L, xi, F, m):
    """``dE_L`` as expanded term by term with ``X``, ``Y`` and ``||y||/a`` held fixed.

    This is the expansion whose difference with ``i_xi Phi_L`` collapses to
    the two Euler-Lagrange families.
    """
    d = _local_data(L, F, xi.p, m, connection_derivatives=True)
    X, Y = xi.X, xi.Y
    dx = -d.s * (d.hdLy @ X) + (d.hdD @ Y) / d.s - d.D
    dy = -d.s * (d.M @ X) + (d.vdD @ Y) / d.s - d.Ly
    return AdaptedTensor(np.concatenate([dx, dy]), "one-form")


def _fiber_solve(M, rhs, p):
    if not np.all(np.isfinite(M)) or np.linalg.cond(M) > 1e13:
        raise DegenerateLagrangianError(
            f"fiber Hessian of the Lagrangian is singular at x={p.x.tolist()}, y={p.y.tolist()}"
        )
    return np.linalg.solve(M, rhs)


def el_rhs(L, F, p, m):
    """Coordinate fiber acceleration ``ydot`` solving family 1 along ``xdot = y``."""
    d = _local_data(L, F, p, m)
    rhs = -d.D / d.s - d.Lxy.T @ p.y
    return _fiber_solve(d.M, rhs, p)


def el_residual(L, F, p, ydot, m):
    """Residuals of both families at state ``p`` with coordinate acceleration ``ydot``."""
    d = _local_data(L, F, p, m, connection_derivatives=True)
    ydot = np.asarray(ydot, dtype=float)
    zdot = np.concatenate([p.y, ydot])
    r1 = d.s * (d.Lxy.T @ p.y + d.M @ ydot) + d.D
    r2 = (d.dD @ zdot) / d.s - d.Ly
    return r1, r2


def lagrangian_identity_residual(L, F, p, ydot, m):
    """``i_xi Phi_L - dE_L`` for the semispray through ``p`` with acceleration ``ydot``.

    Its horizontal part is the family-1 residual and its vertical part is
    minus the family-2 residual.
    """
    xi = SemisprayState.from_acceleration(F, p, ydot)
    phi = kahler_form_lagrangian(L, F, p, m)
    contracted = xi.components @ phi.matrix
    return AdaptedTensor(contracted - energy_differential(L, xi, F, m).matrix, "one-form")


def hamilton_rhs(H, F, p, m, mode="plain"):
    """``xdot = s dH/dy``, ``ydot = -s dH/dx`` (or ``-s delta H/delta x`` when corrected)."""
    if mode not in HAMILTON_MODES:
        raise ValueError(f"mode must be one of {HAMILTON_MODES}, got {mode!r}")
    n = p.n
    s = F.norm(p) / m.a
    j = jc.evaluate_jet(H, p, 1)
    Hx, Hy = j.grad[:n], j.grad[n:]
    if mode == "connection-corrected":
        Hx = Hx - nonlinear_connection(F, p).N.T @ Hy
    return s * Hy, -s * Hx
