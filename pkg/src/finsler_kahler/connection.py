"""Spray coefficients, the Cartan nonlinear connection and the adapted frame.

Conventions (index ``i`` labels a fiber direction, ``j`` a base direction)::

    G^i     = 1/4 g^{il} (y^k d^2F^2/dy^l dx^k - dF^2/dx^l)
    N^i_j   = dG^i/dy^j
    d/dx^i  -> delta/delta x^i = d/dx^i - N^j_i d/dy^j
    dy^i    -> delta y^i       = dy^i + N^i_j dx^j

With these the coframe ``(dx, delta y)`` pairs to the identity on the frame
``(delta/delta x, d/dy)``.
"""

from dataclasses import dataclass

import numpy as np

from . import jetcalc as jc
from .errors import RegularityError
from .finsler import PhasePoint, _frozen

__all__ = [
    "SprayCoefficients",
    "NonlinearConnection",
    "AdaptedFrame",
    "spray_coefficients",
    "nonlinear_connection",
    "connection_jets",
    "adapted_frame",
    "adapted_partial_x",
    "horizontal_gradient",
    "levi_civita",
]

_COND_LIMIT = 1e13


def _solve_jets(A, b):
    """Solve ``A u = b`` for jet-valued ``A`` (n x n) and ``b`` (n); no pivoting.

    The value matrix is checked for conditioning first, so elimination on a
    symmetric positive-definite (or merely well-conditioned) matrix is safe.
    """
    n = len(b)
    vals = np.array([[A[i][j].value for j in range(n)] for i in range(n)])
    if not np.all(np.isfinite(vals)) or np.linalg.cond(vals) > _COND_LIMIT:
        raise RegularityError(f"metric is singular at this point:\n{vals}")
    A = [list(row) for row in A]
    b = list(b)
    for k in range(n):
        if abs(A[k][k].value) < 1e-300:
            # swap in a later row with a usable pivot
            r = next(r for r in range(k + 1, n) if abs(A[r][k].value) > 0.0)
            A[k], A[r] = A[r], A[k]
            b[k], b[r] = b[r], b[k]
        inv_piv = 1.0 / A[k][k]
        for r in range(k + 1, n):
            factor = A[r][k] * inv_piv
            for c in range(k + 1, n):
                A[r][c] = A[r][c] - factor * A[k][c]
            b[r] = b[r] - factor * b[k]
    u = [None] * n
    for k in range(n - 1, -1, -1):
        acc = b[k]
        for c in range(k + 1, n):
            acc = acc - A[k][c] * u[c]
        u[k] = acc / A[k][k]
    return u


def _spray_jets(F, p, order):
    """Spray coefficients ``G^i`` as jets of the given order (needs F^2 at order+2)."""
    n = p.n
    E = jc.evaluate_taylor(F.energy2, p, order + 2)
    k = order + 2
    y = [jc.Jet.variable(p.y[i], n + i, 2 * n, k) for i in range(n)]
    Ey = [E.d(n + l) for l in range(n)]
    g = [[0.5 * Ey[a].d(n + b) for b in range(n)] for a in range(n)]
    B = []
    for l in range(n):
        acc = -E.d(l)
        for m in range(n):
            acc = acc + Ey[l].d(m) * y[m]
        B.append(0.25 * acc)
    return _solve_jets(g, B)


@dataclass(frozen=True)
class SprayCoefficients:
    G: np.ndarray
    point: PhasePoint = None

    def __post_init__(self):
        object.__setattr__(self, "G", _frozen(self.G))


@dataclass(frozen=True)
class NonlinearConnection:
    """``N[i, j] = N^i_j``: row is the fiber index, column the base index."""

    N: np.ndarray
    point: PhasePoint = None

    def __post_init__(self):
        object.__setattr__(self, "N", _frozen(self.N))


def spray_coefficients(F, p):
    G = _spray_jets(F, p, 0)
    return SprayCoefficients(np.array([Gi.value for Gi in G]), p)


def connection_jets(F, p, order=0):
    """``N^i_j`` as an n x n nested list of jets (order 0 or 1).

    Order 1 carries the first partials of the connection and uses fourth
    derivatives of ``F^2`` internally.
    """
    if order not in (0, 1):
        raise ValueError("connection jets are available at order 0 or 1")
    n = p.n
    G = _spray_jets(F, p, order + 1)
    return [[G[i].d(n + j) for j in range(n)] for i in range(n)]


def nonlinear_connection(F, p):
    N = connection_jets(F, p, 0)
    n = p.n
    return NonlinearConnection(np.array([[N[i][j].value for j in range(n)] for i in range(n)]), p)


@dataclass(frozen=True)
class AdaptedFrame:
    """Change of basis between coordinate and adapted frames.

    ``frame`` holds the adapted vectors ``(delta/delta x^i, d/dy^i)`` as
    columns in coordinate components; ``coframe`` holds ``(dx^i, delta y^i)``
    as rows.  ``coframe @ frame`` is the identity.
    """

    frame: np.ndarray
    coframe: np.ndarray
    N: np.ndarray

    def __post_init__(self):
        for name in ("frame", "coframe", "N"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def n(self):
        return self.N.shape[0]

    def pairing(self):
        return self.coframe @ self.frame

    def vector_to_coordinates(self, v):
        return self.frame @ v

    def vector_from_coordinates(self, v):
        return self.coframe @ v

    def form_to_coordinates(self, w):
        return self.coframe.T @ w

    def bilinear_to_coordinates(self, M):
        return self.coframe.T @ M @ self.coframe

    def endomorphism_to_coordinates(self, M):
        return self.frame @ M @ self.coframe


def _frame_from_N(N):
    n = N.shape[0]
    eye = np.eye(n)
    zero = np.zeros((n, n))
    frame = np.block([[eye, zero], [-N, eye]])
    coframe = np.block([[eye, zero], [N, eye]])
    return AdaptedFrame(frame, coframe, N)


def adapted_frame(F, p):
    return _frame_from_N(nonlinear_connection(F, p).N)


def horizontal_gradient(F, f, p, N=None):
    """All horizontal derivatives ``delta f / delta x^i`` at ``p``."""
    n = p.n
    j = jc.evaluate_jet(f, p, 1)
    if N is None:
        N = nonlinear_connection(F, p).N
    return j.grad[:n] - N.T @ j.grad[n:]


def adapted_partial_x(F, f, p, i):
    """``delta f / delta x^i = df/dx^i - N^j_i df/dy^j``."""
    return float(horizontal_gradient(F, f, p)[i])


def levi_civita(metric_fn, x):
    """Christoffel symbols ``Gamma[i, j, k] = Gamma^i_jk`` of a metric ``g(x)``.

    Direct formula ``1/2 g^{il}(d_j g_lk + d_k g_lj - d_l g_jk)``; used as an
    independent check of the spray construction on Riemannian metrics.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    xs = np.empty(n, dtype=object)
    for i in range(n):
        xs[i] = jc.Jet.variable(x[i], i, n, 1)
    G = metric_fn(xs)
    g = np.zeros((n, n))
    dg = np.zeros((n, n, n))  # dg[l, k, j] = d_j g_lk
    for a in range(n):
        for b in range(n):
            e = G[a][b]
            if isinstance(e, jc.Jet):
                g[a, b] = e.value
                dg[a, b] = e.c[1]
            else:
                g[a, b] = float(e)
    ginv = np.linalg.inv(g)
    lowered = 0.5 * (
        np.einsum("lkj->ljk", dg) + np.einsum("ljk->ljk", dg) - np.einsum("jkl->ljk", dg)
    )
    return np.einsum("il,ljk->ijk", ginv, lowered)
