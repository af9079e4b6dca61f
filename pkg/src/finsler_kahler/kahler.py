"""Lifted metrics, almost complex structures and 2-forms in the adapted frame.

Every object is a matrix over the adapted basis ``(delta/delta x^i, d/dy^i)``
or its dual ``(dx^i, delta y^i)``; the first ``n`` slots are horizontal.

* metrics and 2-forms: ``B(U, W) = U @ M @ W``;
* endomorphisms: column ``a`` is the image of basis vector ``a``;
* one-forms and vectors: plain component vectors.

Wedge products follow ``(alpha ^ beta)(U, W) = alpha(U) beta(W) - alpha(W) beta(U)``.
``||y||`` is always evaluated as ``F(x, y)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegularityError
from .finsler import _frozen, metric_tensor

__all__ = [
    "ModelParams",
    "AdaptedTensor",
    "sasaki_lift",
    "homogeneous_lift",
    "almost_complex",
    "dual_almost_complex",
    "homogeneous_almost_complex",
    "dual_homogeneous_almost_complex",
    "symplectic_form_theta",
    "liouville_one_form",
    "hamiltonian_two_form",
    "interior_product",
    "compatibility_defect",
    "hermitian_defect",
]


@dataclass(frozen=True)
class ModelParams:
    """Homogeneity constant ``a`` of the homogeneous lift (must be positive)."""

    a: float = 1.0

    def __post_init__(self):
        a = float(self.a)
        if not (np.isfinite(a) and a > 0.0):
            raise ParameterError(f"model constant must satisfy a > 0, got {self.a!r}")
        object.__setattr__(self, "a", a)


KINDS = ("metric", "endomorphism", "two-form", "one-form", "vector")


@dataclass(frozen=True)
class AdaptedTensor:
    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown tensor kind {self.kind!r}")
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def n(self):
        return self.matrix.shape[0] // 2

    def _block(self, r, c):
        n = self.n
        return self.matrix[r * n : (r + 1) * n, c * n : (c + 1) * n]

    @property
    def HH(self):
        return self._block(0, 0)

    @property
    def HV(self):
        return self._block(0, 1)

    @property
    def VH(self):
        return self._block(1, 0)

    @property
    def VV(self):
        return self._block(1, 1)

    @property
    def horizontal(self):
        return self.matrix[: self.n]

    @property
    def vertical(self):
        return self.matrix[self.n :]

    def to_coordinates(self, frame):
        """Components in the coordinate basis ``(d/dx, d/dy)`` / ``(dx, dy)``."""
        M = self.matrix
        if self.kind in ("metric", "two-form"):
            return frame.bilinear_to_coordinates(M)
        if self.kind == "endomorphism":
            return frame.endomorphism_to_coordinates(M)
        if self.kind == "one-form":
            return frame.form_to_coordinates(M)
        return frame.vector_to_coordinates(M)

    def as_dict(self):
        return {"kind": self.kind, "matrix": self.matrix.tolist()}


def _blocks(HH, HV, VH, VV):
    # + 0.0 normalises negative zeros
    return np.block([[HH, HV], [VH, VV]]) + 0.0


def _diag_lift(g, vertical_scale):
    zero = np.zeros_like(g)
    return _blocks(g, zero, zero, vertical_scale * g)


def sasaki_lift(F, p):
    """``G = g dx (x) dx + g delta y (x) delta y``."""
    g = metric_tensor(F, p).g
    return AdaptedTensor(_diag_lift(g, 1.0), "metric")


def homogeneous_lift(F, p, m):
    """``G = g dx (x) dx + (a^2 / ||y||^2) g delta y (x) delta y``."""
    g = metric_tensor(F, p).g
    norm = F.norm(p)
    return AdaptedTensor(_diag_lift(g, m.a**2 / norm**2), "metric")


def _swap(n, up, down):
    """Endomorphism sending d/dy^i -> up * delta/delta x^i and delta/delta x^i -> -down * d/dy^i."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return _blocks(zero, up * eye, -down * eye, zero)


def almost_complex(F, p):
    """``F(delta/delta x^i) = -d/dy^i``, ``F(d/dy^i) = delta/delta x^i``."""
    return AdaptedTensor(_swap(p.n, 1.0, 1.0), "endomorphism")


def dual_almost_complex(F, p):
    """Action on one-form components: ``dx^i -> -delta y^i``, ``delta y^i -> dx^i``.

    This is the inverse transpose of :func:`almost_complex`.
    """
    return AdaptedTensor(_swap(p.n, 1.0, 1.0), "endomorphism")


def homogeneous_almost_complex(F, p, m):
    """``delta/delta x^i -> -(||y||/a) d/dy^i``, ``d/dy^i -> (a/||y||) delta/delta x^i``."""
    norm = F.norm(p)
    return AdaptedTensor(_swap(p.n, m.a / norm, norm / m.a), "endomorphism")


def dual_homogeneous_almost_complex(F, p, m):
    """Action on one-form components: ``dx^i -> -(||y||/a) delta y^i``, ``delta y^i -> (a/||y||) dx^i``.

    Unlike the unscaled case this is not the inverse transpose of
    :func:`homogeneous_almost_complex` unless ``a = ||y||``.
    """
    norm = F.norm(p)
    return AdaptedTensor(_swap(p.n, m.a / norm, norm / m.a), "endomorphism")


def symplectic_form_theta(F, p):
    """``theta = g_ij delta y^i ^ dx^j``, equal to ``G(F U, W)`` for the Sasaki pair."""
    g = metric_tensor(F, p).g
    if abs(np.linalg.det(g)) < 1e-300:
        raise RegularityError("fundamental tensor is singular; theta is degenerate")
    zero = np.zeros_like(g)
    return AdaptedTensor(_blocks(zero, -g, g.T, zero), "two-form")


def liouville_one_form(F, p, m):
    """Return ``(omega, lambda)`` as one-forms.

    ``omega = (a^2/||y||^2) x^i dx^i + y^i delta y^i`` and
    ``lambda = F*(omega) = (a/||y||) y^i dx^i - (a/||y||) x^i delta y^i``.
    """
    norm = F.norm(p)
    a = m.a
    omega = np.concatenate([(a**2 / norm**2) * p.x, p.y])
    dual = dual_homogeneous_almost_complex(F, p, m).matrix
    lam = dual @ omega
    return AdaptedTensor(omega, "one-form"), AdaptedTensor(lam, "one-form")


def hamiltonian_two_form(F, p, m):
    """``phi = (a/||y||) dx^i ^ delta y^i``."""
    k = m.a / F.norm(p)
    n = p.n
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return AdaptedTensor(_blocks(zero, k * eye, -k * eye, zero), "two-form")


def interior_product(X, form):
    """``i_X form``: the one-form ``W -> form(X, W)``."""
    X = np.asarray(X.matrix if isinstance(X, AdaptedTensor) else X, dtype=float)
    M = form.matrix if isinstance(form, AdaptedTensor) else np.asarray(form)
    return AdaptedTensor(X @ M, "one-form")


def compatibility_defect(metric, structure):
    """``max |G(JU, JW) - G(U, W)|`` over the adapted basis."""
    G = metric.matrix if isinstance(metric, AdaptedTensor) else np.asarray(metric)
    J = structure.matrix if isinstance(structure, AdaptedTensor) else np.asarray(structure)
    return float(np.max(np.abs(J.T @ G @ J - G)))


def hermitian_defect(F, p, m):
    """Compatibility defect of the homogeneous pair."""
    return compatibility_defect(homogeneous_lift(F, p, m), homogeneous_almost_complex(F, p, m))
