"""Fundamental functions, the fundamental metric tensor and Finsler checks."""

from dataclasses import dataclass, field

import numpy as np

from . import jetcalc as jc
from .errors import DomainError, FinslerError, ParameterError, RegularityError

__all__ = [
    "PhasePoint",
    "FundamentalFunction",
    "MetricTensor",
    "ConditionResult",
    "ValidationReport",
    "euclidean",
    "riemannian",
    "polar",
    "randers",
    "quartic",
    "custom",
    "metric_tensor",
    "inverse_metric",
    "energy_density",
    "lower_index",
    "validate_finsler",
    "HOMOGENEITY_FACTORS",
]

HOMOGENEITY_FACTORS = (0.5, 2.0, 10.0)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhasePoint:
    """A point ``(x, y)`` of the slit tangent bundle."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _frozen(np.atleast_1d(self.x))
        y = _frozen(np.atleast_1d(self.y))
        if x.shape != y.shape or x.ndim != 1:
            raise DomainError(f"x and y must be vectors of equal length, got {x.shape} and {y.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError(f"non-finite phase point x={list(x)}, y={list(y)}")
        if not np.any(y):
            raise DomainError("y = 0 lies on the null section; fields are defined on y != 0 only")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def z(self):
        return np.concatenate([self.x, self.y])

    def scaled(self, lam):
        return PhasePoint(self.x, lam * self.y)

    @classmethod
    def from_z(cls, z):
        z = np.asarray(z, dtype=float)
        n = z.shape[0] // 2
        return cls(z[:n], z[n:])


def _quadratic(A, y):
    n = len(y)
    total = 0.0
    for i in range(n):
        for j in range(n):
            a = A[i][j]
            if isinstance(a, jc.Jet) or a != 0.0:
                total = total + a * y[i] * y[j]
    return total


@dataclass(frozen=True)
class FundamentalFunction:
    """A candidate Finsler fundamental function ``F(x, y)``.

    ``F2`` evaluates ``F**2`` directly when a smoother closed form exists
    (quadratic forms avoid the square root).  ``base_box`` is the default
    sampling region for base points.
    """

    n: int
    F: object
    kind: str
    params: dict = field(default_factory=dict)
    F2: object = None
    base_box: tuple = None

    def __call__(self, x, y):
        return self.F(x, y)

    def energy2(self, x, y):
        if self.F2 is not None:
            return self.F2(x, y)
        f = self.F(x, y)
        return f * f

    def norm(self, p):
        """``F(x, y)`` at a phase point, as a float."""
        return float(self.F(p.x, p.y))

    def box(self):
        if self.base_box is not None:
            lo, hi = self.base_box
            return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        return -np.ones(self.n), np.ones(self.n)


def euclidean(n=2):
    def F2(x, y):
        return sum(y[i] * y[i] for i in range(n))

    return FundamentalFunction(n, lambda x, y: jc.sqrt(F2(x, y)), "euclidean", {"dimension": n}, F2)


def riemannian(metric_fn, n, name="riemannian", params=None, base_box=None):
    """``F = sqrt(g_ij(x) y^i y^j)`` for a position-dependent matrix ``metric_fn(x)``."""

    def F2(x, y):
        return _quadratic(metric_fn(x), y)

    return FundamentalFunction(
        n,
        lambda x, y: jc.sqrt(F2(x, y)),
        "riemannian",
        dict(params or {}, preset=name),
        F2,
        base_box,
    )


def _polar_metric(x):
    return [[1.0, 0.0], [0.0, x[0] * x[0]]]


def polar():
    """Flat plane in polar coordinates: ``ds^2 = dr^2 + r^2 dtheta^2``."""
    return riemannian(_polar_metric, 2, name="polar", base_box=([0.5, -np.pi], [2.0, np.pi]))


def randers(b, alpha=None, check=True):
    """``F = sqrt(alpha_ij y^i y^j) + b_i y^i`` with constant ``alpha`` and ``b``.

    With ``check`` the standard validity bound ``|b|_alpha < 1`` is enforced.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    A = np.eye(n) if alpha is None else np.asarray(alpha, dtype=float)
    bnorm = float(np.sqrt(b @ np.linalg.solve(A, b)))
    if check and not bnorm < 1.0:
        raise ParameterError(f"Randers covector needs |b|_alpha < 1, got {bnorm:.6g}")

    def F(x, y):
        beta = sum(b[i] * y[i] for i in range(n))
        return jc.sqrt(_quadratic(A, y)) + beta

    return FundamentalFunction(n, F, "randers", {"b": b.tolist(), "alpha": A.tolist(), "b_norm": bnorm})


def quartic(n=2):
    """Minkowski norm ``F = (sum (y^i)^4)^(1/4)``."""

    def F2(x, y):
        return jc.sqrt(sum(y[i] ** 4 for i in range(n)))

    def F(x, y):
        return jc.power(sum(y[i] ** 4 for i in range(n)), 0.25)

    return FundamentalFunction(n, F, "quartic", {"dimension": n}, F2)


def custom(F, n, F2=None, name="custom", params=None, base_box=None):
    return FundamentalFunction(n, F, "custom", dict(params or {}, name=name), F2, base_box)


@dataclass(frozen=True)
class MetricTensor:
    g: np.ndarray
    point: PhasePoint = None

    def __post_init__(self):
        object.__setattr__(self, "g", _frozen(self.g))


def metric_tensor(F, p):
    """``g_ij = 1/2 d^2 F^2 / dy^i dy^j`` at ``p``."""
    j = jc.evaluate_jet(F.energy2, p, 2)
    n = p.n
    return MetricTensor(0.5 * j.hess[n:, n:], p)


def _cholesky(g):
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        return None


def inverse_metric(g):
    """Inverse of a positive-definite metric; raises :class:`RegularityError` otherwise."""
    mat = g.g if isinstance(g, MetricTensor) else np.asarray(g, dtype=float)
    if not np.all(np.isfinite(mat)) or _cholesky(mat) is None:
        raise RegularityError(f"metric is singular or indefinite:\n{mat}")
    inv = np.linalg.inv(mat)
    inv = 0.5 * (inv + inv.T)
    return MetricTensor(inv, g.point if isinstance(g, MetricTensor) else None)


def energy_density(F, p):
    """``t = F^2 / 2``."""
    return 0.5 * F.norm(p) ** 2


def lower_index(F, p, method="metric"):
    """Covector ``y_i``, either ``g_ij y^j`` or ``1/2 dF^2/dy^i``."""
    if method == "metric":
        return metric_tensor(F, p).g @ p.y
    if method == "gradient":
        j = jc.evaluate_jet(F.energy2, p, 1)
        return 0.5 * j.grad[p.n:]
    raise ValueError(f"unknown method {method!r}")


@dataclass
class ConditionResult:
    name: str
    passed: bool
    worst: float
    failures: int = 0
    example: list = None


@dataclass
class ValidationReport:
    kind: str
    samples: int
    conditions: dict

    @property
    def passed(self):
        return all(c.passed for c in self.conditions.values())

    def as_dict(self):
        return {
            "kind": self.kind,
            "samples": self.samples,
            "passed": self.passed,
            "conditions": {
                k: {"passed": c.passed, "worst": c.worst, "failures": c.failures, "example": c.example}
                for k, c in self.conditions.items()
            },
        }


def _point_repr(p):
    return [p.x.tolist(), p.y.tolist()]


def validate_finsler(F, samples, factors=HOMOGENEITY_FACTORS, tol=1e-9):
    """Check positivity, homogeneity, smoothness and definiteness on samples.

    Failures are recorded in the report, never raised.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("validate_finsler needs at least one sample")
    pos = ConditionResult("positivity", True, np.inf)
    hom = ConditionResult("homogeneity", True, 0.0)
    smooth = ConditionResult("differentiability", True, 0.0)
    pd = ConditionResult("definiteness", True, np.inf)

    def fail(cond, p):
        cond.passed = False
        cond.failures += 1
        if cond.example is None:
            cond.example = _point_repr(p)

    for p in samples:
        f = F.norm(p)
        if not np.isfinite(f) or f <= 0.0:
            fail(pos, p)
            pos.worst = min(pos.worst, f) if np.isfinite(f) else -np.inf
        else:
            pos.worst = min(pos.worst, f)
            for lam in factors:
                defect = abs(F.norm(p.scaled(lam)) - lam * f) / max(1.0, lam * f)
                hom.worst = max(hom.worst, defect)
                if not defect <= tol:
                    fail(hom, p)
                    break
        try:
            g = metric_tensor(F, p).g
        except FinslerError:
            fail(smooth, p)
            fail(pd, p)
            pd.worst = -np.inf
            continue
        lam_min = float(np.linalg.eigvalsh(g)[0])
        pd.worst = min(pd.worst, lam_min)
        if _cholesky(g) is None:
            fail(pd, p)
    return ValidationReport(F.kind, len(samples), {c.name: c for c in (pos, hom, smooth, pd)})
