"""Exact multivariate derivatives of scalar fields on phase space.

A :class:`Jet` carries the value of a function together with its full
derivative tensors up to a fixed truncation order.  Arithmetic on jets is the
Leibniz rule and elementary functions are applied through their Taylor series
in the nilpotent part of the argument, so every derivative is exact up to
floating-point rounding.

Fields are plain callables ``f(x, y)`` receiving two numpy arrays of length
``n``.  Written with the functions exported here (:func:`sqrt`, :func:`exp`,
...), the same callable evaluates on floats and on jets.

>>> from finsler_kahler.finsler import PhasePoint
>>> j = evaluate_jet(lambda x, y: x[0] * y[0] ** 2, PhasePoint([2.0], [3.0]), 3)
>>> j.value, partial(j, (1, 1)), partial(j, (0, 1, 1))
(18.0, 4.0, 2.0)
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from math import factorial

import numpy as np

from .errors import DomainError, OrderError

__all__ = [
    "Jet",
    "Jet3",
    "evaluate_jet",
    "evaluate_taylor",
    "partial",
    "finite_difference_defect",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "tan",
    "tanh",
    "fabs",
    "power",
]

MAX_PUBLIC_ORDER = 3
MAX_ORDER = 4


@lru_cache(maxsize=None)
def _leibniz_terms(k):
    """Placements of a degree-i factor among k symmetric slots.

    Returns ``(i, axes)`` pairs; ``axes`` transposes ``outer(A_i, B_{k-i})``
    so that the A axes land on the chosen subset.
    """
    terms = []
    for i in range(k + 1):
        for subset in combinations(range(k), i):
            rest = [j for j in range(k) if j not in subset]
            order = list(subset) + rest
            terms.append((i, tuple(int(a) for a in np.argsort(order))))
    return tuple(terms)


@lru_cache(maxsize=None)
def _canonical_index(dim, k):
    grid = np.indices((dim,) * k).reshape(k, -1)
    return tuple(np.sort(grid, axis=0))


def _exact_symmetric(t):
    """Copy every entry from its sorted-index representative."""
    if t.ndim < 2:
        return t
    idx = _canonical_index(t.shape[0], t.ndim)
    return t[idx].reshape(t.shape)


class Jet:
    """Truncated Taylor expansion of a scalar function of ``dim`` variables.

    ``c[k]`` is the full (symmetric) tensor of k-th partial derivatives.
    """

    __slots__ = ("c",)
    __array_ufunc__ = None

    def __init__(self, coeffs):
        self.c = tuple(np.asarray(a, dtype=float) for a in coeffs)

    @classmethod
    def constant(cls, value, dim, order):
        return cls([np.asarray(float(value))] + [np.zeros((dim,) * k) for k in range(1, order + 1)])

    @classmethod
    def variable(cls, value, index, dim, order):
        coeffs = [np.asarray(float(value))] + [np.zeros((dim,) * k) for k in range(1, order + 1)]
        if order >= 1:
            coeffs[1][index] = 1.0
        return cls(coeffs)

    @property
    def order(self):
        return len(self.c) - 1

    @property
    def dim(self):
        return self.c[1].shape[0] if len(self.c) > 1 else 0

    @property
    def value(self):
        return float(self.c[0])

    def truncate(self, order):
        if order >= self.order:
            return self
        return Jet(self.c[: order + 1])

    def d(self, a):
        """Jet of the partial derivative along variable ``a`` (one order lower)."""
        if self.order < 1:
            raise OrderError("cannot differentiate an order-0 jet")
        return Jet([t[a] for t in self.c[1:]])

    def __repr__(self):
        return f"Jet(value={self.value!r}, order={self.order}, dim={self.dim})"

    # arithmetic -----------------------------------------------------------

    def __neg__(self):
        return Jet([-t for t in self.c])

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet((self.c[0] + float(other),) + self.c[1:])
        k = min(self.order, other.order)
        return Jet([a + b for a, b in zip(self.c[: k + 1], other.c[: k + 1])])

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return Jet((self.c[0] - float(other),) + self.c[1:])
        k = min(self.order, other.order)
        return Jet([a - b for a, b in zip(self.c[: k + 1], other.c[: k + 1])])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            s = float(other)
            return Jet([s * t for t in self.c])
        return _mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / float(other))
        return _mul(self, _reciprocal(other))

    def __rtruediv__(self, other):
        return _reciprocal(self) * float(other)

    def __pow__(self, p):
        return power(self, p)

    def __rpow__(self, base):
        return exp(self * np.log(float(base)))


def _mul(u, v):
    k_max = min(u.order, v.order)
    out = []
    for k in range(k_max + 1):
        acc = None
        for i, axes in _leibniz_terms(k):
            term = np.multiply.outer(u.c[i], v.c[k - i])
            if k > 1:
                term = np.transpose(term, axes)
            acc = term if acc is None else acc + term
        out.append(acc)
    return Jet(out)


def _compose(u, derivs):
    """phi(u) from phi and its derivatives at u.value (``derivs[m] = phi^(m)``)."""
    order = u.order
    result = Jet.constant(derivs[0], u.dim, order)
    if order == 0:
        return result
    delta = Jet((np.asarray(0.0),) + u.c[1:])
    pw = delta
    for m in range(1, order + 1):
        result = result + pw * (derivs[m] / factorial(m))
        if m < order:
            pw = pw * delta
    # delta has zero value, but 0 * inf would poison the value slot
    return Jet((np.asarray(float(derivs[0])),) + result.c[1:])


def _reciprocal(u):
    u0 = u.value
    derivs = [(-1.0) ** m * factorial(m) / u0 ** (m + 1) for m in range(u.order + 1)]
    return _compose(u, derivs)


def _falling(p, m):
    out = 1.0
    for j in range(m):
        out *= p - j
    return out


def power(u, p):
    """``u ** p``; integer exponents use repeated multiplication."""
    if not isinstance(u, Jet):
        if isinstance(p, Jet):
            return exp(p * np.log(u))
        return np.power(np.asarray(u, dtype=float), p)
    if isinstance(p, Jet):
        return exp(p * log(u))
    if float(p).is_integer():
        p = int(p)
        if p < 0:
            return power(_reciprocal(u), -p)
        result = Jet.constant(1.0, u.dim, u.order)
        base = u
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result
    u0 = u.value
    with np.errstate(all="ignore"):
        derivs = [_falling(p, m) * np.power(u0, p - m) for m in range(u.order + 1)]
    return _compose(u, derivs)


def _unary(name, npfunc, derivs_of):
    def f(u):
        if isinstance(u, Jet):
            with np.errstate(all="ignore"):
                return _compose(u, derivs_of(np.float64(u.value), u.order))
        with np.errstate(all="ignore"):
            return npfunc(u)

    f.__name__ = name
    f.__doc__ = f"Jet-aware ``{name}``."
    return f


def _sqrt_derivs(u0, order):
    return [_falling(0.5, m) * np.power(u0, 0.5 - m) for m in range(order + 1)]


def _log_derivs(u0, order):
    return [np.log(u0)] + [(-1.0) ** (m - 1) * factorial(m - 1) / u0**m for m in range(1, order + 1)]


def _sin_derivs(u0, order):
    cyc = [np.sin(u0), np.cos(u0), -np.sin(u0), -np.cos(u0)]
    return [cyc[m % 4] for m in range(order + 1)]


def _cos_derivs(u0, order):
    cyc = [np.cos(u0), -np.sin(u0), -np.cos(u0), np.sin(u0)]
    return [cyc[m % 4] for m in range(order + 1)]


def _tanh_derivs(u0, order):
    t = np.tanh(u0)
    # d/du tanh = 1 - t^2; propagate as polynomials in t
    poly = [0.0, 1.0]
    out = []
    for _ in range(order + 1):
        out.append(np.polyval(poly[::-1], t))
        dpoly = [j * poly[j] for j in range(1, len(poly))]
        # multiply by (1 - t^2)
        new = [0.0] * (len(dpoly) + 2)
        for j, cj in enumerate(dpoly):
            new[j] += cj
            new[j + 2] -= cj
        poly = new
    return out


def _tan_derivs(u0, order):
    t = np.tan(u0)
    poly = [0.0, 1.0]
    out = []
    for _ in range(order + 1):
        out.append(np.polyval(poly[::-1], t))
        dpoly = [j * poly[j] for j in range(1, len(poly))]
        new = [0.0] * (len(dpoly) + 2)
        for j, cj in enumerate(dpoly):
            new[j] += cj
            new[j + 2] += cj
        poly = new
    return out


sqrt = _unary("sqrt", np.sqrt, _sqrt_derivs)
exp = _unary("exp", np.exp, lambda u0, k: [np.exp(u0)] * (k + 1))
log = _unary("log", np.log, _log_derivs)
sin = _unary("sin", np.sin, _sin_derivs)
cos = _unary("cos", np.cos, _cos_derivs)
tan = _unary("tan", np.tan, _tan_derivs)
tanh = _unary("tanh", np.tanh, _tanh_derivs)
fabs = _unary("fabs", np.abs, lambda u0, k: [abs(u0), float(np.sign(u0))] + [0.0] * (k - 1) if k else [abs(u0)])


# evaluation -------------------------------------------------------------


def _coordinate_name(a, n):
    return f"x^{a + 1}" if a < n else f"y^{a - n + 1}"


def _lift_inputs(p, order):
    n = p.n
    dim = 2 * n
    z = p.z
    x = np.empty(n, dtype=object)
    y = np.empty(n, dtype=object)
    for i in range(n):
        x[i] = Jet.variable(z[i], i, dim, order)
        y[i] = Jet.variable(z[n + i], n + i, dim, order)
    return x, y


def evaluate_taylor(f, p, order):
    """Raw :class:`Jet` of ``f`` at ``p``; any order up to 4.

    Used where derivatives of the nonlinear connection are needed.
    """
    if not 0 <= order <= MAX_ORDER:
        raise OrderError(f"order must be in 0..{MAX_ORDER}, got {order}")
    x, y = _lift_inputs(p, order)
    out = f(x, y)
    if isinstance(out, np.ndarray) and out.ndim == 0:
        out = out.item()
    if not isinstance(out, Jet):
        out = Jet.constant(out, 2 * p.n, order)
    _check_finite(out, p)
    return out


def _check_finite(jet, p):
    if not np.isfinite(jet.c[0]):
        raise DomainError(f"non-finite field value {jet.value!r} at x={p.x.tolist()}, y={p.y.tolist()}")
    for k, t in enumerate(jet.c[1:], start=1):
        bad = np.argwhere(~np.isfinite(t))
        if bad.size:
            # an infinite partial points at the culprit; NaNs are often 0 * inf fallout
            infinite = np.argwhere(np.isinf(t))
            bad = infinite if infinite.size else bad
            coords = ", ".join(_coordinate_name(int(a), p.n) for a in bad[0])
            raise DomainError(
                f"non-finite order-{k} partial along ({coords}) at x={p.x.tolist()}, y={p.y.tolist()}"
            )


@dataclass(frozen=True)
class Jet3:
    """Value and partial derivatives up to order 3 at a phase point.

    Coordinates are ordered ``(x^1..x^n, y^1..y^n)``.  Levels above ``order``
    are ``None``.
    """

    value: float
    grad: np.ndarray = None
    hess: np.ndarray = None
    third: np.ndarray = None
    order: int = 0

    def partial(self, idx=()):
        return partial(self, idx)


def evaluate_jet(f, p, order):
    """All partials of ``f`` at ``p`` up to ``order`` (0..3)."""
    if not 0 <= order <= MAX_PUBLIC_ORDER:
        raise OrderError(f"order must be in 0..{MAX_PUBLIC_ORDER}, got {order}")
    jet = evaluate_taylor(f, p, order)
    levels = [_exact_symmetric(t.copy()) for t in jet.c[1:]]
    levels += [None] * (MAX_PUBLIC_ORDER - len(levels))
    return Jet3(jet.value, *levels, order=order)


def partial(j, idx=()):
    """Partial derivative of a :class:`Jet3` for a multi-index of coordinates."""
    idx = tuple(int(a) for a in idx)
    if len(idx) > j.order:
        raise OrderError(f"multi-index {idx} exceeds jet order {j.order}")
    if not idx:
        return j.value
    level = (j.grad, j.hess, j.third)[len(idx) - 1]
    return float(level[tuple(sorted(idx))])


# finite-difference oracle ---------------------------------------------


def _axis_scales(p):
    ynorm = float(np.linalg.norm(p.y))
    base = np.maximum(1.0, np.abs(p.x))
    return np.concatenate([base, np.full(p.n, ynorm)])


def _central_difference(f, z, n, idx, h):
    k = len(idx)
    total = 0.0
    for signs in product((1.0, -1.0), repeat=k):
        zz = z.copy()
        for s, a in zip(signs, idx):
            zz[a] += s * h[a]
        total += math.prod(signs) * float(f(zz[:n], zz[n:]))
    return total / math.prod(2.0 * h[a] for a in idx)


def _fd_estimate(f, z, n, idx, h, richardson):
    fd = _central_difference(f, z, n, idx, h)
    if richardson:
        fd = (4.0 * fd - _central_difference(f, z, n, idx, 2.0 * h)) / 3.0
    return fd


def finite_difference_defect(f, p, order, step, richardson=False):
    """Max relative gap between jet partials and central finite differences.

    Only the partials of exactly ``order`` are compared.  Steps are relative:
    fiber axes scale with the Euclidean norm of ``y``, base axes with
    ``max(1, |x^i|)``.  The gap is normalised by ``max(1, max |partial|)``.

    With ``richardson`` the stencils at ``h`` and ``2h`` are combined to cancel
    the ``h^2`` error term.  ``step`` may be an increasing sequence; each
    partial then uses the step whose estimate agrees best with the next one
    in the sequence (the jet value plays no part in the choice).
    """
    steps = np.atleast_1d(np.asarray(step, dtype=float))
    if np.any(steps <= 0):
        raise ValueError("step must be positive")
    if order == 0:
        return 0.0
    j = evaluate_jet(f, p, order)
    n = p.n
    z = p.z
    scales = _axis_scales(p)
    level = (j.grad, j.hess, j.third)[order - 1]
    worst = 0.0
    for idx in combinations_with_replacement(range(2 * n), order):
        est = [_fd_estimate(f, z, n, idx, s * scales, richardson) for s in steps]
        if len(est) == 1:
            fd = est[0]
        else:
            k = int(np.argmin(np.abs(np.diff(est))))
            fd = est[k]
        worst = max(worst, abs(level[idx] - fd))
    return worst / max(1.0, float(np.max(np.abs(level))))
