"""Scalar functions ``u(t)``, ``v(t)`` of the Kahler-Einstein corollaries.

With ``s = sqrt(A^2 - 2 c t)``::

    u  = A + s
    v  = (A - 4 c t / A - s) / (2 t)
    u' = -c / s

and the integrability relation ``v = (c - u u') / (2 t u' - u)`` holds
identically, both sides reducing to ``-c (A + 2 s) / (A (A + s))``.

``v`` is evaluated as ``c / (A + s) - 2 c / A``, algebraically identical
(``A - s = 2 c t / (A + s)``) but free of cancellation as ``t -> 0`` and
equal to the limit ``-3 c / (2 A)`` at ``t = 0``.
"""

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

__all__ = [
    "EinsteinParams",
    "DomainReport",
    "u_function",
    "v_function",
    "u_derivative",
    "integrability_rhs",
    "integrability_defect",
    "domain_check",
    "sweep",
    "sweep_csv",
]


@dataclass(frozen=True)
class EinsteinParams:
    A: float
    c: float
    t: float

    def __post_init__(self):
        for k in ("A", "c", "t"):
            object.__setattr__(self, k, float(getattr(self, k)))
        if not self.A > 0.0:
            raise ParameterError(f"A must be positive, got {self.A}")
        if self.t < 0.0:
            raise ParameterError(f"t must be non-negative, got {self.t}")

    @property
    def radicand(self):
        return self.A**2 - 2.0 * self.c * self.t


def _root(p):
    r = p.radicand
    if r < 0.0:
        raise DomainError(
            f"A^2 - 2ct = {r:.6g} < 0 at A={p.A}, c={p.c}, t={p.t}; "
            f"the tube bound t < A^2/c admits such t (radicand needs t <= A^2/(2c))"
        )
    return np.sqrt(r)


def u_function(p):
    return float(p.A + _root(p))


def v_function(p):
    s = _root(p)
    return float(p.c / (p.A + s) - 2.0 * p.c / p.A)


def u_derivative(p):
    """``du/dt = -c / sqrt(A^2 - 2ct)``."""
    s = _root(p)
    if s == 0.0:
        if p.c == 0.0:
            return 0.0
        raise DomainError("du/dt is unbounded where A^2 - 2ct = 0")
    return float(-p.c / s)


def integrability_rhs(p):
    """``(c - u u') / (2 t u' - u)``."""
    u = u_function(p)
    du = u_derivative(p)
    den = 2.0 * p.t * du - u
    if abs(den) < 1e-300:
        raise ParameterError(f"2 t u' - u vanishes at A={p.A}, c={p.c}, t={p.t}")
    return float((p.c - u * du) / den)


def integrability_defect(p):
    return abs(v_function(p) - integrability_rhs(p))


@dataclass
class DomainReport:
    params: EinsteinParams
    radicand: float
    radicand_ok: bool
    tube_bound: float  # A^2 / c for c > 0, else inf
    tube_ok: bool
    u_positive: bool
    u_plus_2tv_positive: bool
    inconsistent: bool

    @property
    def ok(self):
        return self.radicand_ok and self.u_positive and self.u_plus_2tv_positive

    def as_dict(self):
        return {
            "A": self.params.A,
            "c": self.params.c,
            "t": self.params.t,
            "radicand": self.radicand,
            "radicand_ok": self.radicand_ok,
            "tube_bound": self.tube_bound,
            "tube_ok": self.tube_ok,
            "u_positive": self.u_positive,
            "u_plus_2tv_positive": self.u_plus_2tv_positive,
            "inconsistent": self.inconsistent,
            "ok": self.ok,
        }


def domain_check(p):
    """Report every stated domain condition; flags tube-bound points with a negative radicand."""
    r = p.radicand
    radicand_ok = r >= 0.0
    bound = p.A**2 / p.c if p.c > 0.0 else np.inf
    tube_ok = p.t < bound
    if radicand_ok:
        u = u_function(p)
        v = v_function(p)
        u_pos = u > 0.0
        u2tv = u + 2.0 * p.t * v > 0.0
    else:
        u_pos = u2tv = False
    return DomainReport(
        p,
        r,
        radicand_ok,
        float(bound),
        tube_ok,
        u_pos,
        u2tv,
        inconsistent=tube_ok and not radicand_ok,
    )


SWEEP_COLUMNS = ("A", "c", "t", "u", "v", "defect", "domain_ok")


def sweep(A_values, c_values, t_values):
    """Rows ``(A, c, t, u, v, defect, domain_ok)``; invalid points carry NaN values."""
    rows = []
    for A in A_values:
        for c in c_values:
            for t in t_values:
                p = EinsteinParams(A, c, t)
                rep = domain_check(p)
                if rep.radicand_ok:
                    try:
                        u, v, defect = u_function(p), v_function(p), integrability_defect(p)
                    except (DomainError, ParameterError):
                        u, v, defect = u_function(p), v_function(p), float("nan")
                else:
                    u = v = defect = float("nan")
                rows.append((p.A, p.c, p.t, u, v, defect, rep.ok))
    return rows


def sweep_csv(rows, fh=None):
    own = fh is None
    buf = io.StringIO() if own else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([repr(float(v)) for v in row[:-1]] + [str(bool(row[-1])).lower()])
    return buf.getvalue() if own else None
