"""Time integration of Euler-Lagrange and Hamilton flows with diagnostics."""

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    SemisprayState,
    el_residual,
    el_rhs,
    energy_function,
    hamilton_rhs,
)
from .errors import DomainError, NullSectionError, StiffnessError
from .finsler import PhasePoint

__all__ = [
    "IntegratorConfig",
    "Flow",
    "Trajectory",
    "lagrangian_flow",
    "hamiltonian_flow",
    "integrate",
    "conserved_quantity_drift",
    "METHODS",
    "CSV_COLUMNS",
]

METHODS = ("rk4-fixed", "rk45-adaptive", "implicit-midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45-adaptive"
    step: float = 0.01
    tol: float = 1e-10
    null_tolerance: float = 1e-12
    max_steps: int = 1_000_000
    midpoint_tol: float = 1e-14
    midpoint_iterations: int = 100

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.step > 0 or not self.tol > 0:
            raise ValueError("step and tol must be positive")


@dataclass
class Flow:
    """A first-order system on phase space ``zdot = rhs(z)`` plus diagnostics.

    ``diagnostics(z)`` returns ``(energy, res_family2)``.
    """

    n: int
    rhs: object
    diagnostics: object
    F: object
    system: str = "custom"
    meta: dict = field(default_factory=dict)


def lagrangian_flow(L, F, m):
    n = F.n

    def rhs(z):
        p = PhasePoint.from_z(z)
        return np.concatenate([p.y, el_rhs(L, F, p, m)])

    def diagnostics(z):
        p = PhasePoint.from_z(z)
        ydot = el_rhs(L, F, p, m)
        xi = SemisprayState.from_acceleration(F, p, ydot)
        _, r2 = el_residual(L, F, p, ydot, m)
        return energy_function(L, xi, F, m), float(np.linalg.norm(r2))

    return Flow(n, rhs, diagnostics, F, "lagrange", {"a": m.a, "lagrangian": L.name})


def hamiltonian_flow(H, F, m, mode="plain"):
    n = F.n

    def rhs(z):
        xdot, ydot = hamilton_rhs(H, F, PhasePoint.from_z(z), m, mode)
        return np.concatenate([xdot, ydot])

    def diagnostics(z):
        p = PhasePoint.from_z(z)
        return float(H(p.x, p.y)), float("nan")

    return Flow(n, rhs, diagnostics, F, "hamilton", {"a": m.a, "mode": mode, "hamiltonian": H.name})


CSV_COLUMNS = ("t", "x", "y", "norm_y", "energy", "res_family2", "step_size")


@dataclass
class Trajectory:
    t: np.ndarray
    z: np.ndarray
    norm_y: np.ndarray
    energy: np.ndarray
    res_family2: np.ndarray
    step_size: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.z.shape[1] // 2

    @property
    def x(self):
        return self.z[:, : self.n]

    @property
    def y(self):
        return self.z[:, self.n :]

    def __len__(self):
        return len(self.t)

    def points(self):
        return [PhasePoint.from_z(zi) for zi in self.z]

    def header(self):
        n = self.n
        return (
            ["t"]
            + [f"x{i + 1}" for i in range(n)]
            + [f"y{i + 1}" for i in range(n)]
            + ["norm_y", "energy", "res_family2", "step_size"]
        )

    def rows(self):
        for k in range(len(self.t)):
            yield [self.t[k], *self.z[k], self.norm_y[k], self.energy[k], self.res_family2[k], self.step_size[k]]

    def to_csv(self, fh=None):
        """Write CSV (shortest round-trip floats); returns the text if ``fh`` is None."""
        own = fh is None
        buf = io.StringIO() if own else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header())
        for row in self.rows():
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue() if own else None


class _Recorder:
    def __init__(self, flow, meta):
        self.flow = flow
        self.meta = meta
        self.t, self.z, self.h, self.norm, self.energy, self.res = [], [], [], [], [], []

    def add(self, t, z, h):
        p = PhasePoint.from_z(z)
        energy, res = self.flow.diagnostics(z)
        self.t.append(t)
        self.z.append(np.array(z, dtype=float))
        self.h.append(h)
        self.norm.append(self.flow.F.norm(p))
        self.energy.append(energy)
        self.res.append(res)

    def trajectory(self, **extra):
        return Trajectory(
            np.array(self.t),
            np.array(self.z),
            np.array(self.norm),
            np.array(self.energy),
            np.array(self.res),
            np.array(self.h),
            dict(self.meta, **extra),
        )


def _rk4_step(f, z, h):
    k1 = f(z)
    k2 = f(z + 0.5 * h * k1)
    k3 = f(z + 0.5 * h * k2)
    k4 = f(z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _midpoint_step(f, z, h, tol, iterations):
    z1 = z + h * f(z)
    for _ in range(iterations):
        with np.errstate(over="ignore", invalid="ignore"):
            z_new = z + h * f(0.5 * (z + z1))
        if not np.all(np.isfinite(z_new)):
            break
        if np.max(np.abs(z_new - z1)) <= tol * max(1.0, np.max(np.abs(z_new))):
            return z_new
        z1 = z_new
    raise StiffnessError(f"implicit midpoint fixed-point iteration did not converge (h={h:g})")


# Dormand-Prince 5(4)
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


def _dp_step(f, z, h, k1):
    ks = [k1]
    for s in range(1, 7):
        zs = z + h * sum(a * k for a, k in zip(_DP_A[s], ks))
        ks.append(f(zs))
    K = np.array(ks)
    z5 = z + h * (_DP_B5 @ K)
    err = h * ((_DP_B5 - _DP_B4) @ K)
    return z5, err, ks[-1]


def _segment_distance(y0, y1):
    """Distance from the origin to the segment ``[y0, y1]``."""
    d = y1 - y0
    dd = float(d @ d)
    u = 0.0 if dd == 0.0 else min(1.0, max(0.0, -float(y0 @ d) / dd))
    return float(np.linalg.norm(y0 + u * d))


def _on_null_section(flow, z_prev, z, tol):
    """True when the step ends on, or passes through, the null section."""
    n = flow.n
    if _segment_distance(z_prev[n:], z[n:]) <= tol:
        return True
    return flow.F.norm(PhasePoint.from_z(z)) <= tol


def integrate(flow, p0, tspan, cfg=None):
    """Integrate ``flow`` from ``p0`` over ``tspan = (t0, t1)``; every step is a sample."""
    cfg = cfg or IntegratorConfig()
    t0, t1 = map(float, tspan)
    if not t1 > t0:
        raise ValueError("tspan must satisfy t1 > t0")
    z = np.asarray(p0.z, dtype=float)
    meta = dict(flow.meta, system=flow.system, method=cfg.method, t0=t0, t1=t1)
    meta.update(step=cfg.step) if cfg.method != "rk45-adaptive" else meta.update(tol=cfg.tol)
    rec = _Recorder(flow, meta)
    rec.add(t0, z, 0.0)
    try:
        if cfg.method == "rk45-adaptive":
            _run_adaptive(flow, z, t0, t1, cfg, rec)
        else:
            _run_fixed(flow, z, t0, t1, cfg, rec)
    except DomainError as exc:
        raise NullSectionError(f"flow left the slit bundle: {exc}", rec.trajectory(aborted=True)) from exc
    return rec.trajectory()


def _accept(flow, cfg, rec, t, z_prev, z, h):
    if _on_null_section(flow, z_prev, z, cfg.null_tolerance):
        raise NullSectionError(
            f"flow reached the null section in the step ending at t={t!r} (|y| <= {cfg.null_tolerance:g})",
            rec.trajectory(aborted=True),
        )
    rec.add(t, z, h)


def _run_fixed(flow, z, t0, t1, cfg, rec):
    steps = max(1, int(round((t1 - t0) / cfg.step)))
    h = (t1 - t0) / steps
    if steps > cfg.max_steps:
        raise ValueError(f"{steps} steps exceed max_steps={cfg.max_steps}")
    for k in range(1, steps + 1):
        if cfg.method == "rk4-fixed":
            z_new = _rk4_step(flow.rhs, z, h)
        else:
            try:
                z_new = _midpoint_step(flow.rhs, z, h, cfg.midpoint_tol, cfg.midpoint_iterations)
            except StiffnessError as exc:
                raise StiffnessError(str(exc), rec.trajectory(aborted=True)) from None
        if not np.all(np.isfinite(z_new)):
            raise StiffnessError(f"state blew up in the step ending at t={t0 + k * h!r}", rec.trajectory(aborted=True))
        _accept(flow, cfg, rec, t0 + k * h, z, z_new, h)
        z = z_new


def _run_adaptive(flow, z, t0, t1, cfg, rec):
    rtol = atol = cfg.tol
    t = t0
    k1 = flow.rhs(z)
    scale = atol + rtol * np.abs(z)
    d0 = np.sqrt(np.mean((z / scale) ** 2))
    d1 = np.sqrt(np.mean((k1 / scale) ** 2))
    h = 0.01 * d0 / d1 if d0 > 1e-5 and d1 > 1e-5 else 1e-6
    h = min(h, t1 - t0)
    for _ in range(cfg.max_steps):
        if t >= t1:
            return
        h = min(h, t1 - t)
        if h <= 1e-14 * max(1.0, abs(t)):
            raise StiffnessError(f"step size underflow at t={t!r}", rec.trajectory(aborted=True))
        z_new, err, k_last = _dp_step(flow.rhs, z, h, k1)
        scale = atol + rtol * np.maximum(np.abs(z), np.abs(z_new))
        e = float(np.sqrt(np.mean((err / scale) ** 2)))
        if e <= 1.0:
            t = t1 if t1 - (t + h) <= 1e-15 * max(1.0, abs(t1)) else t + h
            _accept(flow, cfg, rec, t, z, z_new, h)
            z = z_new
            k1 = k_last
        factor = 5.0 if e == 0.0 else min(5.0, max(0.2, 0.9 * e**-0.2))
        if e > 1.0:
            factor = min(factor, 1.0)
        h *= factor
    raise StiffnessError(f"max_steps={cfg.max_steps} reached before t1", rec.trajectory(aborted=True))


def conserved_quantity_drift(tr, q):
    """``max_t |q(p(t)) - q(p(t0))|`` for a field ``q(x, y)``."""
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    vals = np.array([float(q(zi[: tr.n], zi[tr.n :])) for zi in tr.z])
    return float(np.max(np.abs(vals - vals[0])))
