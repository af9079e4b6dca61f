"""Randomised invariant suite behind the ``verify`` command.

Each check returns ``(samples, max_defect)`` and passes when
``max_defect <= tolerance``.  :data:`INVARIANTS` is the authoritative list;
a report always contains exactly one entry per registered name.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import connection as cn
from . import dynamics as dy
from . import einstein as es
from . import finsler as fs
from . import jetcalc as jc
from . import kahler as kh
from .integrate import IntegratorConfig, hamiltonian_flow, integrate, lagrangian_flow

__all__ = [
    "Entry",
    "VerificationReport",
    "INVARIANTS",
    "A_VALUES",
    "FD_STEPS",
    "sample_points",
    "run_verification",
    "richardson_ratio",
    "harmonic_hamiltonian",
    "sample_lagrangian",
    "projectile_lagrangian",
]

A_VALUES = (0.5, 1.0, 2.0)
# order -> (step ladder, Richardson); see jetcalc.finite_difference_defect
FD_STEPS = {1: ((1e-6,), False), 2: ((1e-4, 3e-4, 1e-3), True), 3: ((3e-3, 1e-2, 3e-2), True)}
# expensive checks never use more than this many points
HEAVY_CAP = 100
TRAJECTORY_COUNT = 3


def sample_points(F, count, rng, box=None):
    """Base points uniform in a box; fibers uniform on the sphere with log-uniform radius in [0.1, 10]."""
    lo, hi = box if box is not None else F.box()
    n = F.n
    pts = []
    for _ in range(count):
        x = rng.uniform(lo, hi, size=n)
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        r = np.exp(rng.uniform(np.log(0.1), np.log(10.0)))
        pts.append(fs.PhasePoint(x, r * d))
    return pts


def harmonic_hamiltonian(n=1):
    def H(x, y):
        return 0.5 * sum(x[i] * x[i] + y[i] * y[i] for i in range(n))

    return dy.HamiltonianSpec(H, "harmonic")


def sample_lagrangian(n, masses=None):
    """Standard Lagrangian with a nonlinear height used by the invariant checks."""
    masses = np.linspace(0.8, 1.6, n) if masses is None else masses

    def height(x):
        h = x[0]
        if n > 1:
            h = h + 0.5 * x[1] * x[1]
        return h

    return dy.lagrangian_standard(masses, 9.8, height)


def projectile_lagrangian(n=2):
    return dy.lagrangian_standard(np.ones(n), 9.8, lambda x: x[n - 1])


def richardson_ratio(flow, p0, T, h):
    """``|z_h - z_{h/2}| / |z_{h/2} - z_{h/4}|`` of RK4 endpoints (16 for a 4th-order method)."""
    ends = [
        integrate(flow, p0, (0.0, T), IntegratorConfig("rk4-fixed", step=h / 2**k)).z[-1] for k in range(3)
    ]
    return float(np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2]))


@dataclass
class Entry:
    name: str
    samples: int
    max_defect: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_defect <= self.tolerance)

    def as_dict(self):
        return {
            "name": self.name,
            "samples": self.samples,
            "maxDefect": _json_float(self.max_defect),
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def _json_float(v):
    v = float(v)
    return v if np.isfinite(v) else None


@dataclass
class VerificationReport:
    entries: list
    environment: dict
    diagnostics: list = field(default_factory=list)

    @property
    def passed(self):
        return all(e.passed for e in self.entries)

    def entry(self, name):
        return next(e for e in self.entries if e.name == name)

    def as_dict(self):
        return {
            "environment": self.environment,
            "entries": [e.as_dict() for e in self.entries],
            "diagnostics": self.diagnostics,
            "pass": self.passed,
        }

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n"


class _Context:
    def __init__(self, F, points, a_values, rng):
        self.F = F
        self.points = points
        self.a_values = a_values
        self.rng = rng

    @property
    def heavy(self):
        return self.points[:HEAVY_CAP]


INVARIANTS = {}


def invariant(name, tolerance):
    def register(fn):
        INVARIANTS[name] = (fn, tolerance)
        return fn

    return register


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))


# jetcalc ---------------------------------------------------------------


def _builtin_fields(ctx):
    F = ctx.F
    L = sample_lagrangian(F.n)
    H = harmonic_hamiltonian(F.n)
    return [F.F, F.energy2, L.L, H.H]


@invariant("jetcalc.hessian_symmetry", 0.0)
def _hess_sym(ctx):
    worst = 0.0
    for p in ctx.heavy:
        for f in _builtin_fields(ctx):
            j = jc.evaluate_jet(f, p, 3)
            worst = max(worst, float(np.max(np.abs(j.hess - j.hess.T))))
    return len(ctx.heavy), worst


@invariant("jetcalc.third_symmetry", 0.0)
def _third_sym(ctx):
    worst = 0.0
    perms = [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    for p in ctx.heavy:
        for f in _builtin_fields(ctx):
            t = jc.evaluate_jet(f, p, 3).third
            worst = max(worst, max(float(np.max(np.abs(t - t.transpose(pm)))) for pm in perms))
    return len(ctx.heavy), worst


def _fd_check(order):
    def check(ctx):
        worst = 0.0
        for p in ctx.heavy:
            for f in _builtin_fields(ctx):
                steps, richardson = FD_STEPS[order]
                worst = max(worst, jc.finite_difference_defect(f, p, order, steps, richardson))
        return len(ctx.heavy), worst

    return check


invariant("jetcalc.fd_order1", 1e-6)(_fd_check(1))
invariant("jetcalc.fd_order2", 1e-4)(_fd_check(2))
invariant("jetcalc.fd_order3", 1e-4)(_fd_check(3))


# finsler-core ----------------------------------------------------------


@invariant("finsler.conditions", 0.0)
def _conditions(ctx):
    rep = fs.validate_finsler(ctx.F, ctx.points)
    return len(ctx.points), float(sum(c.failures for c in rep.conditions.values()))


@invariant("finsler.metric_homogeneity", 1e-9)
def _metric_hom(ctx):
    worst = 0.0
    for p in ctx.points:
        g = fs.metric_tensor(ctx.F, p).g
        for lam in fs.HOMOGENEITY_FACTORS:
            worst = max(worst, float(np.max(np.abs(fs.metric_tensor(ctx.F, p.scaled(lam)).g - g))))
    return len(ctx.points), worst


@invariant("finsler.metric_symmetry", 0.0)
def _metric_sym(ctx):
    worst = 0.0
    for p in ctx.points:
        g = fs.metric_tensor(ctx.F, p).g
        worst = max(worst, float(np.max(np.abs(g - g.T))))
    return len(ctx.points), worst


@invariant("finsler.norm_identity", 1e-10)
def _norm_identity(ctx):
    worst = 0.0
    for p in ctx.points:
        yl = fs.lower_index(ctx.F, p)
        worst = max(worst, abs(yl @ p.y - ctx.F.norm(p) ** 2) / max(1.0, ctx.F.norm(p) ** 2))
    return len(ctx.points), worst


@invariant("finsler.lower_index_agreement", 1e-10)
def _lower_agree(ctx):
    worst = 0.0
    for p in ctx.points:
        a = fs.lower_index(ctx.F, p, "metric")
        b = fs.lower_index(ctx.F, p, "gradient")
        worst = max(worst, _rel(a, b))
    return len(ctx.points), worst


@invariant("finsler.euler_relation", 1e-10)
def _euler(ctx):
    worst = 0.0
    n = ctx.F.n
    for p in ctx.points:
        j = jc.evaluate_jet(ctx.F.F, p, 1)
        worst = max(worst, abs(j.grad[n:] @ p.y - j.value) / max(1.0, abs(j.value)))
    return len(ctx.points), worst


@invariant("finsler.inverse_metric", 1e-12)
def _inverse(ctx):
    worst = 0.0
    for p in ctx.points:
        g = fs.metric_tensor(ctx.F, p)
        gi = fs.inverse_metric(g)
        defect = np.max(np.abs(g.g @ gi.g - np.eye(p.n))) / np.linalg.cond(g.g)
        worst = max(worst, float(defect))
    return len(ctx.points), worst


# connection ------------------------------------------------------------


@invariant("connection.duality", 0.0)
def _duality(ctx):
    worst = 0.0
    for p in ctx.heavy:
        fr = cn.adapted_frame(ctx.F, p)
        worst = max(worst, float(np.max(np.abs(fr.pairing() - np.eye(2 * p.n)))))
    return len(ctx.heavy), worst


@invariant("connection.spray_homogeneity", 1e-9)
def _spray_hom(ctx):
    worst = 0.0
    for p in ctx.heavy:
        G = cn.spray_coefficients(ctx.F, p).G
        for lam in (0.5, 2.0):
            worst = max(worst, _rel(cn.spray_coefficients(ctx.F, p.scaled(lam)).G, lam**2 * G))
    return len(ctx.heavy), worst


@invariant("connection.connection_homogeneity", 1e-9)
def _conn_hom(ctx):
    worst = 0.0
    for p in ctx.heavy:
        N = cn.nonlinear_connection(ctx.F, p).N
        for lam in (0.5, 2.0):
            worst = max(worst, _rel(cn.nonlinear_connection(ctx.F, p.scaled(lam)).N, lam * N))
    return len(ctx.heavy), worst


@invariant("connection.riemannian_consistency", 1e-9)
def _riemann(ctx):
    F = fs.polar()
    pts = sample_points(F, len(ctx.heavy), ctx.rng)
    worst = 0.0
    for p in pts:
        N = cn.nonlinear_connection(F, p).N
        Gam = cn.levi_civita(fs._polar_metric, p.x)
        worst = max(worst, float(np.max(np.abs(N - np.einsum("ijk,k->ij", Gam, p.y)))))
    return len(pts), worst


@invariant("connection.minkowski_zero", 0.0)
def _minkowski(ctx):
    worst = 0.0
    count = 0
    fields = [fs.quartic(ctx.F.n), fs.euclidean(ctx.F.n)]
    if ctx.F.kind in ("euclidean", "quartic", "randers"):
        fields.append(ctx.F)
    for F in fields:
        for p in ctx.heavy:
            G = cn.spray_coefficients(F, p).G
            N = cn.nonlinear_connection(F, p).N
            worst = max(worst, float(np.max(np.abs(G))), float(np.max(np.abs(N))))
            count += 1
    return count, worst


@invariant("connection.horizontal_energy", 1e-9)
def _horizontal_energy(ctx):
    worst = 0.0
    for p in ctx.heavy:
        hg = cn.horizontal_gradient(ctx.F, ctx.F.energy2, p)
        worst = max(worst, float(np.max(np.abs(hg))) / max(1.0, ctx.F.norm(p) ** 2))
    return len(ctx.heavy), worst


# kahler-model ----------------------------------------------------------


@invariant("kahler.involution", 1e-12)
def _involution(ctx):
    worst = 0.0
    for p in ctx.points:
        for a in ctx.a_values:
            J = kh.homogeneous_almost_complex(ctx.F, p, kh.ModelParams(a)).matrix
            worst = max(worst, float(np.max(np.abs(J @ J + np.eye(2 * p.n)))))
    return len(ctx.points) * len(ctx.a_values), worst


@invariant("kahler.hermitian", 1e-10)
def _hermitian(ctx):
    worst = 0.0
    for p in ctx.points:
        for a in ctx.a_values:
            worst = max(worst, kh.hermitian_defect(ctx.F, p, kh.ModelParams(a)))
    return len(ctx.points) * len(ctx.a_values), worst


@invariant("kahler.sasaki_hermitian", 1e-12)
def _sasaki_hermitian(ctx):
    worst = 0.0
    for p in ctx.points:
        worst = max(worst, kh.compatibility_defect(kh.sasaki_lift(ctx.F, p), kh.almost_complex(ctx.F, p)))
    return len(ctx.points), worst


@invariant("kahler.lift_definiteness", 0.0)
def _lift_pd(ctx):
    failures = 0
    for p in ctx.points:
        lifts = [kh.sasaki_lift(ctx.F, p)] + [
            kh.homogeneous_lift(ctx.F, p, kh.ModelParams(a)) for a in ctx.a_values
        ]
        for G in lifts:
            try:
                np.linalg.cholesky(G.matrix)
            except np.linalg.LinAlgError:
                failures += 1
    return len(ctx.points), float(failures)


@invariant("kahler.homogeneous_reduces_to_sasaki", 0.0)
def _reduces(ctx):
    worst = 0.0
    for p in ctx.points:
        m = kh.ModelParams(ctx.F.norm(p))
        worst = max(
            worst, float(np.max(np.abs(kh.homogeneous_lift(ctx.F, p, m).matrix - kh.sasaki_lift(ctx.F, p).matrix)))
        )
    return len(ctx.points), worst


@invariant("kahler.theta_antisymmetry", 0.0)
def _theta_anti(ctx):
    worst = 0.0
    for p in ctx.points:
        T = kh.symplectic_form_theta(ctx.F, p).matrix
        worst = max(worst, float(np.max(np.abs(T + T.T))))
    return len(ctx.points), worst


@invariant("kahler.theta_nondegenerate", 1e-9)
def _theta_det(ctx):
    worst = 0.0
    for p in ctx.points:
        T = kh.symplectic_form_theta(ctx.F, p).matrix
        dg = np.linalg.det(fs.metric_tensor(ctx.F, p).g)
        worst = max(worst, abs(np.linalg.det(T) - dg**2) / dg**2)
    return len(ctx.points), worst


@invariant("kahler.theta_taming", 0.0)
def _taming(ctx):
    failures = 0
    for p in ctx.points:
        m = kh.ModelParams(ctx.F.norm(p))
        T = kh.symplectic_form_theta(ctx.F, p).matrix
        J = kh.homogeneous_almost_complex(ctx.F, p, m).matrix
        X = ctx.rng.normal(size=2 * p.n)
        if not X @ T @ (J @ X) > 0.0:
            failures += 1
    return len(ctx.points), float(failures)


# dynamics --------------------------------------------------------------


@invariant("dynamics.el_family1", 1e-10)
def _family1(ctx):
    L = sample_lagrangian(ctx.F.n)
    worst = 0.0
    count = 0
    for p in ctx.heavy:
        for a in ctx.a_values:
            m = kh.ModelParams(a)
            ydot = dy.el_rhs(L, ctx.F, p, m)
            r1, _ = dy.el_residual(L, ctx.F, p, ydot, m)
            Ly = jc.evaluate_jet(L, p, 1).grad[p.n :]
            worst = max(worst, float(np.linalg.norm(r1)) / (1.0 + float(np.linalg.norm(Ly))))
            count += 1
    return count, worst


@invariant("dynamics.free_straight_lines", 0.0)
def _free(ctx):
    n = ctx.F.n
    L = dy.lagrangian_standard(np.ones(n), 0.0, None)
    worst = 0.0
    count = 0
    for F in (fs.euclidean(n), fs.quartic(n)):
        for p in ctx.heavy:
            worst = max(worst, float(np.max(np.abs(dy.el_rhs(L, F, p, kh.ModelParams(1.0))))))
            count += 1
    x0 = np.zeros(n)
    y0 = np.zeros(n)
    y0[0] = 1.0
    tr = integrate(
        lagrangian_flow(L, fs.euclidean(n), kh.ModelParams(1.0)),
        fs.PhasePoint(x0, y0),
        (0.0, 1.0),
        IntegratorConfig("rk4-fixed", step=0.01),
    )
    # straight line x(t) = t y0 lands on y0 at t = 1 up to rounding
    endpoint = float(np.max(np.abs(tr.z[-1, :n] - y0)))
    return count + 1, max(worst, 0.0 if endpoint <= 1e-12 else endpoint)


def _identity_samples(ctx):
    L = sample_lagrangian(ctx.F.n)
    m = kh.ModelParams(1.0)
    flow = lagrangian_flow(L, ctx.F, m)
    out = []
    for p0 in ctx.points[:TRAJECTORY_COUNT]:
        tr = integrate(flow, p0, (0.0, 0.25), IntegratorConfig("rk45-adaptive", tol=1e-10))
        idx = np.unique(np.linspace(0, len(tr) - 1, 8).astype(int))
        for k in idx:
            p = fs.PhasePoint.from_z(tr.z[k])
            ydot = dy.el_rhs(L, ctx.F, p, m)
            out.append(dy.lagrangian_identity_residual(L, ctx.F, p, ydot, m))
    return out


@invariant("dynamics.lagrangian_identity_horizontal", 1e-7)
def _identity(ctx):
    res = _identity_samples(ctx)
    ctx.identity_vertical = max(float(np.linalg.norm(r.vertical)) for r in res)
    return len(res), max(float(np.linalg.norm(r.horizontal)) for r in res)


@invariant("dynamics.liouville_consistency", 0.0)
def _liouville(ctx):
    worst = 0.0
    for p in ctx.heavy:
        m = kh.ModelParams(1.0)
        xi = dy.SemisprayState(p, ctx.rng.normal(size=p.n))
        V = dy.liouville_vector_field(xi, ctx.F, m).matrix
        J = kh.homogeneous_almost_complex(ctx.F, p, m).matrix
        worst = max(worst, float(np.max(np.abs(V - J @ xi.components))))
    return len(ctx.heavy), worst


@invariant("dynamics.hamilton_conservation", 1e-8)
def _conservation(ctx):
    H = harmonic_hamiltonian(1)
    tr = integrate(
        hamiltonian_flow(H, fs.euclidean(1), kh.ModelParams(1.0)),
        fs.PhasePoint([0.0], [1.0]),
        (0.0, 10.0),
        IntegratorConfig("rk45-adaptive", tol=1e-10),
    )
    return len(tr), float(np.max(np.abs(tr.energy - tr.energy[0])) / abs(tr.energy[0]))


@invariant("dynamics.rk4_order", 0.2)
def _order(ctx):
    flow = lagrangian_flow(projectile_lagrangian(2), fs.euclidean(2), kh.ModelParams(1.0))
    ratio = richardson_ratio(flow, fs.PhasePoint([0.0, 0.0], [3.0, 4.0]), 1.0, 0.1)
    # defect: shortfall of the observed order below 4
    return 3, max(0.0, 4.0 - float(np.log2(ratio)))


# einstein --------------------------------------------------------------

EINSTEIN_A = (1.0, 2.0, 5.0)
EINSTEIN_C = (-2.0, -1.0, -0.5, 0.5, 1.0)
EINSTEIN_T = tuple(round(0.01 * k, 2) for k in range(1, 301))


def _einstein_grid():
    for A in EINSTEIN_A:
        for c in EINSTEIN_C:
            for t in EINSTEIN_T:
                p = es.EinsteinParams(A, c, t)
                if p.radicand > 0.0:
                    yield p


@invariant("einstein.integrability", 1e-9)
def _integrability(ctx):
    defects = [es.integrability_defect(p) for p in _einstein_grid()]
    return len(defects), max(defects)


@invariant("einstein.u_positive", 0.0)
def _u_pos(ctx):
    pts = list(_einstein_grid())
    return len(pts), float(sum(not es.u_function(p) > 0.0 for p in pts))


@invariant("einstein.v_positive_negative_curvature", 0.0)
def _v_pos(ctx):
    pts = [p for p in _einstein_grid() if p.c < 0.0]
    return len(pts), float(sum(not es.v_function(p) > 0.0 for p in pts))


@invariant("einstein.v_limit", 1e-6)
def _v_limit(ctx):
    worst = 0.0
    for A in EINSTEIN_A:
        for c in EINSTEIN_C:
            v = es.v_function(es.EinsteinParams(A, c, 1e-8))
            worst = max(worst, abs(v + 3.0 * c / (2.0 * A)))
    return len(EINSTEIN_A) * len(EINSTEIN_C), worst


# runner ----------------------------------------------------------------


def run_verification(F, samples=1000, seed=42, a=1.0, only=None):
    """Evaluate every registered invariant on ``F``; returns a :class:`VerificationReport`."""
    rng = np.random.default_rng(seed)
    points = sample_points(F, samples, rng)
    a_values = tuple(sorted(set(A_VALUES) | {float(a)}))
    ctx = _Context(F, points, a_values, rng)
    entries = []
    for name, (fn, tol) in INVARIANTS.items():
        if only is not None and name not in only:
            continue
        count, defect = fn(ctx)
        entries.append(Entry(name, int(count), float(defect), tol))
    diagnostics = []
    if hasattr(ctx, "identity_vertical"):
        diagnostics.append(
            {
                "name": "dynamics.lagrangian_identity_vertical",
                "maxDefect": _json_float(ctx.identity_vertical),
                "note": "vertical part of i_xi Phi_L - dE_L equals minus the family-2 residual; not enforced",
            }
        )
    env = {
        "seed": int(seed),
        "samples": int(samples),
        "metric": {"kind": F.kind, "dimension": F.n, "params": F.params},
        "a": list(a_values),
    }
    return VerificationReport(entries, env, diagnostics)
