"""YAML run configuration for the command line.

A minimal document::

    metric:
      kind: euclidean
      dimension: 2
    initial:
      x: [0, 0]
      y: [1, 0]

Every omitted field takes the default shown in the models below.  Unknown
keys are rejected, and every error names the dotted key path it concerns.
"""

from typing import List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import dynamics as dy
from . import finsler as fs
from .errors import ConfigError, FinslerError
from .expressions import compile_field
from .integrate import METHODS, IntegratorConfig, hamiltonian_flow, lagrangian_flow
from .kahler import ModelParams

__all__ = [
    "RunConfig",
    "parse_config",
    "load_config",
    "build_metric",
    "build_model",
    "build_system",
    "build_flow",
    "build_integrator",
    "initial_point",
    "einstein_grid",
    "METRIC_KINDS",
]

METRIC_KINDS = ("euclidean", "polar", "randers", "quartic", "riemannian", "custom")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MetricConfig(_Strict):
    kind: Literal[METRIC_KINDS]
    dimension: int = Field(2, ge=1)
    parameters: dict = Field(default_factory=dict)
    box: Optional[List[List[float]]] = None


class ModelConfig(_Strict):
    a: float = 1.0

    @field_validator("a")
    @classmethod
    def _positive(cls, v):
        if not (np.isfinite(v) and v > 0.0):
            raise ValueError(f"model constant must satisfy a > 0, got {v}")
        return v


class SystemConfig(_Strict):
    type: Literal["lagrange", "hamilton"] = "lagrange"
    masses: Optional[List[float]] = None
    gravity: float = 0.0
    height: Optional[str] = None
    potentialMass: Optional[float] = None
    lagrangian: Optional[str] = None
    hamiltonian: Optional[str] = None
    hamiltonMode: Literal[dy.HAMILTON_MODES] = "plain"


class InitialConfig(_Strict):
    x: List[float]
    y: List[float]
    t0: float = 0.0
    t1: float = 1.0


class IntegratorSection(_Strict):
    method: Literal[METHODS] = "rk45-adaptive"
    step: float = Field(0.01, gt=0)
    tol: float = Field(1e-10, gt=0)
    nullTolerance: float = Field(1e-12, ge=0)


class TimeGrid(_Strict):
    start: float = 0.01
    stop: float = 3.0
    step: float = Field(0.01, gt=0)


class EinsteinConfig(_Strict):
    A: List[float] = Field(default_factory=lambda: [2.0])
    c: List[float] = Field(default_factory=lambda: [-1.0])
    t: TimeGrid = Field(default_factory=TimeGrid)


class OutputConfig(_Strict):
    path: Optional[str] = None
    format: Optional[Literal["csv", "json"]] = None


class RunConfig(_Strict):
    metric: MetricConfig = Field(default_factory=lambda: MetricConfig(kind="euclidean"))
    model: ModelConfig = Field(default_factory=ModelConfig)
    system: SystemConfig = Field(default_factory=SystemConfig)
    initial: Optional[InitialConfig] = None
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    seed: int = 42
    samples: int = Field(1000, ge=1)
    einstein: EinsteinConfig = Field(default_factory=EinsteinConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


def _format_errors(exc):
    lines = []
    for err in exc.errors():
        path = ".".join(str(k) for k in err["loc"]) or "<root>"
        msg = err["msg"]
        if msg.startswith("Value error, "):
            msg = msg[len("Value error, ") :]
        lines.append(f"{path}: {msg}")
    return "; ".join(lines)


def parse_config(text):
    """Parse and validate a YAML document; raises :class:`ConfigError`."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<root>: not a valid YAML document ({exc})") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("<root>: expected a mapping at the top level")
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None
    _check_consistency(cfg)
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None


def _check_consistency(cfg):
    n = cfg.metric.dimension
    if cfg.metric.kind == "polar" and n != 2:
        raise ConfigError("metric.dimension: the polar preset is two-dimensional")
    if cfg.metric.box is not None:
        box = cfg.metric.box
        if len(box) != 2 or any(len(b) != n for b in box):
            raise ConfigError(f"metric.box: expected [lo, hi] with {n} entries each")
        if not all(lo < hi for lo, hi in zip(*box)):
            raise ConfigError("metric.box: every lower bound must be below its upper bound")
    s = cfg.system
    if s.masses is not None:
        if len(s.masses) != n:
            raise ConfigError(f"system.masses: expected {n} entries, got {len(s.masses)}")
        if not all(m > 0 for m in s.masses):
            raise ConfigError("system.masses: masses must be positive")
    if s.type == "hamilton" and s.hamiltonian is None:
        raise ConfigError("system.hamiltonian: required when system.type is hamilton")
    if cfg.initial is not None:
        ini = cfg.initial
        for key in ("x", "y"):
            if len(getattr(ini, key)) != n:
                raise ConfigError(f"initial.{key}: expected {n} entries, got {len(getattr(ini, key))}")
        if not np.any(np.asarray(ini.y) != 0.0):
            raise ConfigError("initial.y: y = 0 lies on the null section; the slit tangent bundle excludes it")
        if not ini.t1 > ini.t0:
            raise ConfigError(f"initial.t1: need t1 > t0, got t0={ini.t0}, t1={ini.t1}")
    grid = cfg.einstein.t
    if grid.start < 0 or grid.stop < grid.start:
        raise ConfigError("einstein.t: need 0 <= start <= stop")
    if not all(A > 0 for A in cfg.einstein.A):
        raise ConfigError("einstein.A: every A must be positive")
    # building the metric validates its parameters
    build_metric(cfg)


def _params(cfg, allowed):
    extra = set(cfg.metric.parameters) - set(allowed)
    if extra:
        raise ConfigError(f"metric.parameters.{sorted(extra)[0]}: unknown parameter for kind {cfg.metric.kind}")
    return cfg.metric.parameters


def build_metric(cfg):
    """The :class:`FundamentalFunction` described by ``cfg.metric``."""
    m = cfg.metric
    n = m.dimension
    box = None if m.box is None else (np.asarray(m.box[0], float), np.asarray(m.box[1], float))
    try:
        if m.kind == "euclidean":
            _params(cfg, ())
            F = fs.euclidean(n)
        elif m.kind == "polar":
            _params(cfg, ())
            F = fs.polar()
        elif m.kind == "quartic":
            _params(cfg, ())
            F = fs.quartic(n)
        elif m.kind == "randers":
            p = _params(cfg, ("b", "alpha", "unchecked"))
            if "b" not in p:
                raise ConfigError("metric.parameters.b: required for kind randers")
            b = np.asarray(p["b"], dtype=float)
            if b.shape != (n,):
                raise ConfigError(f"metric.parameters.b: expected {n} entries")
            alpha = p.get("alpha")
            if alpha is not None and np.asarray(alpha, dtype=float).shape != (n, n):
                raise ConfigError(f"metric.parameters.alpha: expected a {n}x{n} matrix")
            # unchecked lets `validate` report an out-of-range covector instead of refusing it
            F = fs.randers(b, alpha, check=not bool(p.get("unchecked", False)))
        elif m.kind == "riemannian":
            p = _params(cfg, ("g",))
            F = fs.riemannian(_metric_matrix(p.get("g"), n), n, name="config", params={"g": p.get("g")})
        else:
            p = _params(cfg, ("F", "F2"))
            if "F" not in p:
                raise ConfigError("metric.parameters.F: required for kind custom")
            Ff = compile_field(p["F"], n, where="metric.parameters.F")
            F2 = compile_field(p["F2"], n, where="metric.parameters.F2") if "F2" in p else None
            F = fs.custom(Ff, n, F2, params={"F": p["F"]})
    except ConfigError:
        raise
    except (FinslerError, ValueError, TypeError) as exc:
        raise ConfigError(f"metric.parameters: {exc}") from None
    if box is not None:
        F = fs.FundamentalFunction(F.n, F.F, F.kind, F.params, F.F2, box)
    return F


def _metric_matrix(entries, n):
    if entries is None:
        raise ConfigError("metric.parameters.g: required for kind riemannian")
    if len(entries) != n or any(len(row) != n for row in entries):
        raise ConfigError(f"metric.parameters.g: expected a {n}x{n} matrix")
    cells = [
        [compile_field(str(v), n, allow=("x",), where=f"metric.parameters.g.{i}.{j}") for j, v in enumerate(row)]
        for i, row in enumerate(entries)
    ]

    def metric_fn(x):
        return [[cell(x, None) for cell in row] for row in cells]

    return metric_fn


def build_model(cfg):
    return ModelParams(cfg.model.a)


def build_system(cfg):
    """A :class:`LagrangianSpec` or :class:`HamiltonianSpec` from ``cfg.system``."""
    s = cfg.system
    n = cfg.metric.dimension
    if s.type == "hamilton":
        return dy.HamiltonianSpec(compile_field(s.hamiltonian, n, where="system.hamiltonian"), "config")
    if s.lagrangian is not None:
        return dy.LagrangianSpec(compile_field(s.lagrangian, n, where="system.lagrangian"), name="config")
    height = None
    if s.height is not None:
        hf = compile_field(s.height, n, allow=("x",), where="system.height")

        def height(x):
            return hf(x, None)

    if s.gravity != 0.0 and height is None:
        raise ConfigError("system.height: required when gravity is non-zero")
    masses = s.masses if s.masses is not None else [1.0] * n
    return dy.lagrangian_standard(masses, s.gravity, height, s.potentialMass)


def build_flow(cfg):
    F = build_metric(cfg)
    m = build_model(cfg)
    system = build_system(cfg)
    if isinstance(system, dy.HamiltonianSpec):
        return hamiltonian_flow(system, F, m, cfg.system.hamiltonMode)
    return lagrangian_flow(system, F, m)


def build_integrator(cfg):
    i = cfg.integrator
    return IntegratorConfig(i.method, step=i.step, tol=i.tol, null_tolerance=i.nullTolerance)


def initial_point(cfg, command="this command"):
    if cfg.initial is None:
        raise ConfigError(f"initial: required for {command}")
    return fs.PhasePoint(cfg.initial.x, cfg.initial.y)


def einstein_grid(cfg):
    g = cfg.einstein.t
    count = int(np.floor((g.stop - g.start) / g.step + 1e-9)) + 1
    # rounding keeps grid values free of accumulated step error
    return [round(g.start + k * g.step, 12) for k in range(count)]
