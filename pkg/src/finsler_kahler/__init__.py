"""Almost Kahler model of a Finsler manifold: geometry, dynamics, checks."""

from . import connection, dynamics, einstein, finsler, integrate, jetcalc, kahler
from .errors import (
    ConfigError,
    DegenerateLagrangianError,
    DomainError,
    FinslerError,
    NullSectionError,
    OrderError,
    ParameterError,
    RegularityError,
    StiffnessError,
)
from .finsler import FundamentalFunction, PhasePoint
from .kahler import AdaptedTensor, ModelParams

__version__ = "0.1.0"

__all__ = [
    "connection",
    "dynamics",
    "einstein",
    "finsler",
    "integrate",
    "jetcalc",
    "kahler",
    "AdaptedTensor",
    "ConfigError",
    "DegenerateLagrangianError",
    "DomainError",
    "FinslerError",
    "FundamentalFunction",
    "ModelParams",
    "NullSectionError",
    "OrderError",
    "ParameterError",
    "PhasePoint",
    "RegularityError",
    "StiffnessError",
]
