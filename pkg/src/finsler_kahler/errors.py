"""Exception hierarchy shared by all modules."""


class FinslerError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FinslerError, ValueError):
    """A field was evaluated outside its domain (non-finite value)."""


class OrderError(FinslerError, ValueError):
    """A derivative was requested above the order a jet carries."""


class RegularityError(FinslerError, ValueError):
    """A metric is singular or not positive definite."""


class DegenerateLagrangianError(RegularityError):
    """The fiber Hessian of a Lagrangian is singular."""


class ParameterError(FinslerError, ValueError):
    """A model parameter violates its constraint."""


class NullSectionError(FinslerError):
    """A flow reached the zero section y = 0.

    The partial trajectory integrated so far is attached as ``trajectory``.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StiffnessError(FinslerError):
    """Adaptive step size underflowed."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConfigError(FinslerError, ValueError):
    """A run configuration failed validation."""
