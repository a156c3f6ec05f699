"""Exception types shared across qrlab modules."""


class QrlabError(Exception):
    """Base class for qrlab errors."""


class DomainError(QrlabError, ValueError):
    """An argument violates a documented precondition."""


class EndpointError(DomainError):
    """A Strichartz pair landed on or past the excluded endpoint r = 2."""


class NoSolutionError(DomainError):
    """The governing equation has no admissible solution."""


class DegenerateAssumptionsError(DomainError):
    """Kernel-bound assumptions degenerate (sigma_inf == sigma_2)."""


class ResolutionError(DomainError):
    """Sampling too coarse to resolve the requested oscillation."""


class AliasingError(DomainError):
    """Symbol frequency support exceeds the grid's resolved band."""


class EllipticityError(DomainError):
    """Symbol vanishes where ellipticity was required."""


class DegeneracyError(DomainError):
    """Non-degeneracy condition (A1) fails at the requested point."""


class CausticError(QrlabError):
    """Characteristic flow develops a caustic inside the horizon."""

    def __init__(self, message, critical_time=None):
        super().__init__(message)
        self.critical_time = critical_time


class DomainEscapeError(QrlabError):
    """Characteristic flow leaves the sampled coordinate box."""


class PlacementError(DomainError):
    """Wave packet leaks past the periodic seam."""


class DomainSizeError(DomainError):
    """Grid too small to contain the requested mode."""


class BudgetError(QrlabError):
    """A dense computation exceeds the configured size budget."""


class CollinearityError(QrlabError):
    """Regression design matrix is degenerate."""


class DataError(QrlabError):
    """Input data unusable for the requested fit."""


class ConfigError(QrlabError):
    """Experiment configuration failed validation."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
