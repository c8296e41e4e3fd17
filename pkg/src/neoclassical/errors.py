"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`NeoclassicalError`, which itself is a :class:`ValueError` so callers
that only guard against bad values keep working.
"""


class NeoclassicalError(ValueError):
    """Base class for all package errors."""


class DomainError(NeoclassicalError):
    """An argument lies outside the domain of the operation (e.g. p not in (0, 1))."""


class GridError(NeoclassicalError):
    """A grid is too short, not increasing, or not uniformly spaced."""


class DegenerateInputError(NeoclassicalError):
    """Input carries no usable mass: all-zero density, zero-variance sample, ..."""


class CovarianceError(NeoclassicalError):
    pass


class ObjectiveError(NeoclassicalError):
    """An objective or criterion function returned NaN or an unusable value."""


class AlignmentError(NeoclassicalError):
    """A region member does not sit on the grid of the density it is measured against."""


class ConfigError(NeoclassicalError):
    pass


class IngestionError(NeoclassicalError):
    pass
