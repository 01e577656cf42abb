"""Exception hierarchy shared by every module."""


class SharpConcError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(SharpConcError, ValueError):
    """An argument is non-finite, out of range, or otherwise malformed."""


class DomainError(InvalidArgumentError):
    """A probability argument lies outside the open interval (0, 1)."""


class GridSpecError(InvalidArgumentError):
    """Grid specifications are invalid or do not match."""


class WindowOverflowError(SharpConcError):
    """An enlargement or rasterized body reaches the edge of the grid window."""


class DegenerateMassError(SharpConcError):
    """The Gaussian mass of a set is 0 or 1 within its error bound."""


class VolumeMismatchError(SharpConcError):
    """A Euclidean check needs |E| = |K| but the volumes differ."""


class GenerationError(SharpConcError):
    """A scenario family cannot be realized with the requested parameters."""


class ConfigError(SharpConcError):
    """A run configuration file or flag could not be parsed."""
