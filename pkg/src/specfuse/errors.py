"""Exception hierarchy shared across the package.

Every error carries a short ``category`` slug that the command line
interface prints in front of the message, so scripted callers can
dispatch on a stable token instead of parsing prose.
"""


class SpecfuseError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"


class ShapeError(SpecfuseError, ValueError):
    """Array dimensions are inconsistent with the requested operation."""

    category = "shape-error"


class ParameterError(SpecfuseError, ValueError):
    """A scalar parameter is out of its documented range."""

    category = "parameter-error"


class DegeneracyError(SpecfuseError, ValueError):
    """Input data is numerically degenerate (rank-deficient, zero norm, ...)."""

    category = "degeneracy-error"


class ConfigError(SpecfuseError, ValueError):
    """A configuration document is malformed or holds unknown keys."""

    category = "config-error"


class ParseError(SpecfuseError, ValueError):
    """A file could not be parsed; the message names the offending location."""

    category = "parse-error"


class SizeError(SpecfuseError, ValueError):
    """An on-disk payload does not match the size announced by its header."""

    category = "size-error"


class DivergenceError(SpecfuseError, RuntimeError):
    """The iterative solver produced a non-finite objective value."""

    category = "divergence-error"
