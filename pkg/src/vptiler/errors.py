"""Exception types shared across the package."""


class VptilerError(Exception):
    """Base class for all errors raised by this package."""


class TraceError(VptilerError):
    """Bad head-movement trace input (parse or domain failure)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingUserError(TraceError):
    """A user referenced by the pipeline has no samples."""


class EmptyInputError(VptilerError):
    """An operation received an empty collection it cannot work with."""


class GeometryError(VptilerError):
    """Frame geometry is invalid or two inputs disagree on geometry."""


class CoverageError(VptilerError):
    """A per-user coverage ratio could not be computed."""


class RegionError(VptilerError):
    """A cell region is invalid for partitioning (e.g. disconnected)."""


class SchemeError(VptilerError):
    """A tile scheme violated an invariant; message names the stage."""
