"""Exception types shared across the pipeline. The CLI maps these to exit codes."""


class InsPathError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(InsPathError, ValueError):
    """A caller-supplied value violates an operation's precondition."""


class InsufficientFramesError(InsPathError, RuntimeError):
    """A frame source ran out before the requested number of samples."""


class DegenerateGeometryError(InsPathError, RuntimeError):
    """Geometry too degenerate to process (coincident points, flat hull, ...)."""


class EmptyProfileError(InsPathError, RuntimeError):
    """Profile extraction produced no usable rows."""


class CloudParseError(InsPathError, ValueError):
    """A point-cloud file could not be parsed.

    Carries the header line number or the body byte offset of the failure,
    whichever applies.
    """

    def __init__(self, message, *, line=None, offset=None):
        if line is not None:
            message = f"{message} (line {line})"
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class ConfigError(InsPathError, ValueError):
    """A config document failed validation; `path` names the offending JSON key."""

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class StageError(InsPathError, RuntimeError):
    """Wraps an error raised inside a pipeline stage with the stage name."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
