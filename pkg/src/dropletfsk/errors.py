"""Exception hierarchy shared by all stages."""


class DropletFskError(Exception):
    """Base class for model and pipeline errors."""


class RangeError(DropletFskError, ValueError):
    """A query fell outside the domain where a model is defined."""


class InsufficientDataError(DropletFskError, ValueError):
    pass


class OrderingError(DropletFskError, ValueError):
    """Timestamps or knots are not strictly increasing."""


class ConfigError(DropletFskError, ValueError):
    pass


class ParseError(DropletFskError, ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class FormatError(ParseError):
    """File parsed but violates a format contract (e.g. non-uniform sampling)."""


class StageError(DropletFskError):
    """Wraps an error raised inside a named pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
