"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Vector/coefficient dimensions do not line up."""


class OverlappingIntervals(ValueError):
    """Requested interval family is not pairwise disjoint on the circle."""


class InfeasibleWithinTolerance(RuntimeError):
    """The moment-matching feasibility solve cannot meet the tolerance
    (usually a sign the location grid is too coarse)."""


class ParseError(ValueError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(ValueError):
    """Invalid configuration value (CLI exit code 2)."""
