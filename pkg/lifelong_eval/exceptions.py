class LifelongEvalError(Exception):
    """Base class for every error raised by the evaluation toolkit."""

class InvalidInputError(LifelongEvalError, ValueError):
    """Raised when a value is non-finite or otherwise unusable."""

class OutOfRangeError(InvalidInputError):
    """Raised when an interpolation time lies outside its bracketing interval."""

class DegenerateIntervalError(InvalidInputError):
    """Raised when interpolating over a zero-length interval between different poses."""

class TrajectoryParseError(InvalidInputError):
    """
    Raised when a trajectory line cannot be parsed.

    Attributes:
        line_number (int | None): 1-based line number of the offending line.
    """

    def __init__(self, message: str, line_number: int | None = None, source: str | None = None) -> None:
        self.line_number = line_number
        self.source = source
        location: str = ""
        if source:
            location += f"{source}"
        if line_number is not None:
            location += f"{':' if source else 'line '}{line_number}"
        super().__init__(f"{location}: {message}" if location else message)

class TrajectoryOrderError(TrajectoryParseError):
    """Raised when timestamps are not strictly increasing."""

class InvalidRecordError(TrajectoryParseError):
    """Raised for records that parse but are not poses (e.g. zero-norm quaternion)."""

class ManifestError(InvalidInputError):
    """Raised when a scene manifest is missing data or inconsistent."""

class ConfigurationError(InvalidInputError):
    """Raised when metric or generator settings are invalid or incompatible."""

class NoOverlapError(LifelongEvalError):
    """Raised when no estimate falls inside the ground-truth coverage."""

class UnderdeterminedAlignmentError(LifelongEvalError):
    """Raised when fewer pairs than needed for a unique alignment are given."""

class DegenerateScaleError(LifelongEvalError):
    """Raised when the estimate point set has no spread to derive a scale from."""

class InvalidSpanError(InvalidInputError):
    """Raised when t_max <= t_min, or estimates lie outside the data span."""

class SceneEvaluationError(LifelongEvalError):
    """Raised when a whole scene cannot be judged (first sequence unalignable)."""

class InsufficientDataError(LifelongEvalError):
    """Raised when a statistic needs more samples than provided."""

class ResourceNotFoundError(LifelongEvalError):
    """Raised when a stored evaluation run does not exist."""
