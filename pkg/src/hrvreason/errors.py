"""Exception hierarchy shared across the package."""


class HrvReasonError(Exception):
    """Base class for all package errors."""


class TooShort(HrvReasonError):
    """Fewer than two usable RR intervals."""


class AllArtifacts(HrvReasonError):
    """Every interval in the series was rejected as an artifact."""


class SpectrumUnavailable(HrvReasonError):
    """Tachogram too short for any spectral estimate."""


class DegenerateSeries(HrvReasonError):
    """Zero-variance series where a nonlinear metric is undefined."""


class ZeroSigma(HrvReasonError):
    """A z-score was requested with a non-positive standard deviation."""


class BaselineZero(HrvReasonError):
    """Percentage change is undefined for a zero baseline value."""


class InsufficientHistory(HrvReasonError):
    """Not enough prior trials to build a subject baseline."""


class DimensionMismatch(HrvReasonError):
    """Embedding dimension does not match the vector store."""


class IncompleteContext(HrvReasonError):
    """A step prompt was requested from an incomplete step context."""


class TransportError(HrvReasonError):
    """Completion backend unreachable after retries."""


class CompletionTimeout(TransportError):
    """Completion backend timed out after retries."""


class BackendRefused(HrvReasonError):
    """Completion backend rejected the request (no retry)."""


class FixtureMissing(BackendRefused):
    """File-backed mock has no response for this prompt."""


class OutOfRange(HrvReasonError):
    """Rating outside the 1..5 scale."""


class EmptyEvaluationSet(HrvReasonError):
    """No scorable trials after exclusions."""


class TrialSetMismatch(HrvReasonError):
    """Two prediction sets do not cover the same (subject, trial) keys."""

    def __init__(self, message: str, missing: list | None = None, extra: list | None = None):
        super().__init__(message)
        self.missing = missing or []
        self.extra = extra or []


class IngestError(HrvReasonError):
    """Trial or corpus input could not be parsed."""


class ConfigError(HrvReasonError):
    """Invalid run configuration."""
