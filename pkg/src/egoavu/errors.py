"""Exception hierarchy shared across the pipeline."""

from __future__ import annotations


class EgoavuError(Exception):
    """Base class for all pipeline errors."""


class ParseError(EgoavuError):
    """Malformed input source."""

    def __init__(self, message: str, *, line: int | None = None, offset: int | None = None):
        location = ""
        if line is not None:
            location = f" (line {line}"
            location += f", offset {offset})" if offset is not None else ")"
        super().__init__(message + location)
        self.line = line
        self.offset = offset


class ConfigurationError(EgoavuError):
    """Invalid or unknown configuration value (format id, schema id, ...)."""


class InsufficientDataError(EgoavuError):
    """Not enough data points to compute a statistic."""


class DomainError(EgoavuError):
    """Argument outside the function's mathematical domain."""


class UndefinedScoreError(EgoavuError):
    """Score requested over an empty token sequence."""


class MediaError(EgoavuError):
    """A media reference cannot be satisfied (out of range, missing)."""


class GatewayError(EgoavuError):
    """Inference endpoint failed after exhausting the retry budget."""

    def __init__(self, message: str, *, attempts: int = 0, last_error: Exception | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.last_error = last_error


class RequestError(GatewayError):
    """Non-retryable request failure (HTTP 4xx other than 429)."""

    def __init__(self, message: str, *, status: int | None = None):
        super().__init__(message, attempts=1)
        self.status = status


class TransportError(GatewayError):
    """Retryable transport-level failure (timeouts, 5xx, 429)."""

    def __init__(self, message: str, *, status: int | None = None, retryable: bool = True):
        super().__init__(message)
        self.status = status
        self.retryable = retryable


class FixtureMissError(EgoavuError):
    """Strict mock backend received a request with no registered fixture."""


class StructuredOutputError(EgoavuError):
    """Model output never validated against the requested schema."""

    def __init__(self, message: str, *, raw_text: str = "", diagnostics: list[str] | None = None):
        super().__init__(message)
        self.raw_text = raw_text
        self.diagnostics = diagnostics or []


class EnrichmentError(EgoavuError):
    """A caption channel failed for a clip."""

    def __init__(self, message: str, *, channel: str, clip_id: str | None = None):
        super().__init__(message)
        self.channel = channel
        self.clip_id = clip_id


class FusionError(EgoavuError):
    """Audio-visual fusion failed for a clip."""


class DenseFusionError(EgoavuError):
    """Video-level dense narration failed."""


class QAGenError(EgoavuError):
    """QA generation failed for an item family."""


class JudgeError(EgoavuError):
    """Grader output invalid after the repair budget."""


class DataError(EgoavuError):
    """Required companion data (gold answers, manifests) is missing."""


class StageOrderError(EgoavuError):
    """A stage was run before its upstream dependencies completed."""


class CheckpointMismatchError(EgoavuError):
    """Resume attempted with a different config digest than the checkpoint."""
