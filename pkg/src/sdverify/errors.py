"""Exception types shared across the package."""

from __future__ import annotations


class SdvError(Exception):
    """Base class for all package errors."""


class EmptyTraceError(SdvError):
    """A trace with zero steps was given where at least one is required."""


class UnparseableVerdictError(SdvError):
    """Verifier output carried no parseable boxed error index."""


class VerdictOutOfRangeError(SdvError):
    """Parsed error index falls outside the trace being judged."""


class NoUsableVerdictsError(SdvError):
    """Every sample in a voting pool abstained."""


class VerificationInconclusiveError(SdvError):
    """All verification samples, fast and slow, abstained."""


class NoExtractableAnswersError(SdvError):
    """No candidate solution carried an extractable final answer."""


class DegenerateBenchmarkError(SdvError):
    """Benchmark split lacks erroneous or error-free records, so F1 is undefined."""


class BackendError(SdvError):
    """Unrecoverable backend failure."""


class TransportRetryError(BackendError):
    """Transport kept failing after the configured number of attempts."""

    def __init__(self, message: str, attempts: int) -> None:
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class LogprobsUnsupportedError(BackendError):
    """Backend cannot return token log-probabilities."""
