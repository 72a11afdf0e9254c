"""Backend implementations: HTTP, scripted, simulator, and fixture replay."""

from .base import (
    BYPASS_BLOCK,
    BYPASS_SENTENCE,
    Backend,
    GenerationRequest,
    ProbeResult,
    StreamEvent,
    VerifierSettings,
)
from .http import HttpBackend
from .replay import FixtureRecorder, ReplayBackend
from .scripted import PerSample, ScriptedBackend, split_tokens
from .simulator import SimulatedVerifierBackend, SimVerifierParams, TokenLaw

__all__ = [
    "BYPASS_BLOCK",
    "BYPASS_SENTENCE",
    "Backend",
    "FixtureRecorder",
    "GenerationRequest",
    "HttpBackend",
    "PerSample",
    "ProbeResult",
    "ReplayBackend",
    "ScriptedBackend",
    "SimVerifierParams",
    "SimulatedVerifierBackend",
    "StreamEvent",
    "TokenLaw",
    "VerifierSettings",
    "split_tokens",
]
