"""Model-access abstraction shared by the HTTP, scripted, and simulator backends.

A backend streams token events, answers one-token log-probability probes,
and runs fast or slow verifications. Fast verification forces a
thinking-bypass block at the start of the response so the model emits a
short judgment; slow verification lets it deliberate freely.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Optional, Sequence

from ..errors import UnparseableVerdictError, VerdictOutOfRangeError
from ..trace import (
    Problem,
    ReasoningTrace,
    Verdict,
    VerifierSample,
    VerifyMode,
    format_critic_prompt,
    parse_error_index,
)

BYPASS_SENTENCE = "Okay, I think I have finished thinking."
BYPASS_BLOCK = f"<think>\n{BYPASS_SENTENCE}\n</think>\n\n"

PROBE_CANDIDATES = ("Yes", "No")


@dataclass(frozen=True)
class GenerationRequest:
    """One generation call. ``batch_id``/``sample_index`` key deterministic
    backends so concurrency cannot reorder their outputs."""

    prompt: str
    max_tokens: int = 4096
    temperature: float = 0.6
    stop_on_eos: bool = True
    want_logprobs: bool = False
    top_logprobs: int = 0
    batch_id: str = ""
    sample_index: int = 0

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.want_logprobs and self.top_logprobs < 2:
            raise ValueError("top_logprobs must be >= 2 when want_logprobs")


@dataclass(frozen=True)
class StreamEvent:
    """One streamed token. The cumulative count is strictly increasing within
    a stream and includes the end-of-sequence event."""

    token_text: str
    is_eos: bool
    cumulative_output_tokens: int


@dataclass(frozen=True)
class ProbeResult:
    """Log-probabilities of the probe candidates; None marks a candidate that
    did not appear among the returned alternatives."""

    logp_yes: Optional[float]
    logp_no: Optional[float]
    output_tokens: int


@dataclass(frozen=True)
class VerifierSettings:
    """Knobs for verification requests issued through a backend."""

    critic_template: Optional[str] = None
    fast_max_tokens: int = 1024
    slow_max_tokens: int = 8192
    temperature: float = 0.6


class Backend:
    """Base backend. Subclasses implement streaming and probing; the default
    verify implementations build the critic prompt and parse the reply."""

    def __init__(self, verifier_settings: VerifierSettings | None = None) -> None:
        self.verifier_settings = verifier_settings or VerifierSettings()

    def stream_generate(self, request: GenerationRequest) -> Iterator[StreamEvent]:
        raise NotImplementedError

    def probe_logprobs(self, prefix: str, candidates: Sequence[str]) -> ProbeResult:
        raise NotImplementedError

    def generate_text(self, request: GenerationRequest) -> tuple[str, int]:
        """Drain a stream; returns (concatenated text, output token count)."""
        text_parts: list[str] = []
        tokens = 0
        for event in self.stream_generate(request):
            text_parts.append(event.token_text)
            tokens = event.cumulative_output_tokens
        return "".join(text_parts), tokens

    def _run_verification(
        self,
        problem: Problem,
        trace: ReasoningTrace,
        mode: VerifyMode,
        sample_index: int,
        batch_id: str,
    ) -> VerifierSample:
        settings = self.verifier_settings
        prompt = format_critic_prompt(problem, trace, settings.critic_template)
        if mode == "fast":
            prompt = prompt + "\n\n" + BYPASS_BLOCK
            max_tokens = settings.fast_max_tokens
        else:
            max_tokens = settings.slow_max_tokens
        request = GenerationRequest(
            prompt=prompt,
            max_tokens=max_tokens,
            temperature=settings.temperature,
            batch_id=batch_id,
            sample_index=sample_index,
        )
        feedback, tokens = self.generate_text(request)
        try:
            verdict: Optional[Verdict] = parse_error_index(feedback, trace.n_steps)
        except (UnparseableVerdictError, VerdictOutOfRangeError):
            verdict = None  # abstaining sample
        return VerifierSample(
            mode=mode,
            feedback=feedback,
            verdict=verdict,
            output_tokens=tokens,
            sample_index=sample_index,
        )

    def verify_fast(
        self,
        problem: Problem,
        trace: ReasoningTrace,
        sample_index: int = 0,
        batch_id: str = "",
    ) -> VerifierSample:
        """One thinking-bypassed verification run over the whole trace."""
        return self._run_verification(problem, trace, "fast", sample_index, batch_id)

    def verify_slow(
        self,
        problem: Problem,
        trace: ReasoningTrace,
        sample_index: int = 0,
        batch_id: str = "",
    ) -> VerifierSample:
        """One full-deliberation verification run over the whole trace."""
        return self._run_verification(problem, trace, "slow", sample_index, batch_id)


def validate_probe_candidates(candidates: Sequence[str]) -> None:
    if tuple(candidates) != PROBE_CANDIDATES:
        raise ValueError("probe candidates must be exactly ('Yes', 'No')")


def events_from_tokens(
    tokens: Sequence[str], max_tokens: int, emit_eos: bool = True
) -> Iterator[StreamEvent]:
    """Turn a token list into a stream capped at ``max_tokens``; an EOS event
    follows the last token when the cap was not hit."""
    count = 0
    for token in tokens:
        if count >= max_tokens:
            return
        count += 1
        yield StreamEvent(token, False, count)
    if emit_eos and count < max_tokens:
        yield StreamEvent("", True, count + 1)


__all__ = [
    "BYPASS_BLOCK",
    "BYPASS_SENTENCE",
    "Backend",
    "GenerationRequest",
    "ProbeResult",
    "StreamEvent",
    "VerifierSettings",
    "events_from_tokens",
    "validate_probe_candidates",
]
