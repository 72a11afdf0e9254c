"""Deterministic scripted backend for tests.

Responses are matched to requests by substring rules against the prompt and
selected by the request's sample_index, so identical requests always replay
identical streams regardless of call interleaving. Continuation requests
(prompt extended with already-served text) resume mid-script.
"""

from __future__ import annotations

import re
import threading
from typing import Iterator, Optional, Sequence, Union

from ..errors import BackendError, LogprobsUnsupportedError
from .base import (
    BYPASS_SENTENCE,
    Backend,
    GenerationRequest,
    ProbeResult,
    StreamEvent,
    VerifierSettings,
    events_from_tokens,
    validate_probe_candidates,
)

# Marker present in the default critic template; used to route slow
# verification prompts (fast ones are routed by the bypass sentence first).
CRITIC_MARKER = "index of the first erroneous step"

Script = Union[str, Sequence[str]]  # full text, or an explicit token sequence
ProbePair = tuple[Optional[float], Optional[float]]


class PerSample(list):
    """Marks a list of scripts indexed by the request's sample_index."""


def split_tokens(text: str) -> list[str]:
    """Chunk text into word-plus-whitespace tokens, losslessly."""
    if not text:
        return []
    tokens = []
    pos = 0
    for m in re.finditer(r"\S+\s*", text):
        if m.start() > pos:
            tokens.append(text[pos : m.start()])
        tokens.append(m.group(0))
        pos = m.end()
    if pos < len(text):
        tokens.append(text[pos:])
    return tokens


def _tokenize(script: Script) -> list[str]:
    if isinstance(script, str):
        return split_tokens(script)
    if any(not tok for tok in script):
        raise ValueError("explicit script tokens must be non-empty")
    return list(script)


class ScriptedRule:
    """Substring pattern plus one token script per sample_index (cycled)."""

    def __init__(self, pattern: str, script: Union[Script, PerSample]):
        self.pattern = pattern
        if isinstance(script, PerSample):
            self.token_lists = [_tokenize(item) for item in script]
        else:
            self.token_lists = [_tokenize(script)]
        if not self.token_lists:
            raise ValueError("rule needs at least one response")

    def tokens_for(self, sample_index: int) -> list[str]:
        return self.token_lists[sample_index % len(self.token_lists)]


class ScriptedBackend(Backend):
    """Backend that replays configured scripts.

    ``rules`` are checked first, in order; ``fast``/``slow`` install rules for
    verification prompts keyed to the bypass sentence and the critic marker.
    Per-sample variation comes from the request's sample_index, never from
    call order.
    """

    def __init__(
        self,
        rules: Optional[Sequence[tuple[str, Union[Script, PerSample]]]] = None,
        fast: Optional[Sequence[Script]] = None,
        slow: Optional[Sequence[Script]] = None,
        probe_results: Optional[Union[ProbePair, Sequence[ProbePair]]] = None,
        default_response: Optional[str] = None,
        logprobs_supported: bool = True,
        verifier_settings: VerifierSettings | None = None,
    ) -> None:
        super().__init__(verifier_settings)
        self._rules = [ScriptedRule(p, s) for p, s in (rules or [])]
        if fast is not None:
            self._rules.append(ScriptedRule(BYPASS_SENTENCE, PerSample(fast)))
        if slow is not None:
            marker = CRITIC_MARKER
            if self.verifier_settings.critic_template is not None:
                marker = "Step 0:"  # emitted by the prompt builder itself
            self._rules.append(ScriptedRule(marker, PerSample(slow)))
        self._default = default_response
        if isinstance(probe_results, tuple):
            probe_results = [probe_results]
        self._probe_results = list(probe_results) if probe_results is not None else []
        self._probe_cursor = 0
        self._logprobs_supported = logprobs_supported
        self._lock = threading.Lock()
        self.generation_requests: list[GenerationRequest] = []
        self.probe_requests: list[str] = []

    def _match(self, request: GenerationRequest) -> list[str]:
        for rule in self._rules:
            if rule.pattern in request.prompt:
                return rule.tokens_for(request.sample_index)
        if self._default is not None:
            return split_tokens(self._default)
        raise BackendError(
            f"no scripted response matches prompt: {request.prompt[:80]!r}..."
        )

    @staticmethod
    def _skip_served(tokens: list[str], prompt: str) -> list[str]:
        """Drop the leading tokens already present at the end of the prompt,
        so continuation requests resume where the previous stream paused."""
        for served in range(len(tokens), 0, -1):
            if prompt.endswith("".join(tokens[:served])):
                return tokens[served:]
        return tokens

    def stream_generate(self, request: GenerationRequest) -> Iterator[StreamEvent]:
        with self._lock:
            self.generation_requests.append(request)
            tokens = self._skip_served(self._match(request), request.prompt)
        return events_from_tokens(tokens, request.max_tokens)

    def probe_logprobs(self, prefix: str, candidates: Sequence[str]) -> ProbeResult:
        validate_probe_candidates(candidates)
        with self._lock:
            self.probe_requests.append(prefix)
            if not self._logprobs_supported:
                raise LogprobsUnsupportedError(
                    "scripted backend configured without logprobs"
                )
            if not self._probe_results:
                raise BackendError("no scripted probe results configured")
            pair = self._probe_results[
                min(self._probe_cursor, len(self._probe_results) - 1)
            ]
            self._probe_cursor += 1
        return ProbeResult(logp_yes=pair[0], logp_no=pair[1], output_tokens=1)
