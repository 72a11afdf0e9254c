"""OpenAI-compatible chat-completions client with streaming and probes.

Transport faults are retried with exponential backoff only while the stream
has produced nothing, so a retry can never double-count or re-emit tokens;
only the successful attempt's tokens are counted.
"""

from __future__ import annotations

import json
import os
import time
from typing import Callable, Iterator, Optional, Sequence

import httpx

from ..errors import BackendError, LogprobsUnsupportedError, TransportRetryError
from .base import (
    Backend,
    GenerationRequest,
    ProbeResult,
    StreamEvent,
    VerifierSettings,
    validate_probe_candidates,
)
from .replay import FixtureRecorder

ENV_API_BASE = "SDV_API_BASE"
ENV_API_KEY = "SDV_API_KEY"
ENV_MODEL_SOLVER = "SDV_MODEL_SOLVER"
ENV_MODEL_VERIFIER = "SDV_MODEL_VERIFIER"

DEFAULT_TOP_LOGPROBS = 20


class HttpBackend(Backend):
    """Chat-completions client for any OpenAI-compatible server."""

    def __init__(
        self,
        api_base: str,
        model: str,
        api_key: str = "",
        retries: int = 3,
        backoff_base: float = 0.25,
        timeout: float = 120.0,
        top_logprobs: int = DEFAULT_TOP_LOGPROBS,
        client: Optional[httpx.Client] = None,
        recorder: Optional[FixtureRecorder] = None,
        verifier_settings: VerifierSettings | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        super().__init__(verifier_settings)
        if retries < 1:
            raise ValueError("retries must be >= 1")
        self.api_base = api_base.rstrip("/")
        self.model = model
        self._headers = {"Content-Type": "application/json"}
        if api_key:
            self._headers["Authorization"] = f"Bearer {api_key}"
        self._retries = retries
        self._backoff_base = backoff_base
        self._top_logprobs = top_logprobs
        self._client = client or httpx.Client(timeout=timeout)
        self._recorder = recorder
        self._sleep = sleep

    @classmethod
    def from_env(
        cls,
        role: str = "solver",
        env: Optional[dict[str, str]] = None,
        **kwargs,
    ) -> "HttpBackend":
        """Build from SDV_API_BASE / SDV_API_KEY / SDV_MODEL_* variables."""
        environ = env if env is not None else dict(os.environ)
        base = environ.get(ENV_API_BASE, "")
        if not base:
            raise BackendError(f"{ENV_API_BASE} is not set")
        model_var = ENV_MODEL_SOLVER if role == "solver" else ENV_MODEL_VERIFIER
        model = environ.get(model_var, "")
        if not model:
            raise BackendError(f"{model_var} is not set")
        return cls(base, model, api_key=environ.get(ENV_API_KEY, ""), **kwargs)

    def _payload(self, request: GenerationRequest, stream: bool) -> dict:
        payload: dict = {
            "model": self.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "stream": stream,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
        }
        if request.want_logprobs:
            payload["logprobs"] = True
            payload["top_logprobs"] = request.top_logprobs
        return payload

    def _attempt_stream(self, request: GenerationRequest) -> Iterator[StreamEvent]:
        url = f"{self.api_base}/chat/completions"
        count = 0
        with self._client.stream(
            "POST", url, json=self._payload(request, stream=True), headers=self._headers
        ) as response:
            response.raise_for_status()
            for line in response.iter_lines():
                line = line.strip()
                if not line.startswith("data:"):
                    continue
                data = line[len("data:") :].strip()
                if data == "[DONE]":
                    break
                chunk = json.loads(data)
                choice = chunk["choices"][0]
                token = (choice.get("delta") or {}).get("content") or ""
                if token:
                    count += 1
                    if self._recorder:
                        self._recorder.record("token", {"text": token})
                    yield StreamEvent(token, False, count)
                if choice.get("finish_reason"):
                    if choice["finish_reason"] == "stop":
                        count += 1
                        if self._recorder:
                            self._recorder.record("eos", {})
                        yield StreamEvent("", True, count)
                    return
        # stream closed without an explicit finish: treat as end-of-sequence
        if self._recorder:
            self._recorder.record("eos", {})
        yield StreamEvent("", True, count + 1)

    def stream_generate(self, request: GenerationRequest) -> Iterator[StreamEvent]:
        attempt = 0
        while True:
            attempt += 1
            emitted = 0
            try:
                for event in self._attempt_stream(request):
                    emitted += 1
                    yield event
                return
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                if emitted > 0:
                    # the consumer already saw tokens; a restart would re-emit
                    raise BackendError(f"stream failed mid-flight: {exc}") from exc
                if attempt >= self._retries:
                    raise TransportRetryError(str(exc), attempts=attempt) from exc
                self._sleep(self._backoff_base * (2 ** (attempt - 1)))

    def probe_logprobs(self, prefix: str, candidates: Sequence[str]) -> ProbeResult:
        validate_probe_candidates(candidates)
        request = GenerationRequest(
            prompt=prefix,
            max_tokens=1,
            temperature=0.0,
            want_logprobs=True,
            top_logprobs=self._top_logprobs,
        )
        url = f"{self.api_base}/chat/completions"
        last_exc: Optional[Exception] = None
        for attempt in range(1, self._retries + 1):
            try:
                response = self._client.post(
                    url, json=self._payload(request, stream=False), headers=self._headers
                )
                response.raise_for_status()
                break
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_exc = exc
                if attempt >= self._retries:
                    raise TransportRetryError(str(exc), attempts=attempt) from exc
                self._sleep(self._backoff_base * (2 ** (attempt - 1)))
        body = response.json()
        choice = body["choices"][0]
        logprobs = choice.get("logprobs")
        if not logprobs or not logprobs.get("content"):
            raise LogprobsUnsupportedError("server returned no logprobs")
        first = logprobs["content"][0]
        alternatives = list(first.get("top_logprobs") or [])
        if first.get("token") is not None:
            alternatives.append({"token": first["token"], "logprob": first["logprob"]})
        found: dict[str, float] = {}
        for alt in alternatives:
            text = alt["token"]
            for cand in candidates:
                if cand not in found and (text == cand or text.strip() == cand):
                    found[cand] = float(alt["logprob"])
        tokens = int((body.get("usage") or {}).get("completion_tokens") or 1)
        result = ProbeResult(
            logp_yes=found.get("Yes"), logp_no=found.get("No"), output_tokens=tokens
        )
        if self._recorder:
            self._recorder.record(
                "logprobs",
                {"yes": result.logp_yes, "no": result.logp_no, "tokens": tokens},
            )
        return result
