"""Record/replay fixtures: line-delimited event logs for offline HTTP tests.

Each line is ``{"type": "token"|"eos"|"logprobs", "payload": {...}}``. Replay
consumes events strictly in recorded order, so a replayed run must issue the
same call sequence as the recording one.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterator, Sequence, Union

from ..errors import BackendError
from .base import (
    Backend,
    GenerationRequest,
    ProbeResult,
    StreamEvent,
    VerifierSettings,
    validate_probe_candidates,
)

EVENT_TYPES = ("token", "eos", "logprobs")


class FixtureRecorder:
    """Appends backend events to a JSONL fixture file."""

    def __init__(self, path: Union[str, Path]) -> None:
        self.path = Path(path)
        self._fh = self.path.open("w", encoding="utf-8")

    def record(self, event_type: str, payload: dict) -> None:
        if event_type not in EVENT_TYPES:
            raise ValueError(f"unknown event type {event_type!r}")
        self._fh.write(json.dumps({"type": event_type, "payload": payload}) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "FixtureRecorder":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def load_fixture(path: Union[str, Path]) -> list[dict]:
    events = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            event = json.loads(line)
            if event.get("type") not in EVENT_TYPES:
                raise BackendError(f"{path}:{lineno}: unknown fixture event")
            events.append(event)
    return events


class ReplayBackend(Backend):
    """Serves a recorded fixture back, event by event."""

    def __init__(
        self,
        path: Union[str, Path],
        verifier_settings: VerifierSettings | None = None,
    ) -> None:
        super().__init__(verifier_settings)
        self._events = load_fixture(path)
        self._cursor = 0

    def _next(self) -> dict:
        if self._cursor >= len(self._events):
            raise BackendError("replay fixture exhausted")
        event = self._events[self._cursor]
        self._cursor += 1
        return event

    def stream_generate(self, request: GenerationRequest) -> Iterator[StreamEvent]:
        count = 0
        while True:
            event = self._next()
            if event["type"] == "token":
                count += 1
                yield StreamEvent(event["payload"]["text"], False, count)
            elif event["type"] == "eos":
                yield StreamEvent("", True, count + 1)
                return
            else:
                raise BackendError("fixture out of sync: expected a stream event")

    def probe_logprobs(self, prefix: str, candidates: Sequence[str]) -> ProbeResult:
        validate_probe_candidates(candidates)
        event = self._next()
        if event["type"] != "logprobs":
            raise BackendError("fixture out of sync: expected a logprobs event")
        payload = event["payload"]
        return ProbeResult(
            logp_yes=payload.get("yes"),
            logp_no=payload.get("no"),
            output_tokens=int(payload.get("tokens", 1)),
        )
