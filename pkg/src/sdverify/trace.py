"""Core domain types and pure text processing.

Covers reasoning-trace segmentation at hesitation keywords, critic prompt
assembly, and parsing of boxed answers out of model output. Everything here
is pure and stateless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

from .errors import EmptyTraceError, UnparseableVerdictError, VerdictOutOfRangeError

# Cue phrases that mark self-check boundaries in a reasoning trace. Matching
# is case-sensitive: "Wait" and "But wait" are distinct cues.
DEFAULT_HESITATION_KEYWORDS = [
    "Wait",
    "double-check",
    "Alternatively",
    "Hmm",
    "Let me check",
    "Alright",
    "make sure",
    "Another way",
    "Let me verify",
    "to confirm",
    "Looking back",
    "But wait",
]

BOXED_PREFIX = "\\boxed{"

# Placeholders are substituted with str.replace, never str.format, so step
# text and problem statements may contain braces or markers verbatim.
DEFAULT_CRITIC_TEMPLATE = """\
The following is a math problem and a step-by-step solution to review.

[Math Problem]
{problem}

[Solution Steps]
{steps}

Review the steps in order and find the first step that contains an error, if any.
Please put the index of the first erroneous step in \\boxed{}.
If all steps are correct, put \\boxed{-1}."""


@dataclass(frozen=True)
class Problem:
    """A single task statement handed to the solver."""

    id: str
    statement: str

    def __post_init__(self) -> None:
        if not self.statement:
            raise ValueError("problem statement must be non-empty")


@dataclass(frozen=True)
class Step:
    """One contiguous segment of a reasoning trace."""

    index: int
    text: str

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("step index must be >= 0")
        if not self.text:
            raise ValueError("step text must be non-empty")


@dataclass(frozen=True)
class ReasoningTrace:
    """An ordered step sequence whose texts concatenate exactly to ``raw``."""

    steps: tuple[Step, ...]
    raw: str

    def __post_init__(self) -> None:
        for position, step in enumerate(self.steps):
            if step.index != position:
                raise ValueError("step indices must be contiguous from 0")
        if "".join(step.text for step in self.steps) != self.raw:
            raise ValueError("steps must concatenate losslessly to raw")

    @property
    def n_steps(self) -> int:
        return len(self.steps)


@dataclass(frozen=True, order=True)
class Verdict:
    """Predicted index of the first erroneous step; -1 means no error."""

    first_error_index: int

    def __post_init__(self) -> None:
        if self.first_error_index < -1:
            raise ValueError("first_error_index must be >= -1")

    @property
    def is_no_error(self) -> bool:
        return self.first_error_index == -1


VerifyMode = Literal["fast", "slow"]


@dataclass(frozen=True)
class VerifierSample:
    """One verification run: mode, feedback text, verdict, and token cost.

    ``verdict`` is None when the run's output could not be parsed; such a
    sample abstains from voting but still counts toward token usage.
    """

    mode: VerifyMode
    feedback: str
    verdict: Optional[Verdict]
    output_tokens: int
    sample_index: int

    def __post_init__(self) -> None:
        if self.output_tokens < 0:
            raise ValueError("output_tokens must be >= 0")
        if self.sample_index < 0:
            raise ValueError("sample_index must be >= 0")


@dataclass
class UsageStats:
    """Output-token accounting, split by which component generated them."""

    output_tokens_solver: int = 0
    output_tokens_verifier: int = 0
    output_tokens_probe: int = 0
    wall_clock: float = 0.0  # informational, excluded from reproducibility checks

    @property
    def total(self) -> int:
        return (
            self.output_tokens_solver
            + self.output_tokens_verifier
            + self.output_tokens_probe
        )

    def add(self, other: "UsageStats") -> None:
        self.output_tokens_solver += other.output_tokens_solver
        self.output_tokens_verifier += other.output_tokens_verifier
        self.output_tokens_probe += other.output_tokens_probe
        self.wall_clock += other.wall_clock


def _keyword_starts(raw: str, keywords: list[str]) -> list[int]:
    """Positions where a step boundary opens, after non-overlapping matching.

    The scan walks left to right; at each position the longest keyword
    starting there wins, and the cursor skips past it, so overlapping
    candidates resolve leftmost-then-longest.
    """
    by_length = sorted(keywords, key=len, reverse=True)
    starts: list[int] = []
    i = 0
    n = len(raw)
    while i < n:
        hit = next((kw for kw in by_length if raw.startswith(kw, i)), None)
        if hit is None:
            i += 1
        else:
            starts.append(i)
            i += len(hit)
    return starts


def segment_trace(raw: str, keywords: Optional[list[str]] = None) -> ReasoningTrace:
    """Split ``raw`` into steps, opening a new step at each hesitation keyword.

    Matching is case-sensitive exact substring. The first step starts at
    position 0; an empty segment before a keyword at position 0 is dropped,
    merging into the keyword's own step. Empty ``raw`` yields a zero-step
    trace, which callers requiring at least one step must reject.
    """
    kws = keywords if keywords is not None else DEFAULT_HESITATION_KEYWORDS
    if not kws or any(not kw for kw in kws):
        raise ValueError("keywords must be non-empty strings")
    if not raw:
        return ReasoningTrace(steps=(), raw="")
    cuts = _keyword_starts(raw, kws)
    if not cuts or cuts[0] != 0:
        cuts.insert(0, 0)
    cuts.append(len(raw))
    steps = tuple(
        Step(index=i, text=raw[a:b]) for i, (a, b) in enumerate(zip(cuts, cuts[1:]))
    )
    return ReasoningTrace(steps=steps, raw=raw)


def trace_from_steps(texts: list[str], sep: str = "\n") -> ReasoningTrace:
    """Build a trace from pre-split step texts, e.g. a benchmark record.

    The separator is attached to every step but the last so concatenation
    stays lossless.
    """
    if any(not t for t in texts):
        raise ValueError("step texts must be non-empty")
    parts = [t + sep if i < len(texts) - 1 else t for i, t in enumerate(texts)]
    steps = tuple(Step(index=i, text=t) for i, t in enumerate(parts))
    return ReasoningTrace(steps=steps, raw="".join(parts))


def format_critic_prompt(
    problem: Problem,
    trace: ReasoningTrace,
    template: Optional[str] = None,
) -> str:
    """Render the verification prompt: problem, indexed steps, boxed-index ask.

    ``template`` overrides the default bit-for-bit; it must contain the
    ``{problem}`` and ``{steps}`` placeholders. Step text passes through
    verbatim, no escaping.
    """
    if trace.n_steps == 0:
        raise EmptyTraceError("cannot build a critic prompt for an empty trace")
    steps_block = "\n".join(f"Step {s.index}: {s.text}" for s in trace.steps)
    tmpl = template if template is not None else DEFAULT_CRITIC_TEMPLATE
    return tmpl.replace("{problem}", problem.statement).replace("{steps}", steps_block)


def _last_balanced_boxed(text: str) -> Optional[str]:
    """Content of the last balanced boxed marker, scanning right to left."""
    search_end = len(text)
    while True:
        start = text.rfind(BOXED_PREFIX, 0, search_end)
        if start < 0:
            return None
        depth = 1
        body_start = start + len(BOXED_PREFIX)
        for j in range(body_start, len(text)):
            ch = text[j]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[body_start:j]
        # unbalanced marker: fall back to the previous occurrence
        search_end = start


def parse_error_index(verifier_text: str, n_steps: int) -> Verdict:
    """Parse the integer in the last boxed marker of a verifier's output.

    Raises UnparseableVerdictError when no boxed integer is present and
    VerdictOutOfRangeError when the value cannot index the judged trace.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    content = _last_balanced_boxed(verifier_text)
    if content is None:
        raise UnparseableVerdictError("no boxed marker in verifier output")
    try:
        value = int(content.strip())
    except ValueError:
        raise UnparseableVerdictError(
            f"boxed content {content.strip()!r} is not an integer"
        ) from None
    if value >= n_steps or value < -1:
        raise VerdictOutOfRangeError(
            f"error index {value} out of range for a {n_steps}-step trace"
        )
    return Verdict(value)


def extract_final_answer(solution_text: str) -> Optional[str]:
    """Whitespace-trimmed content of the last boxed marker; None if absent."""
    content = _last_balanced_boxed(solution_text)
    if content is None:
        return None
    return content.strip()
