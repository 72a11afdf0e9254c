"""Seeded stochastic verifier simulator for desk-scale trade-off studies.

Each sample draws from an RNG keyed by (seed, problem id, mode,
sample_index), so results are reproducible no matter how calls interleave.
Generation and probing are not simulated; this backend only verifies.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Iterator, Literal, Mapping, Optional, Sequence

from ..errors import BackendError
from ..trace import Problem, ReasoningTrace, Verdict, VerifierSample, VerifyMode
from .base import Backend, GenerationRequest, ProbeResult, StreamEvent


@dataclass(frozen=True)
class TokenLaw:
    """Gaussian output-token law, truncated below at one token."""

    mean: float
    spread: float

    def sample(self, rng: random.Random) -> int:
        return max(1, round(rng.gauss(self.mean, self.spread)))


@dataclass(frozen=True)
class SimVerifierParams:
    """Per-mode correctness rates, token laws, and the wrong-verdict rule.

    ``flip_no_error`` models the dominant confusion: a wrong sample reports
    no-error on a faulty trace, or a uniform random step on a clean one.
    ``uniform_other`` spreads wrong verdicts over all other legal outcomes.
    """

    p_fast_correct: float = 0.66
    p_slow_correct: float = 0.87
    fast_token_law: TokenLaw = TokenLaw(60.0, 10.0)
    slow_token_law: TokenLaw = TokenLaw(600.0, 100.0)
    wrong_verdict_law: Literal["flip_no_error", "uniform_other"] = "flip_no_error"
    seed: int = 0

    def __post_init__(self) -> None:
        for p in (self.p_fast_correct, self.p_slow_correct):
            if not 0.0 <= p <= 1.0:
                raise ValueError("correctness probabilities must lie in [0, 1]")
        if self.slow_token_law.mean < self.fast_token_law.mean:
            raise ValueError("slow token mean must be >= fast token mean")


class SimulatedVerifierBackend(Backend):
    """Samples verdicts against known ground truth instead of running a model."""

    def __init__(
        self,
        params: SimVerifierParams,
        ground_truth: Mapping[str, int],
    ) -> None:
        super().__init__()
        self.params = params
        self._ground_truth = dict(ground_truth)

    def stream_generate(self, request: GenerationRequest) -> Iterator[StreamEvent]:
        raise BackendError("the simulator backend only supports verification")

    def probe_logprobs(self, prefix: str, candidates: Sequence[str]) -> ProbeResult:
        raise BackendError("the simulator backend only supports verification")

    def _rng(self, problem_id: str, mode: VerifyMode, sample_index: int) -> random.Random:
        key = f"{self.params.seed}|{problem_id}|{mode}|{sample_index}".encode()
        return random.Random(int.from_bytes(hashlib.sha256(key).digest()[:8], "big"))

    def _truth(self, problem: Problem) -> int:
        if problem.id not in self._ground_truth:
            raise BackendError(f"no simulated ground truth for problem {problem.id!r}")
        return self._ground_truth[problem.id]

    def _wrong_verdict(self, truth: int, n_steps: int, rng: random.Random) -> int:
        if self.params.wrong_verdict_law == "flip_no_error":
            if truth != -1:
                return -1
            return rng.randrange(n_steps)
        choices = [idx for idx in range(-1, n_steps) if idx != truth]
        return rng.choice(choices)

    def _simulate(
        self,
        problem: Problem,
        trace: ReasoningTrace,
        mode: VerifyMode,
        sample_index: int,
    ) -> VerifierSample:
        if trace.n_steps == 0:
            raise BackendError("cannot verify an empty trace")
        params = self.params
        rng = self._rng(problem.id, mode, sample_index)
        p_correct = params.p_fast_correct if mode == "fast" else params.p_slow_correct
        law = params.fast_token_law if mode == "fast" else params.slow_token_law
        truth = self._truth(problem)
        if rng.random() < p_correct:
            index = truth
        else:
            index = self._wrong_verdict(truth, trace.n_steps, rng)
        if index == -1:
            feedback = "No errors found; the reasoning holds up. \\boxed{-1}"
        else:
            feedback = (
                f"Step {index} does not follow from the previous steps. "
                f"\\boxed{{{index}}}"
            )
        return VerifierSample(
            mode=mode,
            feedback=feedback,
            verdict=Verdict(index),
            output_tokens=law.sample(rng),
            sample_index=sample_index,
        )

    def verify_fast(
        self,
        problem: Problem,
        trace: ReasoningTrace,
        sample_index: int = 0,
        batch_id: str = "",
    ) -> VerifierSample:
        return self._simulate(problem, trace, "fast", sample_index)

    def verify_slow(
        self,
        problem: Problem,
        trace: ReasoningTrace,
        sample_index: int = 0,
        batch_id: str = "",
    ) -> VerifierSample:
        return self._simulate(problem, trace, "slow", sample_index)
