"""Reward arithmetic for training a mistake-detection policy.

Implements the binary correctness reward, the two-branch length-band
penalty, their composite, and group-relative advantages. All functions are
pure; lengths are measured in backend-reported output tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

from .trace import Verdict

# Default band constants. Chosen so the length term stays commensurate with
# the {0,1} correctness term; every value is overridable.
DEFAULT_P_MAX = 1.0
DEFAULT_C_FAST = 0.005
DEFAULT_C_UNDER = 0.002
DEFAULT_C_OVER = 0.001
DEFAULT_L_FAST = 256
DEFAULT_L_SLOW_MIN = 512
DEFAULT_L_SLOW_MAX = 4096


@dataclass(frozen=True)
class RewardParams:
    """Constants of the length-band penalty."""

    p_max: float = DEFAULT_P_MAX
    c_fast: float = DEFAULT_C_FAST
    c_under: float = DEFAULT_C_UNDER
    c_over: float = DEFAULT_C_OVER
    l_fast: int = DEFAULT_L_FAST
    l_slow_min: int = DEFAULT_L_SLOW_MIN
    l_slow_max: int = DEFAULT_L_SLOW_MAX

    def __post_init__(self) -> None:
        if self.p_max <= 0:
            raise ValueError("p_max must be > 0")
        if min(self.c_fast, self.c_under, self.c_over) < 0:
            raise ValueError("penalty rates must be >= 0")
        if self.l_slow_min > self.l_slow_max:
            raise ValueError("l_slow_min must be <= l_slow_max")


@dataclass(frozen=True)
class RewardBreakdown:
    """Composite reward split into its correctness and length parts."""

    r_correct: float
    penalty: float
    r_length: float
    total: float


@dataclass(frozen=True)
class GroupConfig:
    """Grouped-sampling settings for advantage computation."""

    group_size: int = 14
    advantage_mode: Literal["mean_centered", "standardized"] = "standardized"
    std_floor: float = 1e-8

    def __post_init__(self) -> None:
        if self.group_size < 2:
            raise ValueError("group_size must be >= 2")


IndexLike = Union[Verdict, int]


def _as_index(value: IndexLike) -> int:
    return value.first_error_index if isinstance(value, Verdict) else int(value)


def correctness_reward(idx_pred: IndexLike, idx_gt: IndexLike) -> float:
    """1.0 iff the predicted first-error index matches the label exactly."""
    return 1.0 if _as_index(idx_pred) == _as_index(idx_gt) else 0.0


def length_penalty(
    length: int, idx_gt: IndexLike, params: RewardParams = RewardParams()
) -> float:
    """Penalty for a response of ``length`` tokens given the label.

    No-error labels penalize overshoot past the fast target; error labels
    penalize falling outside the slow band, each term capped at p_max.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if _as_index(idx_gt) == -1:
        return min(params.p_max, params.c_fast * max(0, length - params.l_fast))
    under = min(params.p_max, params.c_under * max(0, params.l_slow_min - length))
    over = min(params.p_max, params.c_over * max(0, length - params.l_slow_max))
    return under + over


def composite_reward(
    idx_pred: IndexLike,
    idx_gt: IndexLike,
    length: int,
    params: RewardParams = RewardParams(),
) -> RewardBreakdown:
    """Correctness plus length terms for one verification transcript."""
    r_correct = correctness_reward(idx_pred, idx_gt)
    penalty = length_penalty(length, idx_gt, params)
    return RewardBreakdown(
        r_correct=r_correct,
        penalty=penalty,
        r_length=-penalty,
        total=r_correct - penalty,
    )


def group_advantages(
    rewards: list[float], config: GroupConfig = GroupConfig()
) -> list[float]:
    """Advantages of each reward relative to its sampling group.

    mean_centered subtracts the group mean; standardized also divides by the
    population standard deviation floored at ``std_floor``. A zero-variance
    group yields exact zeros in both modes.
    """
    if len(rewards) != config.group_size:
        raise ValueError(
            f"expected {config.group_size} rewards, got {len(rewards)}"
        )
    if all(r == rewards[0] for r in rewards):
        return [0.0] * len(rewards)
    mean = sum(rewards) / len(rewards)
    centered = [r - mean for r in rewards]
    if config.advantage_mode == "mean_centered":
        return centered
    std = math.sqrt(sum(c * c for c in centered) / len(centered))
    denom = max(std, config.std_floor)
    return [c / denom for c in centered]
