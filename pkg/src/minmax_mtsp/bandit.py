"""Epsilon-greedy operator selection with segmented weight updates.

One OperatorStats instance per operator family (five removal arms, three
insertion arms). Weights start uniform and are renormalized to sum to 1 after
every segment update; renormalization does not change the argmax, so the
greedy branch is unaffected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _kernels as K
from ._rng import Rng


class Outcome(IntEnum):
    NEW_GLOBAL_BEST = 0
    IMPROVED_LOCAL = 1
    ACCEPTED = 2
    REJECTED = 3


@dataclass
class OperatorStats:
    arms: int
    segment_length: int = 100
    reaction: float = 0.5  # weight update step (lambda)
    rewards: tuple[float, float, float] = (3.0, 5.0, 10.0)
    weights: np.ndarray = field(init=False)
    scores: np.ndarray = field(init=False)
    usages: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.arms < 1:
            raise ValueError("need at least one arm")
        if not 0.0 <= self.reaction <= 1.0:
            raise ValueError("reaction factor must be in [0, 1]")
        self.weights = np.full(self.arms, 1.0 / self.arms, dtype=np.float64)
        self.scores = np.zeros(self.arms, dtype=np.float64)
        self.usages = np.zeros(self.arms, dtype=np.int64)


def select(stats: OperatorStats, epsilon: float, rng: Rng,
           invert_epsilon: bool = False) -> int:
    """Draw r in [0,1); r < epsilon takes the max-weight arm, otherwise a
    uniformly random arm. invert_epsilon swaps the two branches."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must be in [0, 1]")
    return int(K.bandit_select(stats.weights, epsilon, invert_epsilon, rng.state))


def record(stats: OperatorStats, op: int, outcome: Outcome) -> None:
    """Count one use of op and credit its score per the outcome (rejected
    iterations count the use but add no score)."""
    if not 0 <= op < stats.arms:
        raise ValueError(f"operator index {op} out of range")
    d1, d2, d3 = stats.rewards
    K.bandit_record(stats.scores, stats.usages, op, int(outcome), d1, d2, d3)


def end_segment(stats: OperatorStats) -> None:
    """Fold mean per-use scores into the weights, renormalize, reset counters.
    Arms unused in the segment keep their weight."""
    K.bandit_end_segment(stats.weights, stats.scores, stats.usages, stats.reaction)
