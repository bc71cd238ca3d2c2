"""Ruin-and-recreate perturbation: five removal and three insertion operators.

Every removal operator takes out floor(l*n) cities (the empty-tour guard skips
candidates whose tour is down to one city), every insertion operator puts the
removed set back, scanning positions adjacent to each city's alpha-nearest
inserted vertices with a full-scan fallback.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _kernels as K
from ._rng import Rng
from .instance import Instance, NeighborList
from .moves import DontLookBits, MoveFrequency
from .solution import Solution


class RemovalOp(IntEnum):
    SHAW = 0
    RANDOM = 1
    CROSS = 2
    WORST = 3
    INFORMATION = 4


class InsertionOp(IntEnum):
    GREEDY = 0
    BLINK = 1
    REGRET = 2


@dataclass
class RemovalContext:
    l: float = 0.15
    gamma_shaw: float = 6.0
    gamma_cross: float = 6.0
    gamma_worst: float = 3.0
    gamma_info: float = 6.0

    def removal_count(self, n: int) -> int:
        return int(self.l * n + 1e-9)


@dataclass
class InsertionContext:
    beta: float = 0.01
    k: int = 3
    # (positions scanned, positions blinked away) across calls
    blink_stats: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.int64))

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must be in [0, 1)")
        if self.k < 2:
            raise ValueError("regret depth k must be >= 2")


def _bits_for(sol: Solution, bits: DontLookBits | None) -> np.ndarray:
    return bits.bits if bits is not None else np.zeros(sol.inst.n + 1, dtype=np.uint8)


def shaw_removal(inst: Instance, nb: NeighborList, sol: Solution,
                 ctx: RemovalContext, rng: Rng,
                 bits: DontLookBits | None = None) -> list[int]:
    """Remove a chain of mutually close cities seeded at a random city."""
    coords, D, useD, metric = inst.kernel_args()
    S = np.empty(inst.n, dtype=np.int32)
    cnt = K.removal_shaw(S, ctx.removal_count(inst.n), ctx.gamma_shaw,
                         sol.seq, sol.size, sol.pos, sol.tof, inst.n, rng.state,
                         coords, D, useD, metric, _bits_for(sol, bits))
    sol.recompute()
    return [int(c) for c in S[:cnt]]


def random_removal(inst: Instance, sol: Solution, ctx: RemovalContext, rng: Rng,
                   bits: DontLookBits | None = None) -> list[int]:
    S = np.empty(inst.n, dtype=np.int32)
    cnt = K.removal_random(S, ctx.removal_count(inst.n),
                           sol.seq, sol.size, sol.pos, sol.tof, inst.n, rng.state,
                           _bits_for(sol, bits))
    sol.recompute()
    return [int(c) for c in S[:cnt]]


def cross_removal(inst: Instance, nb: NeighborList, sol: Solution,
                  ctx: RemovalContext, rng: Rng,
                  bits: DontLookBits | None = None) -> list[int]:
    """Prefer cities whose alpha neighbors are mostly served by other tours."""
    S = np.empty(inst.n, dtype=np.int32)
    cnt = K.removal_cross(S, ctx.removal_count(inst.n), ctx.gamma_cross,
                          sol.seq, sol.size, sol.pos, sol.tof, nb.lists, inst.n,
                          rng.state, _bits_for(sol, bits))
    sol.recompute()
    return [int(c) for c in S[:cnt]]


def worst_removal(inst: Instance, sol: Solution, ctx: RemovalContext, rng: Rng,
                  bits: DontLookBits | None = None) -> list[int]:
    """Prefer cities whose removal saves the most length in their tour."""
    coords, D, useD, metric = inst.kernel_args()
    S = np.empty(inst.n, dtype=np.int32)
    cnt = K.removal_worst(S, ctx.removal_count(inst.n), ctx.gamma_worst,
                          sol.seq, sol.size, sol.pos, sol.tof, inst.n, rng.state,
                          coords, D, useD, metric, _bits_for(sol, bits))
    sol.recompute()
    return [int(c) for c in S[:cnt]]


def information_removal(inst: Instance, sol: Solution, freq: MoveFrequency,
                        ctx: RemovalContext, rng: Rng,
                        bits: DontLookBits | None = None) -> list[int]:
    """Prefer cities that participated most in applied improving moves."""
    S = np.empty(inst.n, dtype=np.int32)
    cnt = K.removal_info(S, ctx.removal_count(inst.n), ctx.gamma_info,
                         sol.seq, sol.size, sol.pos, sol.tof, freq.counts, inst.n,
                         rng.state, _bits_for(sol, bits))
    sol.recompute()
    return [int(c) for c in S[:cnt]]


def _run_insertion(inst, nb, sol, removed, beta, rng, ctx: InsertionContext | None,
                   bits: DontLookBits | None):
    if not removed:
        return sol
    coords, D, useD, metric = inst.kernel_args()
    S = np.asarray(removed, dtype=np.int32)
    stats = ctx.blink_stats if ctx is not None else np.zeros(2, dtype=np.int64)
    K.insertion_greedy_blink(S, len(removed), beta,
                             sol.seq, sol.size, sol.pos, sol.tof, sol.cum, sol.tlen,
                             nb.lists, inst.n, sol.m, rng.state,
                             coords, D, useD, metric, _bits_for(sol, bits), stats)
    return sol.recompute()


def greedy_insertion(inst: Instance, nb: NeighborList, sol: Solution,
                     removed: list[int], rng: Rng,
                     bits: DontLookBits | None = None) -> Solution:
    """Insert each removed city (in removal order) at its cheapest position."""
    return _run_insertion(inst, nb, sol, removed, 0.0, rng, None, bits)


def blink_insertion(inst: Instance, nb: NeighborList, sol: Solution,
                    removed: list[int], beta: float, rng: Rng,
                    ctx: InsertionContext | None = None,
                    bits: DontLookBits | None = None) -> Solution:
    """Greedy insertion that skips each candidate position with probability beta."""
    return _run_insertion(inst, nb, sol, removed, beta, rng, ctx, bits)


def regret_insertion(inst: Instance, nb: NeighborList, sol: Solution,
                     removed: list[int], k: int = 3,
                     bits: DontLookBits | None = None) -> Solution:
    """Insert first the city with the largest summed gap between its best and
    next k-1 best positions."""
    if k < 2:
        raise ValueError("regret depth k must be >= 2")
    if not removed:
        return sol
    coords, D, useD, metric = inst.kernel_args()
    S = np.asarray(removed, dtype=np.int32)
    K.insertion_regret(S, len(removed), k,
                       sol.seq, sol.size, sol.pos, sol.tof, sol.cum, sol.tlen,
                       nb.lists, inst.n, sol.m,
                       coords, D, useD, metric, _bits_for(sol, bits))
    return sol.recompute()


def perturb(inst: Instance, nb: NeighborList, sol: Solution,
            removal: RemovalOp, insertion: InsertionOp,
            rctx: RemovalContext, ictx: InsertionContext,
            freq: MoveFrequency, rng: Rng,
            bits: DontLookBits | None = None) -> Solution:
    """Apply one removal operator then one insertion operator, in place."""
    coords, D, useD, metric = inst.kernel_args()
    S = np.empty(max(inst.n, 1), dtype=np.int32)
    K.perturb_kernel(int(removal), int(insertion), S,
                     sol.seq, sol.size, sol.pos, sol.tof, sol.cum, sol.tlen,
                     nb.lists, inst.n, sol.m, rng.state,
                     coords, D, useD, metric, _bits_for(sol, bits), freq.counts,
                     rctx.l, rctx.gamma_shaw, rctx.gamma_cross, rctx.gamma_worst,
                     rctx.gamma_info, ictx.beta, ictx.k, ictx.blink_stats)
    return sol
