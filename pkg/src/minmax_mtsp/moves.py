"""Neighborhood moves and the best-improvement variable neighborhood descent.

Ten move kinds, scanned in a fixed order. For a pair (u, v) with v drawn from
u's alpha-nearest list, x and y denote the successors of u and v in their
tours at evaluation time (0 encodes the depot).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from . import _kernels as K
from .instance import Instance, NeighborList
from .solution import Solution

IMPROVE_EPS = K.IMPROVE_EPS


class MoveKind(IntEnum):
    RELOCATE = 0           # move u after v
    RELOCATE_PAIR = 1      # move (u, x) after v, order kept
    RELOCATE_PAIR_REV = 2  # move (x, u) before v
    SWAP_SUCC = 3          # exchange x and v
    SWAP_PAIR_CITY = 4     # exchange (u, x) and v
    SWAP_PAIR_PAIR = 5     # exchange (u, x) and (v, y)
    SWAP_PAIR_PAIR_REV = 6 # exchange (x, u) and (v, y)
    TWO_OPT = 7            # intra-tour: replace (u,x),(v,y) by (u,v),(x,y)
    TWO_OPT_STAR = 8       # inter-tour: replace (u,x),(v,y) by (u,y),(v,x)
    TWO_OPT_STAR_REV = 9   # inter-tour: replace (u,x),(v,y) by (u,v),(x,y)


class StaleMoveError(RuntimeError):
    """The solution changed between evaluate_move and apply_move."""


class DontLookBits:
    """One bit per city; set after a fruitless full scan, cleared on change."""

    def __init__(self, n: int, all_set: bool = False):
        self.bits = np.full(n + 1, 1 if all_set else 0, dtype=np.uint8)

    def clear_all(self):
        self.bits[:] = 0

    def set_all(self):
        self.bits[:] = 1

    def is_set(self, city: int) -> bool:
        return bool(self.bits[city])


class MoveFrequency:
    """Per-city count of participations (as u or v) in applied improving moves."""

    def __init__(self, n: int):
        self.counts = np.zeros(n + 1, dtype=np.int64)

    def of(self, city: int) -> int:
        return int(self.counts[city])

    def decay_half(self):
        self.counts //= 2


@dataclass
class Move:
    kind: MoveKind
    u: int
    v: int
    x: int  # successor of u at evaluation time (0 = depot)
    y: int  # successor of v at evaluation time (0 = depot)
    tours: tuple[int, ...]
    delta_metric: float  # change of max length over the affected tours
    delta_total: float   # change of their summed length
    _token: tuple = field(default=(), repr=False)
    _undo: tuple | None = field(default=None, repr=False)


def _token_for(sol: Solution, u: int, v: int) -> tuple:
    return (
        int(sol.tof[u]), int(sol.pos[u]),
        int(sol.tof[v]), int(sol.pos[v]),
        int(sol.size[sol.tof[u]]), int(sol.size[sol.tof[v]]),
        int(K._succ(u, sol.seq, sol.size, sol.pos, sol.tof)),
        int(K._succ(v, sol.seq, sol.size, sol.pos, sol.tof)),
    )


def evaluate_move(inst: Instance, sol: Solution, kind: MoveKind, u: int, v: int) -> Move | None:
    """Exact O(1) delta for a candidate move, or None when not applicable."""
    if not (1 <= u <= inst.n and 1 <= v <= inst.n) or u == v:
        return None
    coords, D, useD, metric = inst.kernel_args()
    ok, dm, dt = K.eval_move(int(kind), u, v, *sol.arrays(), coords, D, useD, metric)
    if not ok:
        return None
    x = int(K._succ(u, sol.seq, sol.size, sol.pos, sol.tof))
    y = int(K._succ(v, sol.seq, sol.size, sol.pos, sol.tof))
    t1, t2 = int(sol.tof[u]), int(sol.tof[v])
    tours = (t1,) if t1 == t2 else (t1, t2)
    return Move(kind=MoveKind(kind), u=u, v=v, x=x, y=y, tours=tours,
                delta_metric=float(dm), delta_total=float(dt),
                _token=_token_for(sol, u, v))


def apply_move(sol: Solution, move: Move,
               bits: DontLookBits | None = None,
               freq: MoveFrequency | None = None) -> Solution:
    """Apply an evaluated move in place; updates caches, bits and frequencies."""
    if move._token != _token_for(sol, move.u, move.v):
        raise StaleMoveError(f"solution changed since {move.kind.name} was evaluated")
    n = sol.inst.n
    b = bits.bits if bits is not None else np.zeros(n + 1, dtype=np.uint8)
    f = freq.counts if freq is not None else np.zeros(n + 1, dtype=np.int64)
    undo = tuple((t, sol.size[t], sol.seq[t, : sol.size[t]].copy()) for t in move.tours)
    coords, D, useD, metric = sol.inst.kernel_args()
    K.apply_move(int(move.kind), move.u, move.v, *sol.arrays(), coords, D, useD, metric, b, f)
    move._undo = undo
    return sol


def revert_move(sol: Solution, move: Move) -> Solution:
    """Restore the tours affected by the last apply_move of this Move."""
    if move._undo is None:
        raise RuntimeError("move was never applied")
    coords, D, useD, metric = sol.inst.kernel_args()
    for t, old_size, old_row in move._undo:
        sol.size[t] = old_size
        sol.seq[t, :old_size] = old_row
        K.rebuild_tour(t, *sol.arrays(), coords, D, useD, metric)
    move._undo = None
    return sol


def local_search(inst: Instance, nb: NeighborList, sol: Solution,
                 freq: MoveFrequency | None = None,
                 bits: DontLookBits | None = None,
                 first_improvement: bool = False) -> Solution:
    """Descend to a solution with no improving move in any of the ten
    neighborhoods restricted to alpha-candidates. In-place; returns sol."""
    if bits is None:
        bits = DontLookBits(inst.n)
    if freq is None:
        freq = MoveFrequency(inst.n)
    coords, D, useD, metric = inst.kernel_args()
    K.local_search_fused(*sol.arrays(), nb.lists, bits.bits, freq.counts,
                          first_improvement, coords, D, useD, metric, inst.n)
    return sol
