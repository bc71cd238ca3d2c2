"""Standalone improvement of individual tours, used on elite solutions.

The builtin improver runs 2-opt plus Or-opt (segment lengths 1-3) restricted
to alpha-candidates. An external TSP solver can be plugged in through a file
protocol: the command is invoked as `cmd <instance.tsp> <tour.out>` where the
instance file holds the depot plus the tour's cities and the output file is
expected to contain newline-separated 1-based node indices of that file. Any
failure (timeout, nonzero exit, bad permutation, worse tour) falls back to the
builtin improver.
"""
from __future__ import annotations

import logging
import os
import subprocess
import tempfile
from dataclasses import dataclass
from enum import Enum

from . import _kernels as K
from .instance import Instance, NeighborList, build_neighbor_lists, write_tsplib
from .moves import DontLookBits, MoveFrequency, local_search
from .solution import Solution

log = logging.getLogger(__name__)


class ImproverStrategy(Enum):
    BUILTIN = "builtin_2opt_oropt"
    EXTERNAL = "external_command"


@dataclass
class TourImprover:
    strategy: ImproverStrategy = ImproverStrategy.BUILTIN
    command: str | None = None
    time_budget_ms: int = 2000

    @classmethod
    def builtin(cls) -> "TourImprover":
        return cls(ImproverStrategy.BUILTIN)

    @classmethod
    def external(cls, command: str, time_budget_ms: int = 2000) -> "TourImprover":
        return cls(ImproverStrategy.EXTERNAL, command=command, time_budget_ms=time_budget_ms)


def _tour_length(inst: Instance, tour: list[int]) -> float:
    ln, prev = 0.0, 0
    for c in tour:
        ln += inst.distance(prev, c)
        prev = c
    return ln + inst.distance(prev, 0)


def _improve_builtin(inst: Instance, tour: list[int]) -> list[int]:
    sub = Solution(inst, [list(tour)] + [[c] for c in _absent(inst, tour)])
    # tours beyond the first only park the unused cities; improve tour 0 only
    nb = build_neighbor_lists(inst, min(10, inst.num_vertices - 1))
    coords, D, useD, metric = inst.kernel_args()
    K.improve_tour_kernel(0, *sub.arrays(), nb.lists, coords, D, useD, metric)
    return sub.tours[0]


def _absent(inst: Instance, tour: list[int]) -> list[int]:
    present = set(tour)
    return [c for c in range(1, inst.n + 1) if c not in present]


def _improve_builtin_fast(inst: Instance, nb: NeighborList, sol: Solution, t: int):
    coords, D, useD, metric = inst.kernel_args()
    K.improve_tour_kernel(t, *sol.arrays(), nb.lists, coords, D, useD, metric)


def _improve_external(inst: Instance, tour: list[int], improver: TourImprover) -> list[int] | None:
    """Run the external solver on the depot + tour cities; None on any failure."""
    cities = [inst.coords[c] for c in tour]
    sub = Instance(name="tour", depot=tuple(inst.coords[0]),
                   cities=[(float(x), float(y)) for x, y in cities],
                   metric=inst.metric)
    with tempfile.TemporaryDirectory(prefix="mmtsp-tour-") as tmp:
        in_path = os.path.join(tmp, "tour.tsp")
        out_path = os.path.join(tmp, "tour.out")
        with open(in_path, "w") as fh:
            fh.write(write_tsplib(sub))
        try:
            res = subprocess.run(
                [improver.command, in_path, out_path],
                timeout=improver.time_budget_ms / 1000.0,
                capture_output=True,
            )
        except (subprocess.TimeoutExpired, OSError) as exc:
            log.warning("external tour improver failed (%s); using builtin", exc)
            return None
        if res.returncode != 0:
            log.warning("external tour improver exit %d; using builtin", res.returncode)
            return None
        try:
            with open(out_path) as fh:
                order = [int(tok) for tok in fh.read().split()]
        except (OSError, ValueError) as exc:
            log.warning("unreadable tour file from external improver (%s)", exc)
            return None
    k = len(tour) + 1
    if sorted(order) != list(range(1, k + 1)):
        log.warning("external improver returned a non-permutation; using builtin")
        return None
    # rotate so the depot (node 1) leads, then map back to original city ids
    at = order.index(1)
    rot = order[at + 1:] + order[:at]
    return [tour[i - 2] for i in rot]


def improve_tour(inst: Instance, tour: list[int], improver: TourImprover) -> list[int]:
    """Return a tour over the same cities with length <= the input's."""
    if not tour:
        raise ValueError("tour must be non-empty")
    if len(tour) == 1:
        return list(tour)
    base_len = _tour_length(inst, tour)
    result = None
    if improver.strategy is ImproverStrategy.EXTERNAL:
        if not improver.command:
            raise ValueError("external improver needs a command")
        result = _improve_external(inst, tour, improver)
        if result is not None and _tour_length(inst, result) > base_len + 1e-9:
            log.warning("external improver worsened the tour; using builtin")
            result = None
    if result is None:
        result = _improve_builtin(inst, tour)
    if _tour_length(inst, result) > base_len + 1e-9:
        return list(tour)
    return result


def single_tour_improve(inst: Instance, nb: NeighborList, sol: Solution,
                        improver: TourImprover, freq: MoveFrequency,
                        bits: DontLookBits | None = None) -> Solution:
    """Improve every tour independently, then run one full local search pass."""
    if improver.strategy is ImproverStrategy.BUILTIN:
        for t in range(sol.m):
            _improve_builtin_fast(inst, nb, sol, t)
    else:
        tours = sol.tours
        new_tours = [improve_tour(inst, tr, improver) for tr in tours]
        rebuilt = Solution(inst, new_tours)
        sol.seq[:, :] = rebuilt.seq
        sol.size[:] = rebuilt.size
        sol.recompute()
    if bits is None:
        bits = DontLookBits(inst.n)
    else:
        bits.clear_all()
    local_search(inst, nb, sol, freq, bits=bits)
    return sol
