"""Solutions: m depot-anchored tours with cached lengths and O(1) city lookup."""
from __future__ import annotations

import numpy as np

from . import _kernels as K
from ._rng import Rng
from .instance import Instance, InfeasibleInstanceError, NeighborList

CACHE_TOL = 1e-6


class Solution:
    """Value object; tours hold 1-based city ids, the depot is implicit at both ends.

    The backing arrays are shared with the jitted kernels: seq/size hold the
    tour sequences, pos/tof give each city's (position, tour) in O(1), cum is
    the running length from the depot, tlen the cached tour lengths.
    """

    __slots__ = ("inst", "m", "seq", "size", "pos", "tof", "cum", "tlen")

    def __init__(self, inst: Instance, tours: list[list[int]]):
        n = inst.n
        m = len(tours)
        self.inst = inst
        self.m = m
        self.seq = np.zeros((m, n), dtype=np.int32)
        self.size = np.zeros(m, dtype=np.int32)
        self.pos = np.full(n + 1, -1, dtype=np.int32)
        self.tof = np.full(n + 1, -1, dtype=np.int32)
        self.cum = np.zeros((m, n), dtype=np.float64)
        self.tlen = np.zeros(m, dtype=np.float64)
        for t, tour in enumerate(tours):
            if len(tour) > n:
                raise ValueError(f"tour {t} longer than the city count")
            self.size[t] = len(tour)
            for p, c in enumerate(tour):
                self.seq[t, p] = c
        self.recompute()

    @classmethod
    def _empty(cls, inst: Instance, m: int) -> "Solution":
        sol = cls.__new__(cls)
        n = inst.n
        sol.inst = inst
        sol.m = m
        sol.seq = np.zeros((m, n), dtype=np.int32)
        sol.size = np.zeros(m, dtype=np.int32)
        sol.pos = np.full(n + 1, -1, dtype=np.int32)
        sol.tof = np.full(n + 1, -1, dtype=np.int32)
        sol.cum = np.zeros((m, n), dtype=np.float64)
        sol.tlen = np.zeros(m, dtype=np.float64)
        return sol

    @property
    def tours(self) -> list[list[int]]:
        return [[int(c) for c in self.seq[t, : self.size[t]]] for t in range(self.m)]

    @property
    def tour_lengths(self) -> list[float]:
        return [float(x) for x in self.tlen]

    @property
    def makespan(self) -> float:
        return float(self.tlen.max()) if self.m else 0.0

    def city_location(self, city: int) -> tuple[int, int]:
        return int(self.tof[city]), int(self.pos[city])

    def recompute(self) -> "Solution":
        coords, D, useD, metric = self.inst.kernel_args()
        K.rebuild_all(self.seq, self.size, self.pos, self.tof, self.cum, self.tlen,
                      coords, D, useD, metric)
        return self

    def copy(self) -> "Solution":
        sol = Solution._empty(self.inst, self.m)
        sol.seq[:, :] = self.seq
        sol.size[:] = self.size
        sol.pos[:] = self.pos
        sol.tof[:] = self.tof
        sol.cum[:, :] = self.cum
        sol.tlen[:] = self.tlen
        return sol

    def arrays(self):
        return self.seq, self.size, self.pos, self.tof, self.cum, self.tlen

    def __eq__(self, other):
        return isinstance(other, Solution) and self.tours == other.tours

    def __repr__(self):
        return f"Solution(m={self.m}, makespan={self.makespan:.4f})"


def objective(sol: Solution) -> float:
    """Length of the longest tour (the minmax objective)."""
    return sol.makespan


def validate(inst: Instance, m: int, sol: Solution) -> list[str]:
    """Return a list of violations; empty means the solution is feasible."""
    out: list[str] = []
    if sol.m != m:
        out.append(f"tour count {sol.m} != m {m}")
    seen: dict[int, int] = {}
    for t, tour in enumerate(sol.tours):
        if not tour:
            out.append(f"empty tour {t}")
        for c in tour:
            if not 1 <= c <= inst.n:
                out.append(f"city {c} out of range")
            elif c in seen:
                out.append(f"duplicate city {c}")
            else:
                seen[c] = t
    for c in range(1, inst.n + 1):
        if c not in seen:
            out.append(f"missing city {c}")
    # cache consistency
    for t, tour in enumerate(sol.tours):
        if t >= sol.m:
            break
        length = 0.0
        prev = 0
        for c in tour:
            length += inst.distance(prev, c)
            prev = c
        length += inst.distance(prev, 0)
        if abs(length - sol.tlen[t]) > CACHE_TOL:
            out.append(f"stale cached length for tour {t}")
    if sol.m and abs(sol.makespan - float(sol.tlen.max())) > CACHE_TOL:
        out.append("stale makespan cache")
    return out


def recompute_caches(inst: Instance, sol: Solution) -> Solution:
    return sol.recompute()


def greedy_random_init(inst: Instance, m: int, nb: NeighborList, rng: Rng) -> Solution:
    """Randomized greedy construction: seed each tour with a random city, then
    repeatedly extend the currently shortest tour with the cheapest append
    among the last city's alpha nearest unassigned cities (all unassigned
    cities when those are exhausted)."""
    if m < 1:
        raise InfeasibleInstanceError("need at least one tour")
    if m > inst.n:
        raise InfeasibleInstanceError(f"m={m} exceeds city count n={inst.n}")
    sol = Solution._empty(inst, m)
    coords, D, useD, metric = inst.kernel_args()
    K.greedy_init_kernel(sol.seq, sol.size, sol.pos, sol.tof, sol.cum, sol.tlen,
                         nb.lists, coords, D, useD, metric, inst.n, m, rng.state)
    return sol


def format_solution(sol: Solution, name: str | None = None) -> str:
    """One header line 'NAME m OBJECTIVE', then one line of city ids per tour."""
    head = f"{name or sol.inst.name} {sol.m} {repr(sol.makespan)}"
    lines = [head]
    for tour in sol.tours:
        lines.append(" ".join(str(c) for c in tour))
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[str, int, float, list[list[int]]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty solution file")
    parts = lines[0].split()
    if len(parts) < 3:
        raise ValueError("malformed solution header, expected 'NAME m OBJECTIVE'")
    name = " ".join(parts[:-2])
    m = int(parts[-2])
    obj = float(parts[-1])
    tours = [[int(c) for c in ln.split()] for ln in lines[1 : 1 + m]]
    if len(tours) != m:
        raise ValueError(f"expected {m} tour lines, found {len(tours)}")
    return name, m, obj, tours


def load_solution(inst: Instance, text: str) -> Solution:
    _, m, _, tours = parse_solution(text)
    return Solution(inst, tours)
