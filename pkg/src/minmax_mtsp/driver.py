"""Main search loop: construction, local optima exploration, probabilistic
acceptance, bandit-guided perturbation, and restarts.

The loop runs inside a jitted kernel in chunks of at most `chunk` iterations;
between chunks the wrapper checks wall-clock budgets, streams the trace and
services external single-tour improvers. All randomness is consumed in-kernel
from one seeded stream, so a run is fully deterministic for a fixed seed and
an iteration-count stop rule.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as K
from ._rng import Rng
from .anneal import Temperature
from .instance import Instance, InfeasibleInstanceError, build_neighbor_lists
from .moves import DontLookBits, MoveFrequency
from .single_tour import ImproverStrategy, TourImprover, improve_tour
from .solution import Solution, greedy_random_init

TRACE_COLUMNS = ("iter", "f_phi", "f_local", "f_best", "removal_op",
                 "insertion_op", "outcome", "temperature", "ms")

OUTCOME_NAMES = ("new_best", "improved_local", "accepted", "rejected")


@dataclass
class SearchConfig:
    """All tunables; defaults follow the tuned values the solver ships with."""
    i_max: int = 40000            # iterations per restart round
    p_accept: float = 0.7
    alpha: int = 10               # neighbor-list granularity
    l: float = 0.15               # perturbation length (fraction of n removed)
    epsilon: float = 0.01
    reaction: float = 0.5         # bandit weight update step
    gamma_shaw: float = 6.0
    gamma_cross: float = 6.0
    gamma_worst: float = 3.0
    gamma_info: float = 6.0
    beta: float = 0.01            # blink probability
    regret_k: int = 3
    rewards: tuple[float, float, float] = (3.0, 5.0, 10.0)
    segment_length: int = 100
    i_threshold: int = 1000       # single-tour improvement gate
    tf: float = 0.0001
    w: float = 0.35
    invert_epsilon: bool = False
    first_improvement: bool = False
    validate_every: int = 1000
    seed: int = 0
    # stop rule: whichever of these triggers first
    budget_iterations: int | None = None
    budget_ms: float | None = None
    target_objective: float | None = None
    tour_improver: TourImprover = field(default_factory=TourImprover.builtin)
    trace: bool = True
    chunk: int = 128

    def stop_rule_set(self) -> bool:
        return (self.budget_iterations is not None or self.budget_ms is not None
                or self.target_objective is not None)


class RunTrace:
    """Per-iteration record of the search; one row per main-loop iteration."""

    def __init__(self):
        self._chunks: list[tuple[np.ndarray, ...]] = []

    def _append(self, fphi, floc, fbest, dop, rop, out, temp, nd, ms):
        self._chunks.append((fphi[:nd].copy(), floc[:nd].copy(), fbest[:nd].copy(),
                             dop[:nd].copy(), rop[:nd].copy(), out[:nd].copy(),
                             temp[:nd].copy(), np.full(nd, ms, dtype=np.float64)))

    def __len__(self):
        return sum(len(c[0]) for c in self._chunks)

    def column(self, name: str) -> np.ndarray:
        idx = {"f_phi": 0, "f_local": 1, "f_best": 2, "removal_op": 3,
               "insertion_op": 4, "outcome": 5, "temperature": 6, "ms": 7}[name]
        if not self._chunks:
            return np.empty(0)
        return np.concatenate([c[idx] for c in self._chunks])

    def rows(self):
        it = 0
        for c in self._chunks:
            for i in range(len(c[0])):
                yield (it, c[0][i], c[1][i], c[2][i], int(c[3][i]), int(c[4][i]),
                       OUTCOME_NAMES[int(c[5][i])], c[6][i], c[7][i])
                it += 1

    def to_csv(self, path: str):
        with open(path, "w") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for row in self.rows():
                it, fphi, floc, fbest, dop, rop, out, temp, ms = row
                fh.write(f"{it},{fphi!r},{floc!r},{fbest!r},{dop},{rop},{out},{temp!r},{ms:.1f}\n")


@dataclass
class RunResult:
    best: Solution
    trace: RunTrace
    iterations: int
    time_ms: float
    restarts: int = 0


def _pack_config(cfg: SearchConfig, temp: Temperature):
    cfg_f = np.array([
        cfg.l, cfg.epsilon, cfg.reaction, cfg.gamma_shaw, cfg.gamma_cross,
        cfg.gamma_worst, cfg.gamma_info, cfg.beta, cfg.tf, cfg.w, cfg.p_accept,
        cfg.rewards[0], cfg.rewards[1], cfg.rewards[2],
        math.nan if cfg.target_objective is None else cfg.target_objective,
        temp.c,
    ], dtype=np.float64)
    cfg_i = np.array([
        cfg.i_max, cfg.i_threshold, cfg.segment_length, cfg.regret_k,
        1 if cfg.invert_epsilon else 0,
        1 if cfg.first_improvement else 0,
        1 if cfg.tour_improver.strategy is ImproverStrategy.BUILTIN else 0,
        cfg.validate_every,
    ], dtype=np.int64)
    return cfg_f, cfg_i


def run_search(inst: Instance, m: int, config: SearchConfig | None = None) -> RunResult:
    """Run the full metaheuristic and return the best solution found.

    Raises InfeasibleInstanceError before any iteration when m > n or m < 1.
    One of the stop rules (iterations, wall-clock, target) must be set.
    """
    cfg = config or SearchConfig()
    if m < 1 or m > inst.n:
        raise InfeasibleInstanceError(f"need 1 <= m <= n, got m={m}, n={inst.n}")
    if not cfg.stop_rule_set():
        raise ValueError("no stop rule: set budget_iterations, budget_ms or target_objective")

    t_start = time.perf_counter()
    rng = Rng(cfg.seed)
    nb = build_neighbor_lists(inst, cfg.alpha)
    coords, D, useD, metric = inst.kernel_args()
    n = inst.n

    phi = greedy_random_init(inst, m, nb, rng)
    phi_local = phi.copy()
    phi_best = phi.copy()
    temp = Temperature.for_run(max(phi.makespan, 1e-9), cfg.i_max,
                               w=cfg.w, p_accept=cfg.p_accept, tf=cfg.tf)

    trace = RunTrace()
    budget_iters = cfg.budget_iterations if cfg.budget_iterations is not None else (1 << 62)
    if budget_iters <= 0:
        return RunResult(best=phi_best, trace=trace, iterations=0,
                         time_ms=(time.perf_counter() - t_start) * 1e3)

    bits = DontLookBits(n)
    freq = MoveFrequency(n)
    S = np.empty(max(n, 1), dtype=np.int32)
    wD = np.full(5, 0.2, dtype=np.float64)
    pD = np.zeros(5, dtype=np.float64)
    thD = np.zeros(5, dtype=np.int64)
    wR = np.full(3, 1.0 / 3.0, dtype=np.float64)
    pR = np.zeros(3, dtype=np.float64)
    thR = np.zeros(3, dtype=np.int64)
    cfg_f, cfg_i = _pack_config(cfg, temp)
    st_f = np.array([temp.t0, temp.t0], dtype=np.float64)
    st_i = np.array([0, 0, -1, -1, 0], dtype=np.int64)  # Iter, giter, lastD, lastR, phase

    chunk = max(1, cfg.chunk)
    tr_fphi = np.zeros(chunk, dtype=np.float64)
    tr_floc = np.zeros(chunk, dtype=np.float64)
    tr_fbest = np.zeros(chunk, dtype=np.float64)
    tr_D = np.zeros(chunk, dtype=np.int64)
    tr_R = np.zeros(chunk, dtype=np.int64)
    tr_out = np.zeros(chunk, dtype=np.int64)
    tr_T = np.zeros(chunk, dtype=np.float64)
    blink_stats = np.zeros(2, dtype=np.int64)

    done = 0
    while True:
        this_chunk = min(chunk, budget_iters - done)
        if this_chunk <= 0:
            break
        code, nd = K.run_chunk(
            this_chunk, coords, D, useD, metric, nb.lists, n, m,
            *phi.arrays(), *phi_local.arrays(), *phi_best.arrays(),
            bits.bits, freq.counts, S,
            wD, pD, thD, wR, pR, thR,
            cfg_f, cfg_i, st_f, st_i, rng.state,
            tr_fphi, tr_floc, tr_fbest, tr_D, tr_R, tr_out, tr_T, blink_stats)
        done += nd
        elapsed_ms = (time.perf_counter() - t_start) * 1e3
        if cfg.trace and nd > 0:
            trace._append(tr_fphi, tr_floc, tr_fbest, tr_D, tr_R, tr_out, tr_T, nd, elapsed_ms)
        if code == K.CHUNK_INVALID:
            raise RuntimeError("internal feasibility check failed during the search")
        if code == K.CHUNK_EXTERNAL_STI:
            # service the external per-tour improver, then resume mid-iteration
            improved = [improve_tour(inst, tr, cfg.tour_improver) for tr in phi.tours]
            rebuilt = Solution(inst, improved)
            phi.seq[:, :] = rebuilt.seq
            phi.size[:] = rebuilt.size
            phi.recompute()
            bits.clear_all()
            continue
        if code == K.CHUNK_TARGET:
            break
        if cfg.budget_ms is not None and elapsed_ms >= cfg.budget_ms:
            break
        if done >= budget_iters:
            break

    return RunResult(best=phi_best, trace=trace, iterations=done,
                     time_ms=(time.perf_counter() - t_start) * 1e3)


@dataclass
class BatchSummary:
    best: float
    average: float
    per_run: list[float]
    wall_ms: float
    best_solution: Solution


def _one_run(args) -> tuple[float, list[list[int]]]:
    inst, m, cfg = args
    res = run_search(inst, m, cfg)
    return res.best.makespan, res.best.tours


def pool_size() -> int:
    env = os.environ.get("MMTSP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def run_batch(inst: Instance, m: int, config: SearchConfig, runs: int,
              parallel: bool | None = None) -> BatchSummary:
    """Independent seeded runs (seed, seed+1, ...); reports best and average."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    t0 = time.perf_counter()
    cfgs = [replace(config, seed=config.seed + i, trace=False) for i in range(runs)]
    workers = min(pool_size(), runs)
    use_pool = workers > 1 and runs > 1 if parallel is None else parallel
    results: list[tuple[float, list[list[int]]]] = []
    if use_pool:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_one_run, [(inst, m, c) for c in cfgs]))
    else:
        results = [_one_run((inst, m, c)) for c in cfgs]
    values = [r[0] for r in results]
    best_idx = int(np.argmin(values))
    best_sol = Solution(inst, results[best_idx][1])
    return BatchSummary(best=min(values), average=float(np.mean(values)),
                        per_run=values, wall_ms=(time.perf_counter() - t0) * 1e3,
                        best_solution=best_sol)
