"""Minmax multiple-TSP solver: bandit-guided iterated local search with exact
oracles, MILP export, and a benchmark harness."""

from ._rng import Rng
from .bks import BksRegistry
from .driver import RunResult, RunTrace, SearchConfig, run_batch, run_search
from .exact import brute_force_opt, check_model_feasibility, export_lp
from .instance import (Instance, Metric, NeighborList, build_neighbor_lists,
                       generate_random, parse_tsplib, write_tsplib)
from .moves import (DontLookBits, Move, MoveFrequency, MoveKind, apply_move,
                    evaluate_move, local_search, revert_move)
from .perturb import (InsertionContext, InsertionOp, RemovalContext, RemovalOp,
                      blink_insertion, cross_removal, greedy_insertion,
                      information_removal, perturb, random_removal,
                      regret_insertion, shaw_removal, worst_removal)
from .single_tour import ImproverStrategy, TourImprover, improve_tour, single_tour_improve
from .solution import (Solution, format_solution, greedy_random_init,
                       objective, parse_solution, recompute_caches, validate)

__version__ = "0.1.0"
