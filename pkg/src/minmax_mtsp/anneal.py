"""Probabilistic acceptance with a geometric cooling schedule."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

from ._rng import Rng
from .solution import Solution


class AcceptOutcome(IntEnum):
    NEW_BEST = 0
    IMPROVED_LOCAL = 1
    ACCEPTED = 2
    REJECTED = 3


def initial_temperature(f_init: float, w: float, p_accept: float) -> float:
    """Starting temperature such that a move worsening by w*f_init is taken
    with probability p_accept."""
    if not 0.0 < p_accept < 1.0:
        raise ValueError("p_accept must be in (0, 1)")
    if f_init <= 0 or w <= 0:
        raise ValueError("f_init and w must be positive")
    return -w * f_init / math.log(p_accept)


def cooling_factor(t0: float, tf: float, i_max: int) -> float:
    """Per-iteration multiplier driving t0 to tf over i_max iterations."""
    if i_max < 1:
        raise ValueError("i_max must be >= 1")
    if not 0.0 < tf < t0:
        raise ValueError("need 0 < tf < t0")
    return (tf / t0) ** (1.0 / i_max)


@dataclass
class Temperature:
    t0: float
    tf: float
    c: float
    current: float
    w: float = 0.35
    p_accept: float = 0.7

    @classmethod
    def for_run(cls, f_init: float, i_max: int, w: float = 0.35,
                p_accept: float = 0.7, tf: float = 0.0001) -> "Temperature":
        t0 = max(initial_temperature(f_init, w, p_accept), 1e-12)
        c = cooling_factor(t0, tf, i_max) if tf < t0 else 1.0
        return cls(t0=t0, tf=tf, c=c, current=t0, w=w, p_accept=p_accept)

    def cool(self) -> float:
        self.current *= self.c
        return self.current

    def reset(self):
        self.current = self.t0


def accept(phi: Solution, phi_local: Solution, phi_best: Solution,
           temperature: float, rng: Rng) -> tuple[Solution, Solution, Solution, AcceptOutcome]:
    """One acceptance step.

    Strict improvement over the global best adopts phi everywhere; improvement
    over the current local optimum replaces it; otherwise phi is kept with
    probability exp(-(f(phi)-f(phi'))/T), else the search resumes from phi'.
    Returns the new (phi, phi', phi*) triple and what happened.
    """
    f = phi.makespan
    if f < phi_best.makespan:
        kept = phi.copy()
        return phi, kept, phi.copy(), AcceptOutcome.NEW_BEST
    if f < phi_local.makespan:
        return phi, phi.copy(), phi_best, AcceptOutcome.IMPROVED_LOCAL
    df = f - phi_local.makespan
    if math.exp(-df / temperature) > rng.uniform():
        return phi, phi.copy(), phi_best, AcceptOutcome.ACCEPTED
    return phi_local.copy(), phi_local, phi_best, AcceptOutcome.REJECTED
