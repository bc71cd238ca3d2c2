"""Ground truth: flow-based MILP export, model-level feasibility checking, and
an exact solver for tiny instances (per-subset Held-Karp tour lengths combined
through a set-partition DP).

The MILP uses binary arc variables x_i_j_k (arc i->j assigned to salesman k),
rank variables u_i for subtour elimination on city pairs, and a makespan
variable C that upper-bounds every salesman's tour cost.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .instance import Instance
from .solution import Solution

BRUTE_FORCE_LIMIT = 14

# constraint family identifiers reported by check_model_feasibility
FAM_OBJECTIVE_LINK = "objective_link"      # tour cost <= C, one per salesman
FAM_ASSIGNMENT = "assignment"              # every city entered exactly once
FAM_DEPOT_OUT = "depot_out"                # each salesman leaves the depot once
FAM_FLOW = "flow_conservation"             # in-degree equals out-degree per city/salesman
FAM_DEPOT_IN = "depot_in"                  # each salesman returns to the depot once
FAM_RANK = "subtour_rank"                  # MTZ rank constraints on city pairs
FAM_BINARY = "binary_domain"
FAM_RANK_BOUNDS = "rank_bounds"

TOL = 1e-6


class TooLargeForExactError(ValueError):
    pass


@dataclass
class FlowModel:
    name: str
    n: int
    m: int

    @property
    def num_vertices(self) -> int:
        return self.n + 1

    @property
    def num_arcs(self) -> int:
        nv = self.num_vertices
        return nv * (nv - 1)

    @property
    def num_binaries(self) -> int:
        return self.num_arcs * self.m

    @property
    def num_continuous(self) -> int:
        return 1 + self.n  # C plus one rank variable per city

    def constraint_family_rows(self) -> dict[str, int]:
        """Logical rows per family (equality pairs counted once)."""
        return {
            FAM_OBJECTIVE_LINK: self.m,
            FAM_ASSIGNMENT: self.n,
            FAM_DEPOT_OUT: self.m,
            FAM_FLOW: self.n * self.m,
            FAM_DEPOT_IN: self.m,
            FAM_RANK: self.n * (self.n - 1),
        }


def _xname(i: int, j: int, k: int) -> str:
    return f"x_{i}_{j}_{k}"


def export_lp(inst: Instance, m: int) -> str:
    """CPLEX-LP text of the flow formulation. Equalities are written as <=/>=
    row pairs (suffixes _hi/_lo) for maximum parser compatibility."""
    if not 1 <= m <= inst.n:
        raise ValueError(f"need 1 <= m <= n, got m={m}")
    nv = inst.num_vertices
    n = inst.n
    lines = [f"\\ minmax mTSP flow model: {inst.name}, n={n}, m={m}",
             "Minimize", " obj: C", "Subject To"]

    for k in range(1, m + 1):
        terms = []
        for i in range(nv):
            for j in range(nv):
                if i == j:
                    continue
                terms.append(f"+ {inst.distance(i, j)!r} {_xname(i, j, k)}")
        lines.append(f" cap_{k}: {' '.join(terms)} - C <= 0")

    for j in range(1, nv):
        terms = [f"+ {_xname(i, j, k)}" for k in range(1, m + 1) for i in range(nv) if i != j]
        expr = " ".join(terms)
        lines.append(f" asg_{j}_hi: {expr} <= 1")
        lines.append(f" asg_{j}_lo: {expr} >= 1")

    for k in range(1, m + 1):
        expr = " ".join(f"+ {_xname(0, j, k)}" for j in range(1, nv))
        lines.append(f" dout_{k}_hi: {expr} <= 1")
        lines.append(f" dout_{k}_lo: {expr} >= 1")

    for j in range(1, nv):
        for k in range(1, m + 1):
            terms = [f"+ {_xname(i, j, k)}" for i in range(nv) if i != j]
            terms += [f"- {_xname(j, i, k)}" for i in range(nv) if i != j]
            expr = " ".join(terms)
            lines.append(f" flow_{j}_{k}_hi: {expr} <= 0")
            lines.append(f" flow_{j}_{k}_lo: {expr} >= 0")

    for k in range(1, m + 1):
        expr = " ".join(f"+ {_xname(i, 0, k)}" for i in range(1, nv))
        lines.append(f" din_{k}_hi: {expr} <= 1")
        lines.append(f" din_{k}_lo: {expr} >= 1")

    for i in range(1, nv):
        for j in range(1, nv):
            if i == j:
                continue
            xs = " ".join(f"+ {nv} {_xname(i, j, k)}" for k in range(1, m + 1))
            lines.append(f" mtz_{i}_{j}: u_{i} - u_{j} {xs} <= {nv - 1}")

    lines.append("Bounds")
    lines.append(" C >= 0")
    for i in range(1, nv):
        lines.append(f" 1 <= u_{i} <= {nv - 1}")
    lines.append("Binaries")
    for k in range(1, m + 1):
        for i in range(nv):
            for j in range(nv):
                if i != j:
                    lines.append(f" {_xname(i, j, k)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def solution_to_assignment(inst: Instance, sol: Solution):
    """Arc/rank/C assignment induced by a solution (x as a set of used arcs)."""
    arcs: dict[tuple[int, int, int], int] = {}
    u = {}
    for k0, tour in enumerate(sol.tours):
        k = k0 + 1
        if not tour:
            continue  # no arcs at all: the degree constraints flag this
        prev = 0
        for rank, c in enumerate(tour, start=1):
            arcs[(prev, c, k)] = arcs.get((prev, c, k), 0) + 1
            u[c] = rank
            prev = c
        arcs[(prev, 0, k)] = arcs.get((prev, 0, k), 0) + 1
    return arcs, u, sol.makespan


def check_model_feasibility(inst: Instance, m: int, sol: Solution,
                            C: float | None = None) -> list[str]:
    """Verify the induced assignment against every constraint family.

    Returns the violated family names (empty list = feasible model point).
    """
    nv = inst.num_vertices
    arcs, u, mk = solution_to_assignment(inst, sol)
    if C is None:
        C = mk
    out = []

    if len(sol.tours) != m:
        out.append(FAM_DEPOT_OUT)

    if any(v not in (0, 1) for v in arcs.values()):
        out.append(FAM_BINARY)

    # tour cost <= C
    for k0, tour in enumerate(sol.tours):
        cost, prev = 0.0, 0
        for c in tour:
            cost += inst.distance(prev, c)
            prev = c
        cost += inst.distance(prev, 0)
        if cost > C + TOL:
            out.append(FAM_OBJECTIVE_LINK)
            break

    for j in range(1, nv):
        indeg = sum(cnt for (a, b, k), cnt in arcs.items() if b == j)
        if indeg != 1:
            out.append(FAM_ASSIGNMENT)
            break

    for k in range(1, m + 1):
        if sum(cnt for (a, b, kk), cnt in arcs.items() if a == 0 and kk == k) != 1:
            out.append(FAM_DEPOT_OUT)
            break

    flow_bad = False
    for j in range(1, nv):
        for k in range(1, m + 1):
            indeg = sum(cnt for (a, b, kk), cnt in arcs.items() if b == j and kk == k)
            outdeg = sum(cnt for (a, b, kk), cnt in arcs.items() if a == j and kk == k)
            if indeg != outdeg:
                flow_bad = True
    if flow_bad:
        out.append(FAM_FLOW)

    for k in range(1, m + 1):
        if sum(cnt for (a, b, kk), cnt in arcs.items() if b == 0 and kk == k) != 1:
            out.append(FAM_DEPOT_IN)
            break

    rank_bad = False
    bounds_bad = False
    for c in range(1, nv):
        if c in u and not (1 <= u[c] <= nv - 1):
            bounds_bad = True
    for (a, b, k), cnt in arcs.items():
        if cnt and a != 0 and b != 0:
            ua = u.get(a)
            ub = u.get(b)
            if ua is None or ub is None or ua - ub + nv > nv - 1:
                rank_bad = True
    if rank_bad:
        out.append(FAM_RANK)
    if bounds_bad:
        out.append(FAM_RANK_BOUNDS)

    seen = set()
    return [f for f in out if not (f in seen or seen.add(f))]


# ---------------------------------------------------------------------------
# Exact optimum for tiny instances
# ---------------------------------------------------------------------------

@njit(cache=True)
def _hk_all_subsets(dist, n):
    full = 1 << n
    INF = 1e300
    dp = np.full((full, n), INF)
    par = np.full((full, n), -1, dtype=np.int32)
    for j in range(n):
        dp[1 << j, j] = dist[0, j + 1]
    for S in range(1, full):
        for j in range(n):
            if (S >> j) & 1 == 0:
                continue
            base = dp[S, j]
            if base >= INF:
                continue
            for i in range(n):
                if (S >> i) & 1:
                    continue
                S2 = S | (1 << i)
                nd = base + dist[j + 1, i + 1]
                if nd < dp[S2, i]:
                    dp[S2, i] = nd
                    par[S2, i] = j
    tsp = np.full(full, INF)
    endc = np.full(full, -1, dtype=np.int32)
    for S in range(1, full):
        for j in range(n):
            if (S >> j) & 1 and dp[S, j] < INF:
                v = dp[S, j] + dist[j + 1, 0]
                if v < tsp[S]:
                    tsp[S] = v
                    endc[S] = j
    return tsp, endc, par


@njit(cache=True)
def _partition_dp(tsp, n, m):
    full = 1 << n
    INF = 1e300
    best = np.full((m + 1, full), INF)
    choice = np.zeros((m + 1, full), dtype=np.int64)
    for S in range(1, full):
        best[1, S] = tsp[S]
        choice[1, S] = S
    for k in range(2, m + 1):
        for S in range(1, full):
            bits = 0
            tmp = S
            while tmp:
                bits += tmp & 1
                tmp >>= 1
            if bits < k:
                continue
            low = S & (-S)
            rest_mask = S ^ low
            sub = rest_mask
            while True:
                part = sub | low
                other = S ^ part
                if other > 0:
                    b = best[k - 1, other]
                    t = tsp[part]
                    v = t if t > b else b
                    if v < best[k, S]:
                        best[k, S] = v
                        choice[k, S] = part
                if sub == 0:
                    break
                sub = (sub - 1) & rest_mask
    return best, choice


def _tour_from_subset(endc, par, subset: int) -> list[int]:
    j = int(endc[subset])
    S = subset
    out = []
    while j >= 0:
        out.append(j + 1)
        pj = int(par[S, j])
        S ^= 1 << j
        j = pj
    out.reverse()
    return out


def brute_force_opt(inst: Instance, m: int) -> tuple[float, Solution]:
    """Exact minmax optimum over all partitions of the cities into m ordered
    depot-anchored tours. Refuses instances above BRUTE_FORCE_LIMIT cities."""
    n = inst.n
    if n > BRUTE_FORCE_LIMIT:
        raise TooLargeForExactError(
            f"n={n} exceeds the exact-solver limit of {BRUTE_FORCE_LIMIT}")
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}")
    mat = inst.matrix
    tsp, endc, par = _hk_all_subsets(mat, n)
    best, choice = _partition_dp(tsp, n, m)
    full = (1 << n) - 1
    value = float(best[m, full])
    tours = []
    S = full
    for k in range(m, 0, -1):
        part = int(choice[k, S])
        tours.append(_tour_from_subset(endc, par, part))
        S ^= part
    tours.reverse()
    sol = Solution(inst, tours)
    return value, sol
