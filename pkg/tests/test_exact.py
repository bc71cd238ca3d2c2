import itertools

import pytest

from minmax_mtsp import Instance, Rng, generate_random
from minmax_mtsp.driver import SearchConfig, run_search
from minmax_mtsp.exact import (FAM_ASSIGNMENT, FAM_DEPOT_IN, FAM_DEPOT_OUT,
                               FAM_OBJECTIVE_LINK, FAM_RANK,
                               FlowModel, TooLargeForExactError, brute_force_opt,
                               check_model_feasibility, export_lp)
from minmax_mtsp.solution import Solution, validate
from oracle_moves import tour_length

from conftest import make_state


def test_flow_model_counts_minimal():
    fm = FlowModel("t", n=2, m=1)
    assert fm.num_arcs == 6          # 3 vertices, directed, no self loops
    assert fm.num_binaries == 6
    assert fm.num_continuous == 3    # C plus two rank variables
    rows = fm.constraint_family_rows()
    assert rows[FAM_DEPOT_OUT] + rows[FAM_DEPOT_IN] == 2  # one out + one in per salesman
    assert rows[FAM_RANK] == 2


def test_export_lp_structure():
    inst = generate_random(2, 50.0, seed=1)
    text = export_lp(inst, 1)
    assert text.splitlines()[1] == "Minimize"
    assert " obj: C" in text
    assert "Binaries" in text and "End" in text
    assert text.count(" x_") >= 6
    binaries = [ln for ln in text.splitlines()
                if ln.strip().startswith("x_") and ":" not in ln]
    assert len(binaries) == 6
    assert sum(1 for ln in text.splitlines() if "<= u_" in ln) == 2  # rank bounds
    # equality families exported as hi/lo pairs
    assert text.count("dout_1_hi") == 1 and text.count("dout_1_lo") == 1
    assert text.count("din_1_hi") == 1 and text.count("din_1_lo") == 1


def test_export_lp_depot_degree_family_count():
    inst = generate_random(5, 50.0, seed=2)
    m = 2
    text = export_lp(inst, m)
    douts = {ln.split(":")[0].strip() for ln in text.splitlines() if ln.lstrip().startswith("dout_")}
    dins = {ln.split(":")[0].strip() for ln in text.splitlines() if ln.lstrip().startswith("din_")}
    # one out-degree and one in-degree constraint per salesman (as hi/lo pairs)
    assert len(douts) == 2 * m and len(dins) == 2 * m
    mtz = [ln for ln in text.splitlines() if ln.lstrip().startswith("mtz_")]
    assert len(mtz) == inst.n * (inst.n - 1)
    caps = [ln for ln in text.splitlines() if ln.lstrip().startswith("cap_")]
    assert len(caps) == m


def test_export_lp_rejects_bad_m():
    inst = generate_random(3, 50.0, seed=3)
    with pytest.raises(ValueError):
        export_lp(inst, 4)


def test_model_feasibility_accepts_valid_solutions():
    for seed in range(10):
        inst, nb, sol = make_state(8, 3, seed=300 + seed)
        assert validate(inst, 3, sol) == []
        assert check_model_feasibility(inst, 3, sol) == []


def test_model_flags_duplicate_city():
    inst = generate_random(5, 100.0, seed=4)
    sol = Solution(inst, [[1, 2, 3], [3, 4, 5]])
    out = check_model_feasibility(inst, 2, sol)
    assert FAM_ASSIGNMENT in out


def test_model_flags_small_C():
    inst, nb, sol = make_state(6, 2, seed=5)
    out = check_model_feasibility(inst, 2, sol, C=sol.makespan - 1.0)
    assert out == [FAM_OBJECTIVE_LINK]


def test_model_flags_empty_tour():
    inst = generate_random(4, 100.0, seed=6)
    sol = Solution(inst, [[1, 2, 3, 4], []])
    out = check_model_feasibility(inst, 2, sol)
    assert FAM_DEPOT_OUT in out and FAM_DEPOT_IN in out


def test_model_matches_validate_on_mutations():
    """Feasibility of the induced model point must coincide with validate."""
    rng = Rng(17)
    agree = 0
    for seed in range(50):
        n = 5 + seed % 5
        m = 1 + seed % 3
        if m > n:
            continue
        inst, nb, sol = make_state(n, m, seed=400 + seed)
        cases = [sol.tours]
        t = sol.tours
        if len(t) > 1 and len(t[0]) > 1:
            dup = [list(x) for x in t]
            dup[1][0] = dup[0][0]                      # duplicate + missing
            cases.append(dup)
            emp = [list(x) for x in t]
            emp[1] = []                                # empty tour + missing
            cases.append(emp)
            two = [list(x) for x in t]
            two[0] = two[0] + [two[0][0]]              # city twice in one tour
            cases.append(two)
        for tours in cases:
            cand = Solution(inst, tours)
            ok_validate = validate(inst, m, cand) == []
            ok_model = check_model_feasibility(inst, m, cand) == []
            assert ok_validate == ok_model
            agree += 1
    assert agree >= 120


def test_brute_force_forced_partition():
    # n == m: every tour is an out-and-back; optimum is the farthest city
    inst = generate_random(5, 100.0, seed=7)
    value, sol = brute_force_opt(inst, 5)
    expect = max(2 * inst.distance(0, c) for c in range(1, 6))
    assert value == pytest.approx(expect, abs=1e-9)
    assert validate(inst, 5, sol) == []


def test_brute_force_m1_equals_permutation_enumeration():
    for seed in range(5):
        inst = generate_random(8, 100.0, seed=seed)
        value, sol = brute_force_opt(inst, 1)
        enum = min(tour_length(inst, list(p))
                   for p in itertools.permutations(range(1, 9)))
        assert value == pytest.approx(enum, abs=1e-9)
        assert sol.makespan == pytest.approx(value, abs=1e-9)


def test_brute_force_square_pairs_adjacent_corners():
    inst = Instance("sq", (5.0, 5.0),
                    [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)])
    value, sol = brute_force_opt(inst, 2)
    # independent enumeration of all 2-partitions with per-part permutations
    best = float("inf")
    cities = [1, 2, 3, 4]
    for r in range(1, 4):
        for part in itertools.combinations(cities, r):
            rest = [c for c in cities if c not in part]
            la = min(tour_length(inst, list(p)) for p in itertools.permutations(part))
            lb = min(tour_length(inst, list(p)) for p in itertools.permutations(rest))
            best = min(best, max(la, lb))
    assert value == pytest.approx(best, abs=1e-9)
    # optimal split puts adjacent corners together
    groups = [set(t) for t in sol.tours]
    assert {1, 2} in groups or {2, 3} in groups or {3, 4} in groups or {1, 4} in groups


def test_brute_force_refuses_large():
    inst = generate_random(15, 100.0, seed=8)
    with pytest.raises(TooLargeForExactError):
        brute_force_opt(inst, 2)


def test_brute_force_lower_bounds_heuristic():
    for seed in range(5):
        inst = generate_random(9, 100.0, seed=500 + seed)
        opt, _ = brute_force_opt(inst, 3)
        res = run_search(inst, 3, SearchConfig(seed=seed, budget_iterations=300))
        assert opt <= res.best.makespan + 1e-9


# ---------------------------------------------------------------------------
# End-to-end MILP check: parse the exported CPLEX-LP text (our own subset) and
# solve it with scipy's HiGHS backend; the optimum must match the exact DP.
# ---------------------------------------------------------------------------

def _parse_lp(text):
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip() and not ln.startswith("\\")]
    sections = {"Minimize": [], "Subject To": [], "Bounds": [], "Binaries": []}
    cur = None
    for ln in lines:
        s = ln.strip()
        if s in sections or s == "End":
            cur = s
            continue
        if cur in sections:
            sections[cur].append(s)
    def parse_terms(expr):
        toks = expr.split()
        terms, sign, coef = [], 1.0, None
        for tok in toks:
            if tok == "+":
                sign, coef = 1.0, None
            elif tok == "-":
                sign, coef = -1.0, None
            else:
                try:
                    coef = float(tok)
                except ValueError:
                    terms.append((sign * (coef if coef is not None else 1.0), tok))
                    sign, coef = 1.0, None
        return terms
    rows = []
    for s in sections["Subject To"]:
        body = s.split(":", 1)[1].strip()
        for op in ("<=", ">=", "="):
            if f" {op} " in body:
                expr, rhs = body.rsplit(f" {op} ", 1)
                rows.append((parse_terms(expr), op, float(rhs)))
                break
    bounds = {}
    for s in sections["Bounds"]:
        toks = s.split()
        if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
            bounds[toks[2]] = (float(toks[0]), float(toks[4]))
        elif len(toks) == 3 and toks[1] == ">=":
            bounds[toks[0]] = (float(toks[2]), None)
    return parse_terms(sections["Minimize"][0].split(":", 1)[1]), rows, bounds, set(sections["Binaries"])


def test_exported_lp_solves_to_exact_optimum():
    milp = pytest.importorskip("scipy.optimize").milp
    import numpy as np
    from scipy.optimize import LinearConstraint, Bounds

    inst = generate_random(5, 100.0, seed=12)
    opt, _ = brute_force_opt(inst, 2)
    objective, rows, bounds, binaries = _parse_lp(export_lp(inst, 2))

    names = sorted({v for terms, _, _ in rows for _, v in terms}
                   | {v for _, v in objective} | binaries | set(bounds))
    idx = {v: i for i, v in enumerate(names)}
    nvar = len(names)
    c = np.zeros(nvar)
    for coef, v in objective:
        c[idx[v]] += coef
    A, lo, hi = [], [], []
    for terms, op, rhs in rows:
        row = np.zeros(nvar)
        for coef, v in terms:
            row[idx[v]] += coef
        A.append(row)
        lo.append(rhs if op in (">=", "=") else -np.inf)
        hi.append(rhs if op in ("<=", "=") else np.inf)
    lb = np.zeros(nvar)
    ub = np.full(nvar, np.inf)
    for v, (vlo, vhi) in bounds.items():
        lb[idx[v]] = vlo
        if vhi is not None:
            ub[idx[v]] = vhi
    for v in binaries:
        lb[idx[v]], ub[idx[v]] = 0.0, 1.0
    integrality = np.array([1.0 if v in binaries else 0.0 for v in names])
    res = milp(c, constraints=LinearConstraint(np.array(A), lo, hi),
               bounds=Bounds(lb, ub), integrality=integrality)
    assert res.success, res.message
    assert res.fun == pytest.approx(opt, abs=1e-6)
