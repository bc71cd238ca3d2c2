import itertools
import stat
import sys
import textwrap

import pytest

from minmax_mtsp import Instance, Rng, build_neighbor_lists, generate_random
from minmax_mtsp.moves import MoveFrequency
from minmax_mtsp.single_tour import (TourImprover, improve_tour,
                                     single_tour_improve)
from minmax_mtsp.solution import greedy_random_init, validate
from oracle_moves import tour_length

from conftest import make_state


def optimal_tour_length(inst, cities):
    """Exact depot-anchored optimum by permutation enumeration (<= 9 cities)."""
    assert len(cities) <= 9
    return min(tour_length(inst, list(p)) for p in itertools.permutations(cities))


def test_single_city_tour_unchanged():
    inst = generate_random(3, 100.0, seed=1)
    assert improve_tour(inst, [2], TourImprover.builtin()) == [2]


def test_empty_tour_rejected():
    inst = generate_random(3, 100.0, seed=1)
    with pytest.raises(ValueError):
        improve_tour(inst, [], TourImprover.builtin())


def test_square_crossing_resolved_to_perimeter():
    inst = Instance("sq", (0.0, 0.0), [(10.0, 0.0), (10.0, 10.0), (0.0, 10.0), (5.0, 15.0)])
    crossed = [1, 3, 2, 4]
    best = improve_tour(inst, crossed, TourImprover.builtin())
    assert sorted(best) == [1, 2, 3, 4]
    assert tour_length(inst, best) == pytest.approx(optimal_tour_length(inst, [1, 2, 3, 4]), abs=1e-9)


def test_builtin_bounded_by_exact_and_input():
    for seed in range(10):
        inst = generate_random(9, 100.0, seed=seed)
        tour = list(range(1, 10))
        Rng(seed)  # documentational: improver is deterministic
        out = improve_tour(inst, tour, TourImprover.builtin())
        assert sorted(out) == tour
        lo = optimal_tour_length(inst, tour)
        assert lo - 1e-9 <= tour_length(inst, out) <= tour_length(inst, tour) + 1e-9


def test_permutation_preserved_on_random_tours():
    rng = Rng(3)
    for seed in range(20):
        inst = generate_random(12, 100.0, seed=seed)
        tour = list(range(1, 13))
        for i in range(11, 0, -1):
            j = rng.below(i + 1)
            tour[i], tour[j] = tour[j], tour[i]
        out = improve_tour(inst, tour, TourImprover.builtin())
        assert sorted(out) == sorted(tour)


def _script(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(f"#!{sys.executable}\n" + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IEXEC)
    return str(path)


DP_SOLVER = """
    import math, sys

    def parse(path):
        pts = []
        with open(path) as fh:
            in_coords = False
            for line in fh:
                s = line.strip()
                if s == "NODE_COORD_SECTION":
                    in_coords = True
                    continue
                if not in_coords or s == "EOF" or not s:
                    continue
                _, x, y = s.split()
                pts.append((float(x), float(y)))
        return pts

    pts = parse(sys.argv[1])
    n = len(pts)
    def d(i, j):
        return math.dist(pts[i], pts[j])
    full = 1 << (n - 1)
    INF = float("inf")
    dp = [[INF] * (n - 1) for _ in range(full)]
    par = [[-1] * (n - 1) for _ in range(full)]
    for j in range(n - 1):
        dp[1 << j][j] = d(0, j + 1)
    for S in range(full):
        for j in range(n - 1):
            if not S >> j & 1 or dp[S][j] == INF:
                continue
            for i in range(n - 1):
                if S >> i & 1:
                    continue
                S2 = S | (1 << i)
                nd = dp[S][j] + d(j + 1, i + 1)
                if nd < dp[S2][i]:
                    dp[S2][i] = nd
                    par[S2][i] = j
    S = full - 1
    j = min(range(n - 1), key=lambda q: dp[S][q] + d(q + 1, 0))
    order = []
    while j >= 0:
        order.append(j + 2)
        pj = par[S][j]
        S ^= 1 << j
        j = pj
    order.reverse()
    with open(sys.argv[2], "w") as fh:
        fh.write("1\\n" + "\\n".join(str(c) for c in order) + "\\n")
"""


def test_external_solver_protocol_round_trip(tmp_path):
    cmd = _script(tmp_path, "exact_tsp.py", DP_SOLVER)
    inst = generate_random(8, 100.0, seed=4)
    tour = list(range(1, 9))
    out = improve_tour(inst, tour, TourImprover.external(cmd, time_budget_ms=30000))
    assert sorted(out) == tour
    assert tour_length(inst, out) == pytest.approx(optimal_tour_length(inst, tour), abs=1e-9)


def test_external_failure_falls_back_to_builtin(tmp_path, caplog):
    import logging
    bad_exit = _script(tmp_path, "bad.py", "import sys\nsys.exit(3)\n")
    garbage = _script(tmp_path, "garbage.py",
                      "import sys\nopen(sys.argv[2], 'w').write('7 7 7')\n")
    sleeper = _script(tmp_path, "slow.py", "import time\ntime.sleep(30)\n")
    inst = generate_random(7, 100.0, seed=5)
    tour = [3, 1, 4, 2, 5, 7, 6]
    expect = improve_tour(inst, tour, TourImprover.builtin())
    for cmd, budget in ((bad_exit, 5000), (garbage, 5000), (sleeper, 300)):
        with caplog.at_level(logging.WARNING, logger="minmax_mtsp.single_tour"):
            out = improve_tour(inst, tour, TourImprover.external(cmd, time_budget_ms=budget))
        assert out == expect
        assert any("builtin" in rec.message for rec in caplog.records)
        caplog.clear()


def test_worsening_external_result_discarded(tmp_path):
    # echoes the input order reversed with the worst two swapped: a valid
    # permutation that cannot beat the builtin result
    passthru = _script(tmp_path, "echo.py", """
        import sys
        n = sum(1 for line in open(sys.argv[1]) if line and line[0].isdigit())
        order = [1] + list(range(n, 1, -1))
        open(sys.argv[2], "w").write("\\n".join(map(str, order)))
    """)
    inst = generate_random(7, 100.0, seed=6)
    tour = [1, 2, 3, 4, 5, 6, 7]
    out = improve_tour(inst, tour, TourImprover.external(passthru, time_budget_ms=5000))
    assert tour_length(inst, out) <= tour_length(inst, tour) + 1e-9


def test_single_tour_improve_monotone_and_feasible():
    for seed in range(20):
        inst, nb, sol = make_state(24, 3, seed=200 + seed)
        before = sol.makespan
        single_tour_improve(inst, nb, sol, TourImprover.builtin(), MoveFrequency(inst.n))
        assert sol.makespan <= before + 1e-9
        assert validate(inst, 3, sol) == []


def test_single_tour_improve_fixed_point():
    inst, nb, sol = make_state(15, 2, seed=9)
    freq = MoveFrequency(inst.n)
    single_tour_improve(inst, nb, sol, TourImprover.builtin(), freq)
    tours = sol.tours
    single_tour_improve(inst, nb, sol, TourImprover.builtin(), freq)
    assert sol.tours == tours


def test_per_tour_dp_oracle_yields_individually_optimal_tours(tmp_path):
    cmd = _script(tmp_path, "exact_tsp.py", DP_SOLVER)
    inst = generate_random(10, 100.0, seed=7)
    nb = build_neighbor_lists(inst, 9)
    sol = greedy_random_init(inst, 2, nb, Rng(11))
    improver = TourImprover.external(cmd, time_budget_ms=30000)
    for tour in sol.tours:
        improved = improve_tour(inst, tour, improver)
        assert tour_length(inst, improved) == pytest.approx(
            optimal_tour_length(inst, tour), abs=1e-9)
