import pytest
from importlib import resources

from minmax_mtsp import Rng, build_neighbor_lists, generate_random, parse_tsplib
from minmax_mtsp.solution import greedy_random_init


@pytest.fixture(scope="session")
def mtsp51():
    text = resources.files("minmax_mtsp").joinpath("data/mtsp51.tsp").read_text()
    return parse_tsplib(text, name="mtsp51")


def make_state(n, m, seed, alpha=None, width=100.0):
    """Random instance + greedy-constructed solution + neighbor lists."""
    inst = generate_random(n, width, seed=seed)
    nb = build_neighbor_lists(inst, alpha or min(10, n))
    sol = greedy_random_init(inst, m, nb, Rng(seed * 7 + 1))
    return inst, nb, sol
