import random

import pytest

from netopp import ModelParams, Network


def make_random_graph(n: int, max_deg: int, rng: random.Random, p_edge: float = 0.5) -> Network:
    """Random simple graph with a degree cap, deterministic given rng state."""
    edges = []
    deg = [0] * n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    for i, j in pairs:
        if deg[i] < max_deg and deg[j] < max_deg and rng.random() < p_edge:
            edges.append((i, j))
            deg[i] += 1
            deg[j] += 1
    return Network(n, edges)


@pytest.fixture
def rng():
    return random.Random(20240612)


@pytest.fixture
def base_params():
    return ModelParams(0.5, 0.3, 0.0)
