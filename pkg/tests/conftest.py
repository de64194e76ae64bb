import numpy as np
import pytest

from netmp.graph import Graph


def make_k4() -> Graph:
    return Graph(4, [(a, b) for a in range(4) for b in range(a + 1, 4)])


def make_triangle() -> Graph:
    return Graph(3, [(0, 1), (0, 2), (1, 2)])


def make_path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def make_cycle(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def make_petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, 5 + i) for i in range(5)]
    return Graph(10, outer + inner + spokes)


def random_tree(n: int, rng: np.random.Generator) -> Graph:
    """Uniform-attachment random tree on n nodes."""
    edges = [(i, int(rng.integers(i))) for i in range(1, n)]
    return Graph(n, edges)


@pytest.fixture
def k4() -> Graph:
    return make_k4()


@pytest.fixture
def triangle() -> Graph:
    return make_triangle()


@pytest.fixture
def petersen() -> Graph:
    return make_petersen()
