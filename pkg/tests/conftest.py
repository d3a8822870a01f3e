import numpy as np
import pytest

from coarsecert.metric import load_graph


def path_space(n, meta=True):
    return load_graph(n, [(i, i + 1, 1.0) for i in range(n - 1)],
                      meta={"grid_shape": [n]} if meta else None)


def grid_space(w, h):
    edges = []
    for x in range(w):
        for y in range(h):
            pid = x * h + y
            if x + 1 < w:
                edges.append((pid, pid + h, 1.0))
            if y + 1 < h:
                edges.append((pid, pid + 1, 1.0))
    return load_graph(w * h, edges, meta={"grid_shape": [w, h]})


def rgg_space(n, radius, seed):
    rng = np.random.default_rng(seed)
    coords = rng.random((n, 2))
    edges = []
    for i in range(n):
        d = np.sqrt(((coords[i + 1:] - coords[i]) ** 2).sum(axis=1))
        for j in np.flatnonzero(d <= radius):
            edges.append((i, int(i + 1 + j), float(d[j])))
    return load_graph(n, edges)


@pytest.fixture(scope="session")
def p5():
    return path_space(5)


@pytest.fixture(scope="session")
def p10():
    return path_space(10)


@pytest.fixture(scope="session")
def p20():
    return path_space(20)


@pytest.fixture(scope="session")
def p100():
    return path_space(100)


@pytest.fixture(scope="session")
def p200():
    return path_space(200)


@pytest.fixture(scope="session")
def p400():
    return path_space(400)


@pytest.fixture(scope="session")
def grid20():
    return grid_space(20, 20)


@pytest.fixture(scope="session")
def cycle4():
    return load_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
