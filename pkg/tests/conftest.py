"""Shared fixtures: named graphs and small built indices"""

from itertools import combinations

import pytest

from median_intervals.generator import GenSpec, generate, grid_graph, path_graph
from median_intervals.graph_core import Graph
from median_intervals.interval_engine import build
from median_intervals.semigroup import get_semigroup


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def cube_graph() -> Graph:
    """Q3: vertices 0..7, edges between ids differing in one bit"""
    return Graph.from_edges(8, [(u, u ^ (1 << b)) for u in range(8) for b in range(3) if u < u ^ (1 << b)])


def k23_graph() -> Graph:
    return Graph.from_edges(5, [(a, b) for a in (0, 1) for b in (2, 3, 4)])


def build_small(g: Graph, semigroup: str = "sum", base_size: int = 1, seed: int = 0):
    """Index with a tiny base case so the recursive machinery runs"""
    return build(g, get_semigroup(semigroup), base_size=base_size, seed=seed)


def all_pairs(n: int):
    return [(u, v) for u in range(n) for v in range(n)]


def all_triples(n: int):
    return list(combinations(range(n), 3))


# Instances shared by the oracle-comparison tests
SMALL_SPECS = [
    GenSpec("path", (7,)),
    GenSpec("grid", (3, 3)),
    GenSpec("grid", (4, 5), payload="ids"),
    GenSpec("tree", (20,), seed=3, payload="random", payload_seed=5),
    GenSpec("staircase_subgrid", (5, 6), seed=1),
    GenSpec("glued", (3, 3, 6), seed=2),
    GenSpec("random_expansion", (30,), seed=1),
    GenSpec("random_expansion", (30,), seed=2, payload="random", payload_seed=1),
]


def spec_id(spec: GenSpec) -> str:
    return f"{spec.family}-{'x'.join(map(str, spec.size))}-s{spec.seed}"


@pytest.fixture(params=SMALL_SPECS, ids=spec_id)
def small_graph(request) -> Graph:
    return generate(request.param)


@pytest.fixture
def grid3() -> Graph:
    return grid_graph(3, 3)


@pytest.fixture
def grid5() -> Graph:
    return grid_graph(5, 5)


@pytest.fixture
def p4() -> Graph:
    return path_graph(4)


@pytest.fixture
def c6() -> Graph:
    return cycle_graph(6)


@pytest.fixture
def q3() -> Graph:
    return cube_graph()


@pytest.fixture
def k23() -> Graph:
    return k23_graph()
