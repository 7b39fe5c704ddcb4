"""Oracle agreement at the default base size on grids, trees and random expansions up to 1000 vertices"""

import math

import numpy as np
import pytest

from conftest import all_pairs, all_triples, spec_id
from median_intervals.config import DEFAULT_BASE_SIZE, Settings
from median_intervals.generator import GenSpec, generate
from median_intervals.interval_engine import build
from median_intervals.median_oracle import (
    all_pairs_distances,
    interval_folds_bruteforce,
    interval_sum_bruteforce,
    median_of_three_bruteforce,
)
from median_intervals.semigroup import SUM, get_semigroup

pytestmark = pytest.mark.acceptance

PAIR_SAMPLE = 10_000
TRIPLE_SAMPLE = 2_000
ALL_PAIRS_UP_TO = 150
ALL_TRIPLES_UP_TO = 120
ALL_DISTANCES_UP_TO = 300

INSTANCES = [
    GenSpec("grid", (8, 8)),
    GenSpec("grid", (16, 24), payload="random", payload_seed=1),
    GenSpec("grid", (32, 32)),
    GenSpec("tree", (60,), seed=4, payload="random", payload_seed=2),
    GenSpec("tree", (300,), seed=5),
    GenSpec("tree", (1000,), seed=6, payload="random", payload_seed=3),
    GenSpec("staircase_subgrid", (6, 10), seed=3),
    GenSpec("staircase_subgrid", (20, 24), seed=4, payload="random", payload_seed=4),
    GenSpec("glued", (10, 10, 80), seed=5),
    GenSpec("random_expansion", (60,), seed=1),
    GenSpec("random_expansion", (200,), seed=2, payload="random", payload_seed=5),
    GenSpec("random_expansion", (300,), seed=3),
    GenSpec("random_expansion", (400,), seed=4, payload="random", payload_seed=6),
    GenSpec("random_expansion", (500,), seed=5),
]


@pytest.fixture(scope="module", params=INSTANCES, ids=spec_id)
def instance(request):
    g = generate(request.param)
    return g, all_pairs_distances(g)


@pytest.fixture(scope="module")
def sum_index(instance):
    g, _ = instance
    return build(g, SUM, Settings())


def sample_pairs(n: int, size: int = PAIR_SAMPLE):
    rng = np.random.default_rng(n)
    return [tuple(p) for p in rng.integers(0, n, size=(size, 2)).tolist()]


def sample_triples(n: int, size: int = TRIPLE_SAMPLE):
    rng = np.random.default_rng(n + 1)
    return [tuple(t) for t in rng.integers(0, n, size=(size, 3)).tolist()]


class TestAcceptance:
    @pytest.mark.parametrize("semigroup", ["sum", "min", "fingerprint"])
    def test_interval_folds(self, instance, semigroup):
        g, D = instance
        index = build(g, get_semigroup(semigroup), Settings(), seed=17)
        assert index.settings.base_size == DEFAULT_BASE_SIZE

        pairs = all_pairs(g.n) if g.n <= ALL_PAIRS_UP_TO else sample_pairs(g.n)
        got = [index.query(u, v) for u, v in pairs]
        expected = interval_folds_bruteforce(g, index.spec, pairs, index.values, D)
        mismatches = [p for p, a, b in zip(pairs, got, expected) if a != b]
        assert not mismatches, mismatches[:5]

        # the batched oracle agrees with the plain fold on a few pairs
        for u, v in pairs[:20]:
            assert index.query(u, v) == interval_sum_bruteforce(g, index.spec, u, v, values=index.values, D=D)

    def test_distances(self, instance, sum_index):
        g, D = instance
        pairs = all_pairs(g.n) if g.n <= ALL_DISTANCES_UP_TO else sample_pairs(g.n)
        got = np.array([sum_index.distance(u, v) for u, v in pairs])
        us, vs = np.array(pairs).T
        assert np.array_equal(got, D[us, vs])

    def test_medians(self, instance, sum_index):
        g, D = instance
        triples = all_triples(g.n) if g.n <= ALL_TRIPLES_UP_TO else sample_triples(g.n)
        for a, b, c in triples:
            assert sum_index.median_of_three(a, b, c) == median_of_three_bruteforce(g, a, b, c, D), (a, b, c)

    def test_index_shape(self, instance, sum_index):
        g, _ = instance
        stats = sum_index.index_stats()
        assert stats.vertices == g.n
        assert stats.max_fiber_fraction <= 0.5
        assert stats.levels <= math.ceil(math.log2(g.n)) + 1
