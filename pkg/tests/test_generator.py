import pytest

from median_intervals import generator
from median_intervals.errors import GenerationError, OracleSizeError, PreconditionError
from median_intervals.generator import (
    GenSpec,
    assign_payload,
    generate,
    grid_graph,
    parse_payload,
    parse_size,
    path_graph,
)
from median_intervals.median_oracle import VerificationReport, verify_cube_free, verify_median_graph


class TestParsing:
    @pytest.mark.parametrize("text, expected", [
        ("200", (200,)),
        ("4x4", (4, 4)),
        ("6X6x10", (6, 6, 10)),
    ])
    def test_sizes(self, text, expected):
        assert parse_size(text) == expected

    def test_bad_size(self):
        with pytest.raises(PreconditionError):
            parse_size("4xa")

    @pytest.mark.parametrize("text, expected", [
        ("ones", ("ones", 0)),
        ("ids", ("ids", 0)),
        ("random", ("random", 0)),
        ("random(17)", ("random", 17)),
    ])
    def test_payload_modes(self, text, expected):
        assert parse_payload(text) == expected

    def test_bad_payload_mode(self):
        with pytest.raises(PreconditionError):
            parse_payload("rand(3)")


class TestGenSpec:
    def test_unknown_family(self):
        with pytest.raises(PreconditionError, match="unknown family"):
            GenSpec("hexagon", (3,))

    def test_nonpositive_size(self):
        with pytest.raises(PreconditionError):
            GenSpec("grid", (0, 3))


class TestFamilies:
    def test_path(self):
        g = path_graph(5)
        assert g.edges() == [(0, 1), (1, 2), (2, 3), (3, 4)]

    def test_grid_ids_and_labels(self):
        g = grid_graph(2, 3)
        assert g.n == 6
        assert g.m == 7
        assert g.labels[5] == "(1,2)"
        assert g.neighbors(1) == (0, 2, 4)

    def test_tree_has_n_minus_one_edges(self):
        g = generate(GenSpec("tree", (40,), seed=9))
        assert g.n == 40
        assert g.m == 39

    def test_glued_size(self):
        g = generate(GenSpec("glued", (3, 4, 5), seed=1))
        assert g.n == 17
        assert g.labels[12] == "t0"

    def test_random_expansion_hits_target_size(self):
        assert generate(GenSpec("random_expansion", (41,), seed=3)).n == 41

    def test_every_family_is_a_cube_free_median_graph(self, small_graph):
        assert verify_median_graph(small_graph).ok
        assert verify_cube_free(small_graph).ok


class TestDeterminism:
    @pytest.mark.parametrize("family, size", [
        ("tree", (30,)),
        ("staircase_subgrid", (6, 7)),
        ("glued", (3, 3, 8)),
        ("random_expansion", (35,)),
    ])
    def test_same_seed_same_graph(self, family, size):
        a = generate(GenSpec(family, size, seed=12, payload="random", payload_seed=4))
        b = generate(GenSpec(family, size, seed=12, payload="random", payload_seed=4))
        assert a.adjacency == b.adjacency
        assert a.labels == b.labels
        assert a.payload == b.payload


class TestPayloads:
    def test_modes(self, grid3):
        assert assign_payload(grid3, "ones").payload == (1,) * 9
        assert assign_payload(grid3, "ids").payload == tuple(range(9))
        assert assign_payload(grid3, "none").payload == (None,) * 9

    def test_random_payloads_fit_32_bits(self, grid3):
        payload = assign_payload(grid3, "random", seed=8).payload
        assert payload == assign_payload(grid3, "random", seed=8).payload
        assert all(0 <= x < 1 << 32 for x in payload)

    def test_unknown_mode(self, grid3):
        with pytest.raises(PreconditionError):
            assign_payload(grid3, "squares")


class TestRejection:
    def test_exhausted_attempts(self):
        with pytest.raises(GenerationError):
            generate(GenSpec("random_expansion", (10,)), max_attempts=0)

    def test_oracle_guard_applies(self):
        with pytest.raises(OracleSizeError):
            generate(GenSpec("random_expansion", (30,)), oracle_limit=10)

    def test_trust_skips_verification(self, monkeypatch):
        def refuse(*args, **kwargs):
            raise AssertionError("verifier called")

        monkeypatch.setattr(generator, "verify_median_graph", refuse)
        assert generate(GenSpec("random_expansion", (30,)), trust=True).n == 30

    def test_rejected_attempts_reseed(self, monkeypatch):
        calls = []
        real = generator.verify_median_graph

        def flaky(graph, **kwargs):
            calls.append(graph.adjacency)
            if len(calls) == 1:
                return VerificationReport("median", False, (0, 0, 0), "forced")
            return real(graph, **kwargs)

        monkeypatch.setattr(generator, "verify_median_graph", flaky)
        generate(GenSpec("random_expansion", (20,), seed=5))
        assert len(calls) == 2
