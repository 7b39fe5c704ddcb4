import numpy as np
import pytest

from median_intervals import graph_core
from median_intervals.errors import (
    ConvexityError,
    EmptyInputError,
    GraphInputError,
    NotCubeFreeError,
    VertexBoundsError,
)
from median_intervals.generator import grid_graph
from median_intervals.graph_core import (
    Graph,
    SquareIndex,
    Star,
    bfs_distances,
    compute_median,
    distance_rows,
    enumerate_squares,
    fiber_layers,
    fiber_partition,
    format_graph,
    gate_bruteforce,
    parse_graph,
    read_graph,
    star,
    write_graph,
)


class TestConstruction:
    def test_from_edges_sorts_adjacency(self):
        g = Graph.from_edges(3, [(2, 0), (0, 1)])
        assert g.neighbors(0) == (1, 2)
        assert g.m == 2
        assert g.edges() == [(0, 1), (0, 2)]

    def test_rejects_self_loop(self):
        with pytest.raises(GraphInputError, match="self-loop"):
            Graph.from_edges(2, [(0, 0), (0, 1)])

    def test_rejects_parallel_edge(self):
        with pytest.raises(GraphInputError, match="parallel"):
            Graph.from_edges(2, [(0, 1), (1, 0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(VertexBoundsError):
            Graph.from_edges(2, [(0, 2)])

    def test_rejects_disconnected(self):
        with pytest.raises(GraphInputError, match="not connected"):
            Graph.from_edges(4, [(0, 1), (2, 3)])

    def test_check_vertex(self, p4):
        assert p4.check_vertex(np.int64(3)) == 3
        with pytest.raises(VertexBoundsError):
            p4.check_vertex(4)
        with pytest.raises(VertexBoundsError):
            p4.check_vertex(True)

    def test_subgraph_keeps_origin(self, grid3):
        sub = grid3.subgraph([8, 5, 4])
        assert sub.origin == (4, 5, 8)
        assert sub.edges() == [(0, 1), (1, 2)]
        assert sub.labels == ("(1,1)", "(1,2)", "(2,2)")

    def test_to_networkx(self, grid3):
        nxg = grid3.to_networkx()
        assert nxg.number_of_edges() == 12
        assert nxg.nodes[4]["label"] == "(1,1)"


class TestTextFormat:
    def test_parse_numeric_labels(self):
        g = parse_graph("4 3\n3 2\n1 0\n2 1\n#payloads\n2 10\n")
        assert g.labels == ("0", "1", "2", "3")
        assert g.payload == (None, None, 10, None)
        assert g.edges() == [(0, 1), (1, 2), (2, 3)]

    def test_parse_keeps_first_appearance_for_text_labels(self):
        g = parse_graph("3 2\nb a\na c\n")
        assert g.labels == ("b", "a", "c")
        assert g.vertex_of("c") == 2

    def test_isolated_numeric_vertex(self):
        g = parse_graph("1 0\n")
        assert g.n == 1

    @pytest.mark.parametrize("text, line", [
        ("", 1),
        ("3\n", 1),
        ("2 1\n0 1 2\n", 2),
        ("2 1\n0 0\n", 2),
        ("3 2\n0 1\n1 0\n", 3),
        ("2 1\n0 1\n#payloads\n0 x\n", 4),
        ("2 1\n0 1\nextra\n", 3),
    ])
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(GraphInputError) as info:
            parse_graph(text)
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}:")

    def test_empty_input_is_its_own_error(self):
        with pytest.raises(EmptyInputError):
            parse_graph("\n\n")

    def test_unknown_label(self, grid3):
        with pytest.raises(GraphInputError, match="unknown vertex label"):
            grid3.vertex_of("(5,5)")

    def test_write_then_read(self, tmp_path):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)], payload=[5, None, 7, None])
        path = tmp_path / "g.txt"
        write_graph(g, path)
        again = read_graph(path)
        assert again.labels == g.labels
        assert again.adjacency == g.adjacency
        assert again.payload == g.payload

    def test_text_labels_survive_rewrite(self, grid3):
        again = parse_graph(format_graph(grid3))
        edges = {frozenset((grid3.labels[u], grid3.labels[v])) for u, v in grid3.edges()}
        assert {frozenset((again.labels[u], again.labels[v])) for u, v in again.edges()} == edges


class TestDistances:
    def test_bfs(self, p4):
        assert bfs_distances(p4, 0).tolist() == [0, 1, 2, 3]

    def test_rows(self, grid3):
        D = distance_rows(grid3, range(9))
        assert D.shape == (9, 9)
        assert D[0, 8] == 4
        assert D.dtype == np.int64

    def test_median(self, p4, grid3):
        assert compute_median(p4) == 1
        assert compute_median(grid3) == 4

    def test_median_of_star_and_single_vertex(self):
        assert compute_median(Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])) == 0
        assert compute_median(Graph([[]])) == 0

    def test_median_matches_full_scan(self, small_graph):
        sums = distance_rows(small_graph, range(small_graph.n)).sum(axis=1)
        assert compute_median(small_graph) == int(np.argmin(sums))

    def test_median_plateau_takes_smallest_id(self):
        # 4x4 grid: the four central vertices share the minimum
        assert compute_median(grid_graph(4, 4)) == 5

    def test_median_does_not_scan_every_vertex(self, monkeypatch):
        g = grid_graph(20, 20)
        seen = []

        def counting_rows(graph, sources):
            sources = list(sources)
            seen.extend(sources)
            return distance_rows(graph, sources)

        monkeypatch.setattr(graph_core, "distance_rows", counting_rows)
        assert compute_median(g) == 9 * 20 + 9
        assert len(seen) < g.n // 2

    def test_median_of_empty_graph(self):
        with pytest.raises(EmptyInputError):
            compute_median(Graph([]))


class TestStar:
    def test_grid_star_is_whole_grid(self, grid3):
        s = Star.build(grid3, 4)
        assert s.members == tuple(range(9))
        assert s.code[4] == frozenset()
        assert s.code[0] == frozenset({1, 3})
        assert star(grid3, 4) == frozenset(range(9))

    def test_star_of_path(self, p4):
        assert star(p4, 1) == frozenset({0, 1, 2})

    def test_distance_interval_median(self, grid3):
        s = Star.build(grid3, 4)
        assert s.distance(0, 8) == 4
        assert s.adjacent(0, 1)
        assert s.interval(0, 8) == list(range(9))
        assert s.interval(0, 2) == [0, 1, 2]
        assert s.median(0, 2, 6) == 0
        assert s.neighbors(4) == [1, 3, 5, 7]


class TestSquares:
    def test_grid_squares(self, grid3):
        squares = enumerate_squares(grid3, bfs_distances(grid3, 4))
        assert len(squares) == 4
        assert squares[0].vertices() == (0, 1, 4, 3)

    def test_index(self, grid3):
        index = SquareIndex(enumerate_squares(grid3, bfs_distances(grid3, 4)))
        assert index.by_diagonal(1, 3).x == 0
        assert index.by_diagonal(0, 4).x == 0
        assert index.by_diagonal(0, 8) is None
        assert index.closes(0, 1, 4)
        assert not index.closes(0, 1, 2)

    def test_cube_is_rejected(self, q3):
        with pytest.raises(NotCubeFreeError):
            enumerate_squares(q3, bfs_distances(q3, 0))


class TestGates:
    def test_gate_bruteforce(self, grid3):
        assert gate_bruteforce(grid3, 8, [0, 1]) == 1
        assert gate_bruteforce(grid3, 8, [1, 3]) is None

    def test_gate_in_empty_set(self, grid3):
        with pytest.raises(EmptyInputError):
            gate_bruteforce(grid3, 0, [])

    def test_fiber_layers(self, p4):
        gate, dist = fiber_layers(p4, [0, 1, 2])
        assert gate.tolist() == [0, 1, 2, 2]
        assert dist.tolist() == [0, 0, 0, 1]
        assert fiber_partition(p4, [1]).tolist() == [1, 1, 1, 1]

    def test_non_convex_set(self, c6):
        with pytest.raises(ConvexityError):
            fiber_layers(c6, [0, 1, 5])
