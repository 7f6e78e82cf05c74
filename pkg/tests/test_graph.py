import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsgsolver.graph import (
    EdgeListError,
    Graph,
    GridGenParams,
    bfs_distances,
    generate_grid,
    load_edge_list,
    sample_shortest_path,
    save_edge_list,
)


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def check_invariants(g):
    for u in range(g.node_count):
        adj = g.adjacency[u]
        assert list(adj) == sorted(set(int(v) for v in adj))
        assert u not in adj
        for v in adj:
            assert u in g.adjacency[v]


class TestGenerateGrid:
    def test_2x2_full_hv(self):
        g = generate_grid(GridGenParams(2, 2, 1.0, 0.0, seed=0))
        assert g.node_count == 4
        assert all(g.degree(v) == 2 for v in range(4))

    def test_3x3_full(self):
        g = generate_grid(GridGenParams(3, 3, 1.0, 1.0, seed=0))
        assert g.node_count == 9
        # row-major remap keeps the center at index 4
        assert g.degree(4) == 8

    def test_deterministic(self):
        p = GridGenParams(15, 15, 0.4, 0.1, seed=7)
        g1, g2 = generate_grid(p), generate_grid(p)
        assert g1.node_count == g2.node_count
        assert all(np.array_equal(a, b) for a, b in zip(g1.adjacency, g2.adjacency))

    def test_invariants_random_samples(self):
        for seed in range(5):
            g = generate_grid(GridGenParams(8, 8, 0.4, 0.1, seed=seed))
            check_invariants(g)
            # connectivity: a single BFS reaches everything
            assert np.all(np.isfinite(bfs_distances(g, 0)))

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            GridGenParams(3, 3, 1.5, 0.0, seed=0)


class TestEdgeList:
    def test_direct_encoding(self, tmp_path):
        f = tmp_path / "g.txt"
        f.write_text("3\n0 1\n1 2\n")
        g = load_edge_list(f)
        assert g.node_count == 3
        assert list(g.adjacency[1]) == [0, 2]

    def test_round_trip(self, tmp_path):
        g = generate_grid(GridGenParams(5, 5, 0.5, 0.2, seed=3))
        f = tmp_path / "g.txt"
        save_edge_list(g, f)
        g2 = load_edge_list(f)
        assert g2.node_count == g.node_count
        assert all(np.array_equal(a, b) for a, b in zip(g.adjacency, g2.adjacency))
        save_edge_list(g2, tmp_path / "g2.txt")
        assert (tmp_path / "g.txt").read_bytes() == (tmp_path / "g2.txt").read_bytes()

    def test_self_loop_rejected(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("2\n0 0\n")
        with pytest.raises(EdgeListError, match="line 2"):
            load_edge_list(f)

    def test_out_of_range(self, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("2\n0 5\n")
        with pytest.raises(EdgeListError, match="line 2"):
            load_edge_list(f)

    def test_comments_and_duplicates(self, tmp_path):
        f = tmp_path / "g.txt"
        f.write_text("# comment\n3\n0 1\n1 0\n\n1 2\n")
        g = load_edge_list(f)
        assert g.edge_count == 2


class TestBfs:
    def test_path(self):
        g = path_graph(3)
        assert list(bfs_distances(g, 0)) == [0, 1, 2]

    def test_cycle(self):
        g = cycle_graph(4)
        assert list(bfs_distances(g, 0)) == [0, 1, 2, 1]

    def test_disconnected(self):
        g = Graph.from_edges(3, [(0, 1)])
        d = bfs_distances(g, 0)
        assert d[2] == np.inf

    def test_triangle_step_property(self):
        g = generate_grid(GridGenParams(6, 6, 0.5, 0.2, seed=1))
        d = bfs_distances(g, 0)
        for u, v in g.edges():
            assert abs(d[u] - d[v]) <= 1


class TestSampleShortestPath:
    def test_unique_path(self):
        g = path_graph(3)
        assert sample_shortest_path(g, 0, 2, np.random.default_rng(0)) == [0, 1, 2]

    def test_trivial(self):
        g = path_graph(3)
        assert sample_shortest_path(g, 1, 1, np.random.default_rng(0)) == [1]

    def test_unreachable(self):
        g = Graph.from_edges(3, [(0, 1)])
        with pytest.raises(ValueError):
            sample_shortest_path(g, 0, 2, np.random.default_rng(0))

    def test_uniform_over_shortest_paths(self):
        # 4-cycle: exactly two shortest paths 0->2, found here by brute force.
        g = cycle_graph(4)
        paths = set()
        for a in g.adjacency[0]:
            if g.has_edge(int(a), 2):
                paths.add((0, int(a), 2))
        assert len(paths) == 2
        rng = np.random.default_rng(42)
        n = 10_000
        hits = sum(sample_shortest_path(g, 0, 2, rng)[1] == 1 for _ in range(n))
        assert abs(hits / n - 0.5) < 0.02

    def test_length_matches_bfs(self):
        g = generate_grid(GridGenParams(6, 6, 0.6, 0.1, seed=2))
        rng = np.random.default_rng(0)
        d = bfs_distances(g, 0)
        for target in range(g.node_count):
            p = sample_shortest_path(g, 0, target, rng)
            assert len(p) - 1 == d[target]
            for a, b in zip(p, p[1:]):
                assert g.has_edge(a, b)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 6), st.integers(2, 6), st.floats(0, 1), st.integers(0, 10**6))
def test_grid_invariants_property(rows, cols, p_hv, seed):
    g = generate_grid(GridGenParams(rows, cols, p_hv, 0.1, seed=seed))
    check_invariants(g)
