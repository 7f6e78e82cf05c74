"""Undirected graph container, random-grid generation, BFS and shortest-path sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Graph",
    "GridGenParams",
    "generate_grid",
    "load_edge_list",
    "save_edge_list",
    "bfs_distances",
    "sample_shortest_path",
    "EdgeListError",
]


class EdgeListError(ValueError):
    """Raised when an edge-list file is malformed."""


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with dense integer node ids.

    Adjacency lists are sorted ascending, contain no duplicates and no
    self-loops.  Symmetry (u in adj[v] iff v in adj[u]) is established by the
    constructors below and relied upon everywhere.
    """

    node_count: int
    adjacency: tuple  # tuple of np.ndarray(int32), one per node
    _neighbor_sets: tuple = field(repr=False, default=None)

    @staticmethod
    def from_edges(node_count: int, edges) -> "Graph":
        """Build a graph from an iterable of (u, v) pairs; duplicates ignored."""
        if node_count <= 0:
            raise ValueError("node_count must be positive")
        nbrs = [set() for _ in range(node_count)]
        for u, v in edges:
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise ValueError(f"edge ({u}, {v}) out of range [0, {node_count})")
            if u == v:
                raise ValueError(f"self-loop at node {u} not allowed")
            nbrs[u].add(v)
            nbrs[v].add(u)
        adjacency = tuple(np.array(sorted(s), dtype=np.int32) for s in nbrs)
        return Graph(node_count, adjacency, tuple(frozenset(s) for s in nbrs))

    def __post_init__(self):
        if self._neighbor_sets is None:
            object.__setattr__(
                self, "_neighbor_sets", tuple(frozenset(a.tolist()) for a in self.adjacency)
            )

    def neighbors(self, v: int) -> np.ndarray:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    def edges(self):
        """Yield each undirected edge once, as (u, v) with u < v, sorted."""
        for u in range(self.node_count):
            for v in self.adjacency[u]:
                if u < v:
                    yield (u, int(v))

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2


@dataclass(frozen=True)
class GridGenParams:
    rows: int
    cols: int
    p_hv: float
    p_diag: float
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.p_hv <= 1.0 and 0.0 <= self.p_diag <= 1.0):
            raise ValueError("edge probabilities must lie in [0, 1]")
        if self.rows < 2 or self.cols < 2:
            raise ValueError("grid must be at least 2x2")


def generate_grid(params: GridGenParams) -> Graph:
    """Sample a rows x cols grid with random edges and keep its largest component.

    Candidate edges are the horizontal/vertical 4-neighborhood (each kept with
    probability p_hv) and the two diagonals of every unit cell (each kept with
    probability p_diag).  Node ids of the surviving component are remapped
    densely in row-major order.  Deterministic for a fixed seed.
    """
    rows, cols = params.rows, params.cols
    rng = np.random.default_rng(params.seed)
    idx = lambda r, c: r * cols + c

    candidates = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                candidates.append((idx(r, c), idx(r, c + 1), params.p_hv))
            if r + 1 < rows:
                candidates.append((idx(r, c), idx(r + 1, c), params.p_hv))
            if r + 1 < rows and c + 1 < cols:
                candidates.append((idx(r, c), idx(r + 1, c + 1), params.p_diag))
                candidates.append((idx(r + 1, c), idx(r, c + 1), params.p_diag))

    n = rows * cols
    kept = [(u, v) for (u, v, p) in candidates if rng.random() < p]
    comp = _largest_component(n, kept)
    remap = {old: new for new, old in enumerate(comp)}
    edges = [(remap[u], remap[v]) for u, v in kept if u in remap and v in remap]
    if len(comp) == 1:
        return Graph(1, (np.array([], dtype=np.int32),))
    return Graph.from_edges(len(comp), edges)


def _largest_component(n: int, edges) -> list:
    """Node ids (sorted) of the largest connected component under `edges`."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    groups = {}
    for v in range(n):
        groups.setdefault(find(v), []).append(v)
    best = max(groups.values(), key=lambda g: (len(g), -g[0]))
    return sorted(best)


def save_edge_list(graph: Graph, path) -> None:
    """Write the edge-list text format: node count line, then 'u v' lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{graph.node_count}\n")
        for u, v in graph.edges():
            f.write(f"{u} {v}\n")


def load_edge_list(path) -> Graph:
    """Parse the edge-list text format; raises EdgeListError naming the bad line."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().split("\n")
    node_count = None
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if node_count is None:
            try:
                node_count = int(line)
            except ValueError:
                raise EdgeListError(f"line {lineno}: expected node count, got {line!r}")
            if node_count <= 0:
                raise EdgeListError(f"line {lineno}: node count must be positive")
            continue
        parts = line.split()
        if len(parts) != 2:
            raise EdgeListError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"line {lineno}: non-integer node id in {line!r}")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise EdgeListError(f"line {lineno}: node id out of range [0, {node_count})")
        if u == v:
            raise EdgeListError(f"line {lineno}: self-loop {u} {v} not allowed")
        edges.append((u, v))
    if node_count is None:
        raise EdgeListError("line 1: empty file, expected node count")
    return Graph.from_edges(node_count, edges)


def bfs_distances(graph: Graph, source: int) -> np.ndarray:
    """Exact unweighted hop distances from `source`; np.inf where unreachable."""
    if not (0 <= source < graph.node_count):
        raise ValueError(f"source {source} out of range")
    dist = np.full(graph.node_count, np.inf)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in graph.adjacency[u]:
                if dist[v] == np.inf:
                    dist[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return dist


def _bfs_with_counts(graph: Graph, source: int):
    """BFS distances plus number of shortest paths from source to each node."""
    dist = np.full(graph.node_count, -1, dtype=np.int64)
    counts = [0] * graph.node_count  # python ints: counts can be large
    dist[source] = 0
    counts[source] = 1
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in graph.adjacency[u]:
                v = int(v)
                if dist[v] == -1:
                    dist[v] = d
                    nxt.append(v)
                if dist[v] == d:
                    counts[v] += counts[u]
        frontier = nxt
    return dist, counts


def sample_shortest_path(graph: Graph, source: int, target: int, rng: np.random.Generator) -> list:
    """Uniform sample over all shortest source->target paths.

    Walks backward from the target along the BFS predecessor DAG, picking each
    predecessor with probability proportional to its shortest-path count.
    """
    if source == target:
        return [source]
    dist, counts = _bfs_with_counts(graph, source)
    if dist[target] == -1:
        raise ValueError(f"target {target} unreachable from source {source}")
    path = [target]
    cur = target
    while cur != source:
        d = dist[cur]
        preds = [int(v) for v in graph.adjacency[cur] if dist[v] == d - 1]
        weights = np.array([counts[v] for v in preds], dtype=np.float64)
        cur = preds[rng.choice(len(preds), p=weights / weights.sum())]
        path.append(cur)
    path.reverse()
    return path
