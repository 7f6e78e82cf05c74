"""Graph node embeddings: biased second-order random walks + skip-gram training.

The walk bias follows the return/in-out parameterization (p, q): a candidate
next node x, reached from `cur` whose predecessor was `prev`, gets unnormalized
weight 1/p if x == prev, 1 if x is adjacent to prev, and 1/q otherwise.  The
distance test is decided locally since its codomain is {0, 1, 2} by
construction.  Training is skip-gram with negative sampling over the walk
corpus; the resulting table is frozen and used as the state-side node encoding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .graph import Graph

__all__ = [
    "WalkParams",
    "EmbeddingTable",
    "walk_step_distribution",
    "generate_walks",
    "train_embeddings",
    "save_embeddings",
    "load_embeddings",
]

EMBED_MAGIC = b"NSGE"
EMBED_VERSION = 1


@dataclass(frozen=True)
class WalkParams:
    p: float = 1.0
    q: float = 1.0
    walk_length: int = 80
    walks_per_node: int = 10
    window: int = 10
    negatives: int = 5
    dim: int = 32
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("p and q must be positive")
        if self.walk_length < 2:
            raise ValueError("walk_length must be at least 2")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")


@dataclass(frozen=True)
class EmbeddingTable:
    """node_count x dim table of 32-bit node vectors (the state-side encoding)."""

    vectors: np.ndarray

    def __post_init__(self):
        if self.vectors.ndim != 2:
            raise ValueError("embedding table must be 2-D")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("embedding table contains non-finite values")

    @property
    def node_count(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def walk_step_distribution(graph: Graph, prev, cur: int, params: WalkParams) -> np.ndarray:
    """Transition probabilities over adjacency(cur), aligned with its order.

    `prev` is None for the first step of a walk (uniform over neighbors).
    """
    nbrs = graph.adjacency[cur]
    if len(nbrs) == 0:
        raise ValueError(f"node {cur} has no neighbors; walk cannot continue")
    if prev is None:
        return np.full(len(nbrs), 1.0 / len(nbrs))
    if not graph.has_edge(prev, cur):
        raise ValueError(f"({prev}, {cur}) is not an edge")
    weights = np.empty(len(nbrs))
    prev_nbrs = graph._neighbor_sets[prev]
    for i, x in enumerate(nbrs):
        x = int(x)
        if x == prev:
            weights[i] = 1.0 / params.p
        elif x in prev_nbrs:
            weights[i] = 1.0
        else:
            weights[i] = 1.0 / params.q
    return weights / weights.sum()


def generate_walks(graph: Graph, params: WalkParams) -> list:
    """walks_per_node biased walks of walk_length from every node, seed-deterministic."""
    rng = np.random.default_rng(params.seed)
    uniform_first = params.p == 1.0 and params.q == 1.0
    walks = []
    for _ in range(params.walks_per_node):
        for start in range(graph.node_count):
            walk = [start]
            prev = None
            for _ in range(params.walk_length - 1):
                cur = walk[-1]
                nbrs = graph.adjacency[cur]
                if len(nbrs) == 0:
                    break
                if prev is None or uniform_first:
                    nxt = int(nbrs[rng.integers(len(nbrs))])
                else:
                    probs = walk_step_distribution(graph, prev, cur, params)
                    nxt = int(nbrs[rng.choice(len(nbrs), p=probs)])
                prev = cur
                walk.append(nxt)
            walks.append(walk)
    return walks


def train_embeddings(corpus: list, node_count: int, params: WalkParams) -> EmbeddingTable:
    """Skip-gram with negative sampling over a walk corpus.

    Center vectors are the returned embedding; context vectors are auxiliary.
    Negatives come from the unigram^0.75 distribution of the corpus; the
    learning rate decays linearly over all (epoch, center) visits.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    rng = np.random.default_rng(params.seed + 1)
    dim = params.dim
    center = (rng.random((node_count, dim)) - 0.5) / dim
    context = np.zeros((node_count, dim))

    freq = np.zeros(node_count)
    for walk in corpus:
        for v in walk:
            freq[v] += 1
    noise = freq**0.75
    noise_p = noise / noise.sum()

    total_centers = params.epochs * sum(len(w) for w in corpus)
    if params.epochs == 0:
        return EmbeddingTable(center.astype(np.float32))

    visit = 0
    lr0 = params.learning_rate
    for _ in range(params.epochs):
        for walk in corpus:
            n = len(walk)
            for i, c in enumerate(walk):
                lr = lr0 * max(1.0 - visit / total_centers, 1e-4)
                visit += 1
                lo = max(0, i - params.window)
                hi = min(n, i + params.window + 1)
                ctx = [walk[j] for j in range(lo, hi) if j != i]
                if not ctx:
                    continue
                negs = rng.choice(node_count, size=len(ctx) * params.negatives, p=noise_p)
                ids = np.concatenate([np.asarray(ctx, dtype=np.int64), negs])
                labels = np.zeros(len(ids))
                labels[: len(ctx)] = 1.0
                vc = center[c]
                mat = context[ids]  # (k, dim)
                scores = 1.0 / (1.0 + np.exp(-(mat @ vc)))
                g = lr * (labels - scores)  # (k,)
                grad_c = g @ mat
                np.add.at(context, ids, np.outer(g, vc))
                center[c] += grad_c
    return EmbeddingTable(center.astype(np.float32))


def save_embeddings(table: EmbeddingTable, path) -> None:
    """Binary format: magic 'NSGE', version, node_count, dim (u32 LE), f32 rows."""
    with open(path, "wb") as f:
        f.write(EMBED_MAGIC)
        f.write(struct.pack("<III", EMBED_VERSION, table.node_count, table.dim))
        f.write(np.ascontiguousarray(table.vectors, dtype="<f4").tobytes())


def load_embeddings(path) -> EmbeddingTable:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != EMBED_MAGIC:
            raise ValueError(f"not an embedding file: bad magic {magic!r}")
        version, n, d = struct.unpack("<III", f.read(12))
        if version != EMBED_VERSION:
            raise ValueError(f"unsupported embedding file version {version}")
        data = np.frombuffer(f.read(4 * n * d), dtype="<f4").reshape(n, d)
    return EmbeddingTable(data.copy())
