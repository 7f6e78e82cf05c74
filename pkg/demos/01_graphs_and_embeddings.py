"""
Random grid graphs and node2vec embeddings
==========================================

The solver plays pursuit games on graphs.  This script samples a small
random grid, runs biased second-order random walks over it, trains
skip-gram embeddings from the walks, and sanity-checks that embedding
similarity reflects graph distance.
"""

import numpy as np

from nsgsolver.embed import WalkParams, generate_walks, train_embeddings
from nsgsolver.graph import GridGenParams, bfs_distances, generate_grid

###############################################################################
# Sample a 6x6 grid whose horizontal/vertical edges appear with probability
# 0.9 and diagonal edges with probability 0.2.  The generator keeps the
# largest connected component, so node ids are dense.

g = generate_grid(GridGenParams(rows=6, cols=6, p_hv=0.9, p_diag=0.2, seed=3))
print(f"graph: {g.node_count} nodes, {sum(1 for _ in g.edges())} edges")

###############################################################################
# Generate node2vec walks.  p < 1 makes walks more likely to backtrack,
# q > 1 keeps them local; p = q = 1 recovers plain uniform random walks.

params = WalkParams(p=0.5, q=2.0, dim=16, walk_length=40, walks_per_node=20,
                    epochs=3, seed=7)
walks = generate_walks(g, params)
print(f"walk corpus: {len(walks)} walks of length {params.walk_length}")

table = train_embeddings(walks, g.node_count, params)
vec = table.vectors
print(f"embeddings: {vec.shape}")

###############################################################################
# Nearby nodes should have higher cosine similarity than distant ones.
# Average the similarity over all pairs, bucketed by graph distance.

unit = vec / np.linalg.norm(vec, axis=1, keepdims=True)
sims = {}
for u in range(g.node_count):
    dist = bfs_distances(g, u)
    for v in range(u + 1, g.node_count):
        sims.setdefault(dist[v], []).append(float(unit[u] @ unit[v]))

for d in sorted(sims):
    print(f"distance {d}: mean cosine similarity {np.mean(sims[d]):+.3f} "
          f"({len(sims[d])} pairs)")
