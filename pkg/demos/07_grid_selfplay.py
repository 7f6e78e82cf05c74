"""
NFSP on a pursuit grid, end to end
==================================

Full self-play on a small random grid: the defender learns pair-scored
best responses plus a reservoir-averaged policy; the attacker picks exits
with a sliding-window bandit and runs sampled shortest paths.  We then
compare the learned defender against the uniform and greedy baselines
under a common attacker.

Budgets here are kept small so the script runs in about a minute; see
benchmarks/ for the criterion-scale runs.
"""

import numpy as np

from nsgsolver import nfsp
from nsgsolver.avg_policy import AvgConfig
from nsgsolver.br_policy import BrConfig
from nsgsolver.embed import WalkParams, generate_walks, train_embeddings
from nsgsolver.evaluation import evaluate, greedy_handle, uniform_handle
from nsgsolver.graph import GridGenParams, generate_grid
from nsgsolver.hla import HlaConfig
from nsgsolver.nsg_env import NsgConfig

###############################################################################
# A 4x4 grid; attacker crosses from corner 0 to corner 15, one defender
# resource starts in the middle.

g = generate_grid(GridGenParams(rows=4, cols=4, p_hv=1.0, p_diag=0.3, seed=2))
cfg = NsgConfig(graph=g, horizon=6, num_resources=1, sources=(0,),
                targets=(15,), defender_init=(10,))

params = WalkParams(dim=16, walk_length=40, walks_per_node=10, epochs=2,
                    seed=0)
embed = train_embeddings(generate_walks(g, params), g.node_count,
                         params).vectors
print(f"graph {g.node_count} nodes; embeddings {embed.shape}")

###############################################################################
# Self-play.  The curve tracks the defender's average policy against the
# attacker's average policy -- the self-play value, not the worst case.

train_cfg = nfsp.NfspConfig(
    episodes=15_000, seed=0,
    br=BrConfig(replay_capacity=50_000, batch_size=64,
                eps_anneal_episodes=10_000),
    avg=AvgConfig(reservoir_capacity=100_000, batch_size=64),
    hla=HlaConfig(window=1_000, flush_every=200),
    eval_every=5_000, eval_episodes=1000, checkpoint_every=15_000)

result = nfsp.train(train_cfg, cfg, embed)
for row in result.curve:  # rows are curve.csv lines: episode,metric,value,ci95
    episode, metric, value, ci = row.split(",")
    print(f"episode {int(episode):>6}: {metric} = {float(value):.3f} "
          f"± {float(ci):.3f}")

###############################################################################
# Compare defenders against the attacker's learned average policy.

attacker = nfsp.attacker_avg_handle(result.attacker, cfg)
defender = nfsp.defender_avg_handle(result.defender)

for name, handle in [("trained", defender), ("uniform", uniform_handle()),
                     ("greedy", greedy_handle(cfg))]:
    rep = evaluate(handle, attacker, cfg, 2000, seed=9)
    print(f"{name:>8} defender vs learned attacker: "
          f"{rep.mean:.3f} ± {rep.ci95:.3f}  {rep.outcome_counts}")
