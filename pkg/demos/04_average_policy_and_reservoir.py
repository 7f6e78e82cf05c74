"""
Average policies from a reservoir of behaviors
==============================================

Fictitious play needs each agent's time-average policy.  We keep a
reservoir sample of past best-response decisions (state, legal actions,
chosen index) and train a classifier on it.  Because the network scores
(state, action) pairs and the softmax runs only over the presented legal
set, illegal actions get exactly zero probability -- no output masking.

This script stores draws from a known mixed policy and checks that the
learned distribution converges to it, on legal sets of varying size.
"""

import numpy as np

from nsgsolver.avg_policy import AvgConfig, AvgLearner
from nsgsolver.networks import VecPairNet

rng = np.random.default_rng(0)

###############################################################################
# Three abstract states with different legal sets; target mixtures to learn.

STATES = {
    0: (np.array([1.0, 0.0, 0.0], dtype=np.float32), 2, [0.75, 0.25]),
    1: (np.array([0.0, 1.0, 0.0], dtype=np.float32), 3, [0.2, 0.3, 0.5]),
    2: (np.array([0.0, 0.0, 1.0], dtype=np.float32), 4, [0.1, 0.2, 0.3, 0.4]),
}
ACTIONS = np.eye(4, dtype=np.float32)

net = VecPairNet(state_dim=3, action_dim=4, rng=rng)
learner = AvgLearner(net, AvgConfig(learning_rate=1e-3, batch_size=128,
                                    reservoir_capacity=100_000))

###############################################################################
# Fill the reservoir with samples of the target mixtures, then train.

for _ in range(30_000):
    sid = int(rng.integers(3))
    vec, n_legal, probs = STATES[sid]
    legal = ACTIONS[:n_legal]
    learner.store(vec, legal, int(rng.choice(n_legal, p=probs)), rng)

print(f"reservoir holds {len(learner.reservoir)} records")
for it in range(2000):
    loss = learner.sl_update(rng)
    if (it + 1) % 500 == 0:
        print(f"update {it + 1}: cross-entropy {loss:.4f}")

###############################################################################
# The learned conditional distributions should match the sampled mixtures,
# and actions outside the legal set must have exactly zero probability.

print()
for sid, (vec, n_legal, probs) in STATES.items():
    dist = learner.action_distribution(vec, ACTIONS[:n_legal])
    print(f"state {sid}: target {np.round(probs, 2)}  "
          f"learned {np.round(dist, 2)}")
    assert len(dist) == n_legal  # probabilities exist only for legal actions

# the same state offered a smaller legal set renormalizes structurally
dist = learner.action_distribution(STATES[2][0], ACTIONS[:2])
print(f"state 2 restricted to two actions: {np.round(dist, 2)} "
      f"(sums to {dist.sum():.6f})")
