"""
High-level-action fictitious play on matching pennies
=====================================================

The attacker's high-level controller is a trio: a sliding-window bandit
(best responder), a frequency-count averager (average policy), and a cache
that batches recent bandit picks into the averager.  Each episode the agent
explores with a small probability, otherwise best-responds with probability
eta, otherwise plays its average policy.

On matching pennies the unique equilibrium is (1/2, 1/2) for both players.
Pure best responders would cycle forever; the averaged policies converge.
"""

import numpy as np

from nsgsolver.hla import (Averager, Cache, EpisodeMode, SlidingWindowMab,
                           episode_mode)
from nsgsolver.nfsp import train_hla_matrix_game

###############################################################################
# The bandit keeps windowed value estimates and prioritizes untried arms.

mab = SlidingWindowMab(["heads", "tails"], window=100)
rng = np.random.default_rng(0)
print(f"untried arms first: {mab.select(rng)!r} before any data")
mab.record("heads", 1.0)
print(f"still prefers the unknown arm: {mab.select(rng)!r}")
mab.record("tails", -1.0)
print(f"now argmax: {mab.select(rng)!r}")

###############################################################################
# Mode selection: explore with probability 0.1, best-respond with eta = 0.1
# of the rest, else play the average policy.

counts = {m: 0 for m in EpisodeMode}
for _ in range(10_000):
    counts[episode_mode(rng, eta=0.1, explore_prob=0.1)] += 1
print({m.value: c / 10_000 for m, c in counts.items()})

###############################################################################
# Full fictitious self-play between two HLA agents.  Player 0 wins when the
# pennies match, player 1 when they differ.

for episodes in (2_000, 20_000, 200_000):
    d0, d1 = train_hla_matrix_game(episodes, seed=0)
    print(f"{episodes:>7} episodes: "
          f"p0 plays heads {d0[0]:.3f}, p1 plays heads {d1[0]:.3f}")

print("\nboth average policies approach the (0.5, 0.5) equilibrium")

###############################################################################
# The averager is just normalized counts, fed in batches through a cache of
# recent bandit selections.

avg = Averager(["heads", "tails"])
cache = Cache()
for arm in ["heads"] * 3 + ["tails"]:
    cache.add(arm)
cache.flush(avg)
print(f"averager after 3 heads + 1 tails: {avg.distribution()}")
