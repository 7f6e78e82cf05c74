"""
The pursuit game, step by step
==============================

A Network Security Game: an attacker starts at a source node and tries to
reach a target within the time horizon; the defender moves resources along
edges to intercept.  Both sides move simultaneously, the defender sees the
attacker's position in real time, and the attacker only ever sees the
defender's initial placement.

This script walks through the terminal rules on a 6-node path:

    0 -- 1 -- 2 -- 3 -- 4 -- 5(target)
"""

import numpy as np

from nsgsolver.graph import Graph
from nsgsolver.nsg_env import (NsgConfig, NsgState, Outcome, initial_state,
                               legal_attacker_actions,
                               legal_defender_actions, step)

path = Graph.from_edges(6, [(i, i + 1) for i in range(5)])


def play(cfg, attacker_moves, defender_moves):
    s = initial_state(cfg, np.random.default_rng(0))
    print(f"  t=0  attacker {s.attacker_history[-1]}, "
          f"defender {s.defender_locations}")
    for a_att, a_def in zip(attacker_moves, defender_moves):
        s, u_def, done = step(s, a_def, a_att, cfg)
        print(f"  t={s.t}  attacker {s.attacker_history[-1]}, "
              f"defender {s.defender_locations}  -> {s.outcome.value}")
        if done:
            print(f"  defender utility {u_def}")
            return
    raise AssertionError("script ended before the game did")


###############################################################################
# Capture: the attacker and a resource land on the same node simultaneously.

print("capture by simultaneous arrival")
cfg = NsgConfig(graph=path, horizon=5, num_resources=1, sources=(0,),
                targets=(5,), defender_init=(2,))
play(cfg, attacker_moves=[1], defender_moves=[(1,)])

###############################################################################
# Swapping along an edge is NOT a capture: the players pass through each
# other.  Arriving on the target together with the attacker IS a capture --
# interception has priority over reaching.

print("\nswap is not capture; meeting on the target is")
cfg = NsgConfig(graph=path, horizon=5, num_resources=1, sources=(0,),
                targets=(5,), defender_init=(1,))
s = initial_state(cfg, np.random.default_rng(0))
s, _, done = step(s, (0,), 1, cfg)      # swap along edge 0-1
print(f"  after swap: attacker {s.attacker_history[-1]}, "
      f"defender {s.defender_locations}, outcome {s.outcome.value}")

late = NsgState((0, 1, 2, 3, 4), (4,), 4)   # resource adjacent to the target
late, u_def, done = step(late, (5,), 5, cfg)
print(f"  simultaneous arrival on the target: {late.outcome.value}, "
      f"defender utility {u_def}")

###############################################################################
# Timeout: if the horizon expires before the attacker reaches a target, the
# defender wins by default.

print("\ntimeout")
cycle = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
cfg = NsgConfig(graph=cycle, horizon=2, num_resources=1, sources=(0,),
                targets=(2,), defender_init=(1,))
play(cfg, attacker_moves=[3, 0], defender_moves=[(0,), (1,)])

###############################################################################
# Legal moves are the graph adjacency; the defender's joint action set is
# the product over its resources, which is why it explodes with m.

cfg = NsgConfig(graph=path, horizon=5, num_resources=2, sources=(0,),
                targets=(5,), defender_init=(2, 4))
s = initial_state(cfg, np.random.default_rng(0))
print(f"\nattacker moves from node 0: {legal_attacker_actions(s, cfg)}")
print(f"defender joint moves for resources at (2, 4): "
      f"{list(legal_defender_actions(s, cfg))}")
