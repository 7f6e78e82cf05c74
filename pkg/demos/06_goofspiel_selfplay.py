"""
Team-Goofspiel self-play with exact exploitability
==================================================

Goofspiel against a team: each round a prize (1, 2, ..., k) is at stake;
the n team members and the single player secretly bid one of their
remaining cards, and the higher aggregated bid (max or average) takes the
prize.  Small instances are solvable exactly, which makes the game a good
end-to-end check of the whole NFSP stack: pair-scored best responses,
reservoir-averaged policies, and exploitability falling over self-play.
"""

import numpy as np

from nsgsolver import nfsp
from nsgsolver.avg_policy import AvgConfig
from nsgsolver.br_policy import BrConfig
from nsgsolver.evaluation import exact_best_response_goofspiel
from nsgsolver.goofspiel import (GoofConfig, Mode, goof_step,
                                 initial_goof_state, legal_single_actions,
                                 legal_team_actions)

###############################################################################
# Play one scripted round to show the mechanics (k=3, two team members, MAX).

cfg = GoofConfig(k=3, n=2, mode=Mode.MAX)
s = initial_goof_state(cfg)
print(f"round 1 prize 1: team may bid {legal_team_actions(s, cfg)[:4]}...")
s, _ = goof_step(s, (3, 1), 2, cfg)      # max(3,1)=3 beats 2: team takes it
print(f"after round 1: team prize {s.team_prize}, single {s.single_prize}, "
      f"outcomes {[o.value for o in s.outcomes]}")

###############################################################################
# Exploitability of a team policy = the single player's exact best-response
# value against it.  The uniform team is the reference point.

goof = GoofConfig(k=3, n=1, mode=Mode.MAX)


def uniform_fn(state, legal):
    return np.full(len(legal), 1.0 / len(legal))


u_expl, _ = exact_best_response_goofspiel(uniform_fn, goof, "single")
print(f"\nuniform team, k=3: single's best-response value {u_expl:+.3f}")

###############################################################################
# NFSP self-play drives exploitability down.  Train with a small budget and
# evaluate the team's average policy exactly along the way.

train_cfg = nfsp.NfspConfig(
    episodes=20_000, seed=1,
    br=BrConfig(replay_capacity=20_000, batch_size=64,
                eps_anneal_episodes=10_000),
    avg=AvgConfig(reservoir_capacity=50_000, batch_size=64),
    eval_every=5_000, checkpoint_every=20_000)

team, single, curve = nfsp.train_goofspiel(train_cfg, goof)
for row in curve:  # rows are curve.csv lines: episode,metric,value,ci95
    episode, metric, value, _ = row.split(",")
    print(f"episode {int(episode):>6}: {metric} {float(value):+.3f}")

expl, _ = exact_best_response_goofspiel(team.policy_fn(), goof, "single")
print(f"\ntrained team exploitability {expl:+.3f} vs uniform {u_expl:+.3f}")
