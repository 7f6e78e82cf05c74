"""Baselines, Monte-Carlo evaluation, and best-response analysis.

Worst-case defender utility is approximated by training a DQN attacker
against the frozen defender, and computed exactly by belief-state expectimax
on games small enough to enumerate.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .br_policy import BrConfig, BrLearner, Transition, epsilon_at
from .goofspiel import (GoofConfig, GoofState, RoundOutcome, goof_step,
                        initial_goof_state, legal_single_actions,
                        legal_team_actions)
from .graph import bfs_distances
from .networks import NsgPairNet, NsgStateEncoder
from .nsg_env import (NsgConfig, NsgState, Outcome, initial_state,
                      legal_attacker_actions, legal_defender_actions, step)
from .seeding import substream

__all__ = [
    "EvalReport", "PolicyHandle", "uniform_policy", "greedy_policy",
    "uniform_handle", "greedy_handle", "uniform_attacker_handle",
    "evaluate", "play_nsg_episode", "train_br_attacker",
    "exact_best_response_goofspiel", "exact_best_response_nsg",
    "BestResponseCapError",
]


@dataclass(frozen=True)
class EvalReport:
    mean: float
    ci95: float
    n: int
    outcome_counts: dict

    def csv_row(self, episode: int, metric: str) -> str:
        return f"{episode},{metric},{self.mean:.6f},{self.ci95:.6f}"


def _binomial_ci95(p: float, n: int) -> float:
    return 1.96 * math.sqrt(max(p * (1.0 - p), 0.0) / n)


@dataclass
class PolicyHandle:
    """A queryable policy: fn(state, legal) -> distribution over the legal list.

    `reset` (optional) is called once per episode with the initial state, for
    policies that commit to episode-level information (an exit choice, the
    initial defender placement).
    """

    tag: str
    fn: Callable
    reset: Callable | None = None


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def uniform_policy(state, legal) -> np.ndarray:
    if len(legal) == 0:
        raise ValueError("empty legal set")
    return np.full(len(legal), 1.0 / len(legal))


def greedy_policy(state: NsgState, graph) -> np.ndarray:
    """Each resource independently moves to a neighbor minimizing BFS distance
    to the attacker's current node (uniform over ties); the joint distribution
    over the lexicographic legal enumeration is the product."""
    dist = bfs_distances(graph, state.attacker_node)
    per_resource = []
    for loc in state.defender_locations:
        nbrs = graph.adjacency[loc]
        d = dist[nbrs]
        best = d == d.min()
        per_resource.append(best / best.sum())
    return functools.reduce(lambda a, b: np.outer(a, b).ravel(), per_resource)


def uniform_handle() -> PolicyHandle:
    return PolicyHandle("Uniform", uniform_policy)


def greedy_handle(config: NsgConfig) -> PolicyHandle:
    return PolicyHandle("Greedy", lambda state, legal: greedy_policy(state, config.graph))


def uniform_attacker_handle() -> PolicyHandle:
    return PolicyHandle("Uniform", uniform_policy)


# ---------------------------------------------------------------------------
# Monte-Carlo evaluation
# ---------------------------------------------------------------------------


def _sample(legal, probs, rng: np.random.Generator):
    p = np.asarray(probs, dtype=np.float64)
    return legal[int(rng.choice(len(legal), p=p / p.sum()))]


def play_nsg_episode(defender: PolicyHandle, attacker: PolicyHandle,
                     config: NsgConfig, rng: np.random.Generator):
    """One episode; returns (defender utility, outcome)."""
    state = initial_state(config, rng)
    if defender.reset:
        defender.reset(state, rng)
    if attacker.reset:
        attacker.reset(state, rng)
    if state.terminal:  # co-location capture at t=0
        return 1.0, state.outcome
    u = 0.0
    while not state.terminal:
        legal_d = list(legal_defender_actions(state, config))
        legal_a = legal_attacker_actions(state, config)
        a_def = _sample(legal_d, defender.fn(state, legal_d), rng)
        a_att = _sample(legal_a, attacker.fn(state, legal_a), rng)
        state, u, _ = step(state, a_def, a_att, config)
    return u, state.outcome


def evaluate(defender: PolicyHandle, attacker: PolicyHandle, config: NsgConfig,
             n_episodes: int, seed: int) -> EvalReport:
    """n independent episodes on per-episode substreams; defender-side report."""
    counts: dict = {}
    total = 0.0
    for i in range(n_episodes):
        rng = substream(seed, f"eval-episode:{i}")
        u, outcome = play_nsg_episode(defender, attacker, config, rng)
        total += u
        counts[outcome.value] = counts.get(outcome.value, 0) + 1
    mean = total / n_episodes
    return EvalReport(mean, _binomial_ci95(mean, n_episodes), n_episodes, counts)


# ---------------------------------------------------------------------------
# Trained best-responding attacker (approximate worst case)
# ---------------------------------------------------------------------------


def _attacker_greedy_handle(learner: BrLearner, encoder: NsgStateEncoder) -> PolicyHandle:
    stash: dict = {}

    def reset(state, rng):
        stash["init"] = state.defender_locations

    def fn(state, legal):
        enc = encoder.encode(state.attacker_history, stash["init"])
        q = learner.q_values(enc, np.asarray(legal)[:, None])
        p = np.zeros(len(legal))
        best = np.flatnonzero(q == q.max())
        p[best] = 1.0 / len(best)
        return p

    return PolicyHandle("BrNet", fn, reset)


def train_br_attacker(defender: PolicyHandle, config: NsgConfig,
                      embed_vectors: np.ndarray, seed: int,
                      budget: int = 200_000, br_config: BrConfig | None = None,
                      eval_every: int = 10_000, eval_episodes: int = 500,
                      final_episodes: int = 2000, log_every: int | None = None):
    """Train a pair-scoring DQN attacker against the frozen defender; keep the
    best checkpoint by periodic evaluation, reload it, and report the
    defender's approximate worst-case utility over final greedy episodes.

    Returns (attacker handle, EvalReport, selection history rows).
    """
    cfg = br_config or BrConfig()
    encoder = NsgStateEncoder(config.horizon + 1, config.num_resources)
    net = NsgPairNet(embed_vectors, config.horizon + 1, config.num_resources,
                     1, substream(seed, "br-attacker-init"))
    learner = BrLearner(net, cfg)
    best_params = net.params.copy()
    best_util = -np.inf
    history = []

    for ep in range(budget):
        rng = substream(seed, f"br-episode:{ep}")
        state = initial_state(config, rng)
        if defender.reset:
            defender.reset(state, rng)
        init_locs = state.defender_locations
        eps = epsilon_at(cfg, ep)
        while not state.terminal:
            s_enc = encoder.encode(state.attacker_history, init_locs)
            legal_a = legal_attacker_actions(state, config)
            acts = np.asarray(legal_a)[:, None]
            ai = learner.act(s_enc, acts, eps, rng)
            legal_d = list(legal_defender_actions(state, config))
            a_def = _sample(legal_d, defender.fn(state, legal_d), rng)
            state, u_def, done = step(state, a_def, legal_a[ai], config)
            if done:
                learner.store(Transition(s_enc, acts[ai], 1.0 - u_def, None,
                                         np.empty((0, 1)), True))
            else:
                s2 = encoder.encode(state.attacker_history, init_locs)
                legal2 = np.asarray(legal_attacker_actions(state, config))[:, None]
                learner.store(Transition(s_enc, acts[ai], 0.0, s2, legal2, False))
        if (ep + 1) % cfg.update_every == 0 and len(learner.replay) >= cfg.batch_size:
            learner.td_update(substream(seed, f"br-update:{ep}"))
        if (ep + 1) % cfg.target_sync_every == 0:
            learner.sync_target()
        if (ep + 1) % eval_every == 0 or ep + 1 == budget:
            handle = _attacker_greedy_handle(learner, encoder)
            rep = evaluate(defender, handle, config, eval_episodes,
                           substream(seed, f"br-select:{ep}").integers(2**31))
            att_util = 1.0 - rep.mean
            history.append((ep + 1, att_util))
            if att_util > best_util:
                best_util = att_util
                best_params = net.params.copy()
            if log_every and (ep + 1) % log_every == 0:
                print(f"[br-attacker] ep {ep + 1}: attacker utility {att_util:.3f} "
                      f"(best {best_util:.3f})", flush=True)

    net.params = best_params
    learner.sync_target()
    handle = _attacker_greedy_handle(learner, encoder)
    report = evaluate(defender, handle, config, final_episodes,
                      substream(seed, "br-final").integers(2**31))
    return handle, report, history


# ---------------------------------------------------------------------------
# Exact best response (small games)
# ---------------------------------------------------------------------------


class BestResponseCapError(RuntimeError):
    """Game too large for exact enumeration; use train_br_attacker instead."""


def _prizes(outcomes) -> tuple:
    tp = sum(i + 1 for i, o in enumerate(outcomes) if o is RoundOutcome.TEAM)
    sp = sum(i + 1 for i, o in enumerate(outcomes) if o is RoundOutcome.SINGLE)
    return tp, sp


def _belief_key(belief) -> tuple:
    return tuple((k, round(p, 12)) for k, p in belief)


def exact_best_response_goofspiel(opponent_fn, config: GoofConfig, br_player: str,
                                  cap: int = 2_000_000):
    """Exact best-response value and deterministic policy against a fixed
    stochastic opponent, by expectimax over the best responder's information
    states with an explicit belief over the opponent's remaining cards.

    opponent_fn(state, legal) must depend only on the opponent's own
    information (round, its remaining cards, public outcomes).  br_player is
    'team' or 'single'; the returned value is from the BR player's side.
    """
    if br_player not in ("team", "single"):
        raise ValueError(f"unknown player {br_player!r}")
    memo: dict = {}
    policy: dict = {}
    nodes = [0]

    def build_state(own_rem, opp_rem, outcomes) -> GoofState:
        tp, sp = _prizes(outcomes)
        rnd = len(outcomes) + 1
        if br_player == "single":
            return GoofState(rnd, opp_rem, own_rem, tp, sp, outcomes)
        return GoofState(rnd, own_rem, opp_rem, tp, sp, outcomes)

    def own_actions(own_rem):
        if br_player == "single":
            return list(own_rem)
        return list(itertools.product(*own_rem))

    def remove_own(own_rem, a):
        if br_player == "single":
            return tuple(b for b in own_rem if b != a)
        return tuple(tuple(b for b in rem if b != bid)
                     for rem, bid in zip(own_rem, a))

    def remove_opp(opp_rem, a):
        if br_player == "single":
            return tuple(tuple(b for b in rem if b != bid)
                         for rem, bid in zip(opp_rem, a))
        return tuple(b for b in opp_rem if b != a)

    def rec(own_rem, outcomes, belief):
        key = (own_rem, outcomes, _belief_key(belief))
        if key in memo:
            return memo[key]
        nodes[0] += 1
        if nodes[0] > cap:
            raise BestResponseCapError(
                f"exact best response exceeded the {cap}-node cap; "
                "use the trained-attacker approximation")
        best_val, best_act = -np.inf, None
        for a in own_actions(own_rem):
            own_next = remove_own(own_rem, a)
            terminal_ev = 0.0
            branches: dict = {}
            for opp_rem, pb in belief:
                state = build_state(own_rem, opp_rem, outcomes)
                legal_opp = (legal_team_actions(state, config) if br_player == "single"
                             else legal_single_actions(state))
                probs = np.asarray(opponent_fn(state, legal_opp), dtype=np.float64)
                for opp_a, q in zip(legal_opp, probs):
                    w = pb * float(q)
                    if w == 0.0:
                        continue
                    if br_player == "single":
                        nxt, util = goof_step(state, opp_a, a, config)
                        u_br = None if util is None else util[1]
                    else:
                        nxt, util = goof_step(state, a, opp_a, config)
                        u_br = None if util is None else util[0]
                    if util is not None:
                        terminal_ev += w * u_br
                    else:
                        o = nxt.outcomes[-1]
                        d = branches.setdefault(o, {})
                        nk = remove_opp(opp_rem, opp_a)
                        d[nk] = d.get(nk, 0.0) + w
            ev = terminal_ev
            for o, d in sorted(branches.items(), key=lambda kv: kv[0].value):
                mass = sum(d.values())
                nb = tuple(sorted((k, p / mass) for k, p in d.items()))
                ev += mass * rec(own_next, outcomes + (o,), nb)
            if ev > best_val:
                best_val, best_act = ev, a
        policy[key] = best_act
        memo[key] = best_val
        return best_val

    init = initial_goof_state(config)
    if br_player == "single":
        own0, opp0 = init.single_remaining, init.team_remaining
    else:
        own0, opp0 = init.team_remaining, init.single_remaining
    value = rec(own0, (), ((opp0, 1.0),))
    return value, policy


def exact_best_response_nsg(defender: PolicyHandle, config: NsgConfig,
                            cap: int = 500_000):
    """Exact attacker best response to a per-step defender policy, by belief
    expectimax over the attacker's information states (own history + initial
    defender placement).  Returns (attacker BR value, policy dict); the
    defender's exact worst-case utility is 1 - value.

    Requires a fixed defender_init (the attacker observes it anyway) and a
    defender fn that depends only on the full current state.
    """
    g = config.graph
    memo: dict = {}
    policy: dict = {}
    nodes = [0]

    def rec(hist, belief):
        key = (hist, _belief_key(belief))
        if key in memo:
            return memo[key]
        nodes[0] += 1
        if nodes[0] > cap:
            raise BestResponseCapError(
                f"exact best response exceeded the {cap}-node cap; "
                "use train_br_attacker instead")
        t = len(hist) - 1
        best_val, best_act = -np.inf, None
        for a in g.adjacency[hist[-1]]:
            a = int(a)
            ev = 0.0
            cont: dict = {}
            for locs, pb in belief:
                state = NsgState(hist, locs, t)
                legal_d = list(legal_defender_actions(state, config))
                probs = np.asarray(defender.fn(state, legal_d), dtype=np.float64)
                for a_def, q in zip(legal_d, probs):
                    w = pb * float(q)
                    if w == 0.0:
                        continue
                    nxt, u_def, done = step(state, a_def, a, config)
                    if done:
                        ev += w * (1.0 - u_def)
                    else:
                        cont[nxt.defender_locations] = cont.get(nxt.defender_locations, 0.0) + w
            mass = sum(cont.values())
            if mass > 0.0:
                nb = tuple(sorted((k, p / mass) for k, p in cont.items()))
                ev += mass * rec(hist + (a,), nb)
            if ev > best_val:
                best_val, best_act = ev, a
        policy[key] = best_act
        memo[key] = best_val
        return best_val

    values = []
    for src in config.sources:
        if config.defender_init is not None:
            inits = [tuple(config.defender_init)]
        else:
            inits = list(itertools.product(range(g.node_count),
                                           repeat=config.num_resources))
        for locs in inits:
            if src in locs:
                values.append(0.0)  # caught at placement
            else:
                values.append(rec((src,), ((locs, 1.0),)))
    return float(np.mean(values)), policy
