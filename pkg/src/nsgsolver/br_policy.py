"""Best-response learner: pair-scoring Q-network, circular replay, target net.

The learner is generic over any network exposing the pair-scores interface
(see networks.py), so the same code trains the graph-game defender, the
low-level attacker, and both bidding-game players, in either pairwise or
fixed-width (vanilla) form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn

__all__ = ["BrConfig", "Transition", "ReplayBufferRL", "BrLearner", "epsilon_at"]


@dataclass(frozen=True)
class BrConfig:
    gamma: float = 1.0
    learning_rate: float = 1e-4
    optimizer: str = "rmsprop"
    clip_norm: float = 1.0
    batch_size: int = 128
    update_every: int = 4
    target_sync_every: int = 1000
    replay_capacity: int = 500_000
    eps_start: float = 0.1
    eps_end: float = 0.005
    eps_anneal_episodes: int = 100_000

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        if self.replay_capacity <= 0 or self.batch_size <= 0:
            raise ValueError("capacities must be positive")


def epsilon_at(config: BrConfig, episode: int) -> float:
    """Linear anneal from eps_start to eps_end over eps_anneal_episodes."""
    if config.eps_anneal_episodes <= 0 or episode >= config.eps_anneal_episodes:
        return config.eps_end
    frac = episode / config.eps_anneal_episodes
    return config.eps_start + frac * (config.eps_end - config.eps_start)


@dataclass
class Transition:
    s: object           # encoded state (net-specific)
    a: np.ndarray       # encoded action row
    r: float
    s_next: object      # encoded next state, or None when terminal
    legal_next: np.ndarray  # (n, act_width); empty when terminal
    terminal: bool

    def __post_init__(self):
        if self.terminal and len(self.legal_next):
            raise ValueError("terminal transition must have empty legal_next")


class ReplayBufferRL:
    """Circular transition memory; overwrites oldest first."""

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.items: list = []
        self.cursor = 0

    def __len__(self):
        return len(self.items)

    def push(self, item) -> None:
        if len(self.items) < self.capacity:
            self.items.append(item)
        else:
            self.items[self.cursor] = item
        self.cursor = (self.cursor + 1) % self.capacity

    def sample(self, n: int, rng: np.random.Generator) -> list:
        idx = rng.integers(len(self.items), size=n)
        return [self.items[i] for i in idx]


class BrLearner:
    """DQN-style learner over a pair-scoring network."""

    def __init__(self, net, config: BrConfig):
        self.net = net
        self.config = config
        self.target_params = net.params.copy()
        self.replay = ReplayBufferRL(config.replay_capacity)
        self.opt = nn.OptimizerConfig(config.optimizer, config.learning_rate,
                                      clip_norm=config.clip_norm)

    def q_values(self, state, actions) -> np.ndarray:
        if len(actions) == 0:
            raise ValueError("empty legal action set")
        scores, _, _ = self.net.pair_scores([state], [np.asarray(actions)])
        return scores

    def act(self, state, actions, eps: float, rng: np.random.Generator) -> int:
        """Index of the chosen action: eps-uniform else argmax, ties uniform."""
        n = len(actions)
        if n == 1:
            return 0
        if eps > 0 and rng.random() < eps:
            return int(rng.integers(n))
        q = self.q_values(state, actions)
        best = np.flatnonzero(q == q.max())
        return int(best[rng.integers(len(best))]) if len(best) > 1 else int(best[0])

    def store(self, transition: Transition) -> None:
        self.replay.push(transition)

    def sync_target(self) -> None:
        self.target_params = self.net.params.copy()

    def td_update(self, rng: np.random.Generator) -> float:
        """One minibatch TD step; returns the scalar loss."""
        cfg = self.config
        batch = self.replay.sample(cfg.batch_size, rng)

        targets = np.empty(len(batch), dtype=np.float64)
        nonterm = [(i, t) for i, t in enumerate(batch) if not t.terminal]
        for i, t in enumerate(batch):
            targets[i] = t.r
        if nonterm:
            states = [t.s_next for _, t in nonterm]
            legals = [t.legal_next for _, t in nonterm]
            scores, pair_state, _ = self.net.pair_scores(states, legals,
                                                         params=self.target_params)
            for j, (i, t) in enumerate(nonterm):
                targets[i] += cfg.gamma * scores[pair_state == j].max()

        states = [t.s for t in batch]
        actions = [np.asarray(t.a)[None] for t in batch]
        q, _, cache = self.net.pair_scores(states, actions)
        err = q - targets.astype(q.dtype)
        loss = float(np.mean(err**2))
        dq = (2.0 / len(batch)) * err
        grads = self.net.backward(dq.astype(q.dtype), cache)
        nn.optimizer_step(self.net.params, grads, self.opt)
        return loss
