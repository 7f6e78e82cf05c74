"""Average-policy learner: pair logits + masked softmax over the legal set,
trained by cross-entropy on a reservoir of best-response behaviors.

Probabilities are structural: only the presented legal actions are ever
scored, so illegal actions carry exactly zero mass rather than a masked-out
remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn

__all__ = ["AvgConfig", "ReservoirBufferSL", "AvgLearner"]


@dataclass(frozen=True)
class AvgConfig:
    learning_rate: float = 1e-4
    clip_norm: float = 1.0
    batch_size: int = 256
    update_every: int = 32
    reservoir_capacity: int = 2_000_000


class ReservoirBufferSL:
    """Algorithm-R reservoir: each of the N items seen so far is retained with
    probability capacity / max(N, capacity)."""

    def __init__(self, capacity: int):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.items: list = []
        self.seen = 0

    def __len__(self):
        return len(self.items)

    def insert(self, item, rng: np.random.Generator) -> None:
        self.seen += 1
        if len(self.items) < self.capacity:
            self.items.append(item)
        else:
            j = int(rng.integers(self.seen))
            if j < self.capacity:
                self.items[j] = item

    def sample(self, n: int, rng: np.random.Generator) -> list:
        idx = rng.integers(len(self.items), size=n)
        return [self.items[i] for i in idx]


@dataclass
class SlRecord:
    s: object             # encoded state
    legal: np.ndarray     # (n, act_width) encoded legal actions
    a_index: int          # chosen action's position in `legal`


class AvgLearner:
    def __init__(self, net, config: AvgConfig):
        self.net = net
        self.config = config
        self.reservoir = ReservoirBufferSL(config.reservoir_capacity)
        self.opt = nn.OptimizerConfig("adam", config.learning_rate,
                                      clip_norm=config.clip_norm)

    def action_distribution(self, state, actions) -> np.ndarray:
        if len(actions) == 0:
            raise ValueError("empty legal action set")
        logits, _, _ = self.net.pair_scores([state], [np.asarray(actions)])
        return nn.masked_softmax(logits, np.ones(len(logits), dtype=bool))

    def sample_action(self, state, actions, rng: np.random.Generator) -> int:
        probs = self.action_distribution(state, actions)
        return int(rng.choice(len(probs), p=probs / probs.sum()))

    def store(self, state, legal, a_index: int, rng: np.random.Generator) -> None:
        self.reservoir.insert(SlRecord(state, np.asarray(legal), a_index), rng)

    def sl_update(self, rng: np.random.Generator) -> float:
        """One cross-entropy minibatch on reservoir samples; returns the loss."""
        batch = self.reservoir.sample(self.config.batch_size, rng)
        states = [r.s for r in batch]
        legals = [r.legal for r in batch]
        scores, pair_state, cache = self.net.pair_scores(states, legals)

        dscores = np.zeros_like(scores)
        loss = 0.0
        b = len(batch)
        for i, rec in enumerate(batch):
            sel = pair_state == i
            logits = scores[sel].astype(np.float64)
            z = logits - logits.max()
            e = np.exp(z)
            p = e / e.sum()
            loss -= np.log(max(p[rec.a_index], 1e-300))
            g = p.copy()
            g[rec.a_index] -= 1.0
            dscores[sel] = (g / b).astype(scores.dtype)
        grads = self.net.backward(dscores, cache)
        nn.optimizer_step(self.net.params, grads, self.opt)
        return float(loss / b)
