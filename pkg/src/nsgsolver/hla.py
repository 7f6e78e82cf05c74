"""High-level-action attacker: sliding-window bandit best responder over exit
choices, a frequency-count average policy, and the cache that batches bandit
picks into it.

The bandit estimate for an exit is the mean utility of its entries inside a
FIFO window of the latest k plays; exits with no entry in the window are
Unknown and get forced selection priority so every estimate becomes
well-defined without optimistic initialization.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = ["SlidingWindowMab", "Averager", "Cache", "EpisodeMode", "episode_mode",
           "HlaConfig"]


@dataclass(frozen=True)
class HlaConfig:
    window: int = 10_000
    flush_every: int = 1000
    explore_prob: float = 0.1


class EpisodeMode(Enum):
    MAB = "mab"
    AVGER = "avger"
    EXPLORE = "explore"


def episode_mode(rng: np.random.Generator, eta: float, explore_prob: float) -> EpisodeMode:
    """Best-response mode with probability eta; otherwise an additional draw
    decides exploration vs average play.  Exploring episodes must not be
    recorded by the opponent's supervised buffer."""
    if not (0.0 <= eta <= 1.0 and 0.0 <= explore_prob <= 1.0):
        raise ValueError("eta and explore_prob must lie in [0, 1]")
    if rng.random() < eta:
        return EpisodeMode.MAB
    if rng.random() < explore_prob:
        return EpisodeMode.EXPLORE
    return EpisodeMode.AVGER


class SlidingWindowMab:
    """Windowed value estimates with O(1) insert via running sums.

    Running per-action sums and counts are maintained incrementally and always
    equal a brute-force recomputation over the window.
    """

    def __init__(self, actions, window: int):
        self.actions = list(actions)
        if not self.actions:
            raise ValueError("action set must be non-empty")
        self.window = window
        self.entries: deque = deque()
        self.sums = {a: 0.0 for a in self.actions}
        self.counts = {a: 0 for a in self.actions}

    def record(self, action, utility: float) -> None:
        self.entries.append((action, utility))
        self.sums[action] += utility
        self.counts[action] += 1
        if len(self.entries) > self.window:
            old_a, old_u = self.entries.popleft()
            self.sums[old_a] -= old_u
            self.counts[old_a] -= 1

    def estimate(self, action):
        """Windowed mean utility, or None (Unknown) with no window entry."""
        c = self.counts[action]
        if c == 0:
            return None
        return self.sums[action] / c

    def select(self, rng: np.random.Generator):
        """Unknown-valued actions first (uniform among them), else argmax with
        uniform tie breaking."""
        unknown = [a for a in self.actions if self.counts[a] == 0]
        if unknown:
            return unknown[rng.integers(len(unknown))]
        values = np.array([self.estimate(a) for a in self.actions])
        best = np.flatnonzero(values == values.max())
        return self.actions[best[rng.integers(len(best))]]


class Averager:
    """Cumulative selection counts; the normalized counts are the average policy."""

    def __init__(self, actions):
        self.actions = list(actions)
        self.counts = {a: 0 for a in self.actions}

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def distribution(self) -> np.ndarray:
        total = self.total
        if total == 0:
            return np.full(len(self.actions), 1.0 / len(self.actions))
        return np.array([self.counts[a] / total for a in self.actions])

    def sample(self, rng: np.random.Generator):
        probs = self.distribution()
        return self.actions[rng.choice(len(self.actions), p=probs)]


class Cache:
    """Bandit-mode selections since the last flush."""

    def __init__(self):
        self.items: list = []

    def add(self, action) -> None:
        self.items.append(action)

    def flush(self, averager: Averager) -> None:
        for a in self.items:
            averager.counts[a] += 1
        self.items.clear()


def dump_policy_table(mab: SlidingWindowMab, averager: Averager) -> str:
    """Text table: exit -> average-policy probability, bandit estimate, window count."""
    lines = ["exit\tavg_prob\tmab_estimate\twindow_count"]
    dist = averager.distribution()
    for a, p in zip(averager.actions, dist):
        est = mab.estimate(a)
        est_s = "unknown" if est is None else f"{est:.6f}"
        lines.append(f"{a}\t{p:.6f}\t{est_s}\t{mab.counts[a]}")
    return "\n".join(lines) + "\n"
