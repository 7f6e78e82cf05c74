"""Extensive-form pursuit-evasion game on a graph.

An attacker walks from a source node toward a target (exit) node within a
fixed horizon T while the defender moves m resources, one edge per step each,
trying to intercept.  Both sides move simultaneously.  Capture is strict
co-location (same node, same step); swapping along an edge is not a capture.
The defender earns terminal utility 1 on capture or timeout, 0 if the attacker
reaches a target; the game is zero-sum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .graph import Graph, bfs_distances

__all__ = ["Outcome", "NsgConfig", "NsgState", "initial_state",
           "legal_attacker_actions", "legal_defender_actions", "step",
           "load_scenario", "save_scenario"]


class Outcome(Enum):
    ONGOING = "ongoing"
    CAUGHT = "caught"
    REACHED = "reached"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class NsgConfig:
    graph: Graph
    horizon: int
    num_resources: int
    sources: tuple
    targets: tuple
    defender_init: tuple | None = None  # None = uniform random per resource

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.num_resources < 1:
            raise ValueError("need at least one resource")
        if not self.sources or not self.targets:
            raise ValueError("sources and targets must be non-empty")
        if set(self.sources) & set(self.targets):
            raise ValueError("sources and targets must be disjoint")
        for s in self.sources:
            d = bfs_distances(self.graph, s)
            for t in self.targets:
                if d[t] > self.horizon:
                    raise ValueError(
                        f"target {t} not reachable from source {s} within horizon {self.horizon}")
        if self.defender_init is not None and len(self.defender_init) != self.num_resources:
            raise ValueError("defender_init length must equal num_resources")


@dataclass(frozen=True)
class NsgState:
    attacker_history: tuple
    defender_locations: tuple
    t: int
    outcome: Outcome = Outcome.ONGOING

    def __post_init__(self):
        if len(self.attacker_history) != self.t + 1:
            raise ValueError("history length must be t + 1")

    @property
    def attacker_node(self) -> int:
        return self.attacker_history[-1]

    @property
    def terminal(self) -> bool:
        return self.outcome is not Outcome.ONGOING


def initial_state(config: NsgConfig, rng: np.random.Generator) -> NsgState:
    """Draw the start: uniform source, fixed or uniform-random resource tuple.

    Co-location at t=0 is an immediate capture.
    """
    src = int(config.sources[rng.integers(len(config.sources))]) if len(config.sources) > 1 \
        else int(config.sources[0])
    if config.defender_init is not None:
        locs = tuple(int(v) for v in config.defender_init)
    else:
        locs = tuple(int(rng.integers(config.graph.node_count))
                     for _ in range(config.num_resources))
    outcome = Outcome.CAUGHT if src in locs else Outcome.ONGOING
    return NsgState((src,), locs, 0, outcome)


def legal_attacker_actions(state: NsgState, config: NsgConfig) -> list:
    if state.terminal:
        raise ValueError("no legal actions in a terminal state")
    return [int(v) for v in config.graph.adjacency[state.attacker_node]]


def legal_defender_actions(state: NsgState, config: NsgConfig):
    """Lazily enumerate joint resource moves (Cartesian product, lexicographic)."""
    if state.terminal:
        raise ValueError("no legal actions in a terminal state")
    per_resource = [[int(v) for v in config.graph.adjacency[loc]]
                    for loc in state.defender_locations]
    return itertools.product(*per_resource)


def defender_action_count(state: NsgState, config: NsgConfig) -> int:
    n = 1
    for loc in state.defender_locations:
        n *= config.graph.degree(loc)
    return n


def step(state: NsgState, a_def: tuple, a_att: int, config: NsgConfig):
    """Simultaneous move.  Returns (next_state, u_def, done).

    Terminal priority: capture first (a resource waiting on a target catches the
    attacker before he can claim it), then reaching, then timeout.  u_def is the
    terminal utility; intermediate rewards are 0.
    """
    if state.terminal:
        raise ValueError("cannot step a terminal state")
    g = config.graph
    if not g.has_edge(state.attacker_node, a_att):
        raise ValueError(f"illegal attacker move {state.attacker_node} -> {a_att}")
    if len(a_def) != config.num_resources:
        raise ValueError("defender action has wrong arity")
    for i, (cur, nxt) in enumerate(zip(state.defender_locations, a_def)):
        if not g.has_edge(cur, nxt):
            raise ValueError(f"illegal defender move for resource {i}: {cur} -> {nxt}")

    new_locs = tuple(int(v) for v in a_def)
    new_hist = state.attacker_history + (int(a_att),)
    t = state.t + 1
    if a_att in new_locs:
        outcome, u = Outcome.CAUGHT, 1.0
    elif a_att in config.targets:
        outcome, u = Outcome.REACHED, 0.0
    elif t == config.horizon:
        outcome, u = Outcome.TIMEOUT, 1.0
    else:
        outcome, u = Outcome.ONGOING, 0.0
    nxt_state = NsgState(new_hist, new_locs, t, outcome)
    return nxt_state, u, outcome is not Outcome.ONGOING


# ---------------------------------------------------------------------------
# Scenario file (key-value text)
# ---------------------------------------------------------------------------


def save_scenario(config: NsgConfig, path, graph_path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"graph = {graph_path}\n")
        f.write(f"horizon = {config.horizon}\n")
        f.write(f"resources = {config.num_resources}\n")
        f.write(f"sources = {','.join(map(str, config.sources))}\n")
        f.write(f"targets = {','.join(map(str, config.targets))}\n")
        if config.defender_init is None:
            f.write("defender_init = uniform\n")
        else:
            f.write(f"defender_init = {','.join(map(str, config.defender_init))}\n")


def load_scenario(path, graph: Graph | None = None) -> NsgConfig:
    from .graph import load_edge_list

    import os
    kv = {}
    with open(path, "r", encoding="utf-8") as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad scenario line: {line!r}")
            k, v = line.split("=", 1)
            kv[k.strip()] = v.strip()
    required = {"graph", "horizon", "resources", "sources", "targets", "defender_init"}
    unknown = set(kv) - required
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    missing = required - set(kv)
    if missing:
        raise ValueError(f"missing scenario keys: {sorted(missing)}")
    if graph is None:
        gpath = kv["graph"]
        if not os.path.isabs(gpath):
            gpath = os.path.join(os.path.dirname(os.path.abspath(path)), gpath)
        graph = load_edge_list(gpath)
    init = None if kv["defender_init"] == "uniform" else tuple(
        int(x) for x in kv["defender_init"].split(","))
    return NsgConfig(
        graph=graph,
        horizon=int(kv["horizon"]),
        num_resources=int(kv["resources"]),
        sources=tuple(int(x) for x in kv["sources"].split(",")),
        targets=tuple(int(x) for x in kv["targets"].split(",")),
        defender_init=init,
    )
