"""Self-play training orchestration.

One episode at a time: both sides sample an episode mode (best response with
probability eta, otherwise average play), act, and record — the defender's
RL buffer takes every transition, its SL buffer only best-response behavior
while the attacker is not exploring; the attacker's bandit records every
(exit, utility) pair and its cache batches bandit picks into the averager.
Updates run on fixed episode cadences, and all randomness is drawn from named
substreams of one seed so runs are bit-reproducible and resumable.
"""

from __future__ import annotations

import os
import pickle
from dataclasses import dataclass, field

import numpy as np

from . import nn
from .avg_policy import AvgConfig, AvgLearner
from .br_policy import BrConfig, BrLearner, Transition, epsilon_at
from .evaluation import PolicyHandle, evaluate
from .goofspiel import (GoofConfig, RoundOutcome, goof_step, initial_goof_state,
                        legal_single_actions, legal_team_actions)
from .graph import sample_shortest_path
from .hla import Averager, Cache, EpisodeMode, HlaConfig, SlidingWindowMab, episode_mode
from .networks import (NsgPairNet, NsgStateEncoder, NsgVanillaNet, VecPairNet,
                       VecVanillaNet)
from .nsg_env import (NsgConfig, initial_state, legal_attacker_actions,
                      legal_defender_actions, step)
from .seeding import substream, substream_seed

__all__ = [
    "NfspConfig", "DefenderAgent", "HlaAttackerAgent", "LowLevelAttackerAgent",
    "run_episode", "train", "TrainResult",
    "GoofAgent", "train_goofspiel", "train_hla_matrix_game",
    "defender_avg_handle", "hla_avg_handle", "low_level_avg_handle",
]

CURVE_HEADER = "episode,metric,value,ci95"


@dataclass(frozen=True)
class NfspConfig:
    episodes: int
    seed: int = 0
    eta: float = 0.1
    br: BrConfig = field(default_factory=BrConfig)
    avg: AvgConfig = field(default_factory=AvgConfig)
    hla: HlaConfig = field(default_factory=HlaConfig)
    eval_every: int = 50_000
    eval_episodes: int = 2000
    checkpoint_every: int = 50_000
    use_hla: bool = True              # False = low-level NFSP attacker (ablation)
    defender_net: str = "pairwise"    # or "vanilla" (max-action ablation)

    def __post_init__(self):
        if self.episodes < 0:
            raise ValueError("episodes must be non-negative")
        if not (0.0 <= self.eta <= 1.0):
            raise ValueError("eta must lie in [0, 1]")
        if min(self.eval_every, self.checkpoint_every) <= 0:
            raise ValueError("cadences must be positive")
        if self.defender_net not in ("pairwise", "vanilla"):
            raise ValueError(f"unknown defender net style {self.defender_net!r}")


# ---------------------------------------------------------------------------
# Agents
# ---------------------------------------------------------------------------


class DefenderAgent:
    """NFSP defender: BR learner (pairwise or max-action vanilla) + pairwise
    average-policy learner over joint resource moves."""

    def __init__(self, config: NsgConfig, embed_vectors: np.ndarray,
                 br_cfg: BrConfig, avg_cfg: AvgConfig, rng: np.random.Generator,
                 style: str = "pairwise"):
        m = config.num_resources
        hist_len = config.horizon + 1
        self.style = style
        self.m = m
        self.encoder = NsgStateEncoder(hist_len, m)
        if style == "pairwise":
            br_net = NsgPairNet(embed_vectors, hist_len, m, m, rng)
        else:
            max_deg = max(config.graph.degree(v) for v in range(config.graph.node_count))
            self.max_actions = max_deg ** m
            br_net = NsgVanillaNet(embed_vectors, hist_len, m, self.max_actions, rng)
        avg_net = NsgPairNet(embed_vectors, hist_len, m, m, rng)
        self.br = BrLearner(br_net, br_cfg)
        self.avg = AvgLearner(avg_net, avg_cfg)
        self.mode = EpisodeMode.AVGER

    def encode_state(self, state):
        return self.encoder.encode(state.attacker_history, state.defender_locations)

    def br_actions(self, legal) -> np.ndarray:
        if self.style == "pairwise":
            return np.asarray(legal, dtype=np.int64)
        return np.arange(len(legal), dtype=np.int64)[:, None]

    def empty_br_actions(self) -> np.ndarray:
        return np.empty((0, self.m if self.style == "pairwise" else 1), dtype=np.int64)

    def avg_actions(self, legal) -> np.ndarray:
        return np.asarray(legal, dtype=np.int64)


class HlaAttackerAgent:
    """High-level attacker: a sliding-window bandit over exit nodes as the best
    responder, frequency counts as the average policy, and shortest-path play
    at the move level."""

    def __init__(self, config: NsgConfig, hla_cfg: HlaConfig):
        self.config = config
        self.hla = hla_cfg
        exits = [int(t) for t in config.targets]
        self.mab = SlidingWindowMab(exits, hla_cfg.window)
        self.averager = Averager(exits)
        self.cache = Cache()
        self.mode = EpisodeMode.AVGER
        self._exit = None
        self._path: list = []

    @property
    def exploring(self) -> bool:
        return self.mode is EpisodeMode.EXPLORE

    def begin_episode(self, state, rng: np.random.Generator, eta: float) -> None:
        self.mode = episode_mode(rng, eta, self.hla.explore_prob)
        if self.mode is EpisodeMode.MAB:
            self._exit = self.mab.select(rng)
            self.cache.add(self._exit)
        elif self.mode is EpisodeMode.EXPLORE:
            exits = self.mab.actions
            self._exit = exits[int(rng.integers(len(exits)))]
        else:
            self._exit = self.averager.sample(rng)
        self._path = sample_shortest_path(self.config.graph, state.attacker_node,
                                          self._exit, rng)

    def act(self, state, rng: np.random.Generator) -> int:
        return int(self._path[state.t + 1])

    def observe(self, state, a_att, next_state, u_def, done, rng, record) -> None:
        pass  # no per-step learning

    def finish(self, u_att: float, record: bool) -> None:
        if record:
            self.mab.record(self._exit, u_att)

    def flush(self) -> None:
        self.cache.flush(self.averager)


class LowLevelAttackerAgent:
    """Ablation attacker without the high-level abstraction: per-step NFSP over
    node moves, seeing its own history plus the initial defender placement."""

    def __init__(self, config: NsgConfig, embed_vectors: np.ndarray,
                 br_cfg: BrConfig, avg_cfg: AvgConfig, rng: np.random.Generator):
        self.config = config
        hist_len = config.horizon + 1
        m = config.num_resources
        self.encoder = NsgStateEncoder(hist_len, m)
        self.br = BrLearner(NsgPairNet(embed_vectors, hist_len, m, 1, rng), br_cfg)
        self.avg = AvgLearner(NsgPairNet(embed_vectors, hist_len, m, 1, rng), avg_cfg)
        self.mode = EpisodeMode.AVGER
        self._init_locs = None
        self._eps = 0.0
        self._pending = None  # (s_enc, action row) awaiting its next state

    @property
    def exploring(self) -> bool:
        return False

    def set_epsilon(self, eps: float) -> None:
        self._eps = eps

    def begin_episode(self, state, rng: np.random.Generator, eta: float) -> None:
        self.mode = EpisodeMode.MAB if rng.random() < eta else EpisodeMode.AVGER
        self._init_locs = state.defender_locations
        self._pending = None

    def _encode(self, state):
        return self.encoder.encode(state.attacker_history, self._init_locs)

    def act(self, state, rng: np.random.Generator) -> int:
        s_enc = self._encode(state)
        legal = legal_attacker_actions(state, self.config)
        acts = np.asarray(legal, dtype=np.int64)[:, None]
        if self.mode is EpisodeMode.MAB:
            idx = self.br.act(s_enc, acts, self._eps, rng)
        else:
            idx = self.avg.sample_action(s_enc, acts, rng)
        self._last = (s_enc, acts, idx)
        return int(legal[idx])

    def observe(self, state, a_att, next_state, u_def, done, rng, record) -> None:
        if not record:
            return
        s_enc, acts, idx = self._last
        r = (1.0 - u_def) if done else 0.0
        if done:
            self.br.store(Transition(s_enc, acts[idx], r, None,
                                     np.empty((0, 1), dtype=np.int64), True))
        else:
            ns = self._encode(next_state)
            legal2 = np.asarray(legal_attacker_actions(next_state, self.config),
                                dtype=np.int64)[:, None]
            self.br.store(Transition(s_enc, acts[idx], 0.0, ns, legal2, False))
        if self.mode is EpisodeMode.MAB:
            self.avg.store(s_enc, acts, idx, rng)

    def finish(self, u_att: float, record: bool) -> None:
        pass

    def flush(self) -> None:
        pass


# ---------------------------------------------------------------------------
# Episode
# ---------------------------------------------------------------------------


def run_episode(config: NsgConfig, defender: DefenderAgent, attacker,
                eta: float, eps: float, rng: np.random.Generator,
                record: bool = True):
    """One self-play episode; returns (u_defender, u_attacker), summing to 0.

    The defender stores every transition in its RL buffer and stores SL data
    only when acting in BR mode while the attacker is not exploring.
    """
    state = initial_state(config, rng)
    defender.mode = EpisodeMode.MAB if rng.random() < eta else EpisodeMode.AVGER
    if state.terminal:
        return 1.0, -1.0
    attacker.begin_episode(state, rng, eta)
    if hasattr(attacker, "set_epsilon"):
        attacker.set_epsilon(eps)

    u_def = 0.0
    while not state.terminal:
        s_enc = defender.encode_state(state)
        legal_d = list(legal_defender_actions(state, config))
        br_acts = defender.br_actions(legal_d)
        if defender.mode is EpisodeMode.MAB:
            idx = defender.br.act(s_enc, br_acts, eps, rng)
        else:
            idx = defender.avg.sample_action(s_enc, defender.avg_actions(legal_d), rng)
        a_att = attacker.act(state, rng)
        next_state, u_def, done = step(state, legal_d[idx], a_att, config)

        if record:
            if done:
                defender.br.store(Transition(s_enc, br_acts[idx], u_def, None,
                                             defender.empty_br_actions(), True))
            else:
                ns = defender.encode_state(next_state)
                legal2 = list(legal_defender_actions(next_state, config))
                defender.br.store(Transition(s_enc, br_acts[idx], 0.0, ns,
                                             defender.br_actions(legal2), False))
            if defender.mode is EpisodeMode.MAB and not attacker.exploring:
                defender.avg.store(s_enc, defender.avg_actions(legal_d), idx, rng)
        attacker.observe(state, a_att, next_state, u_def, done, rng, record)
        state = next_state

    attacker.finish(1.0 - u_def, record)
    return u_def, -u_def


# ---------------------------------------------------------------------------
# Policy handles for evaluation
# ---------------------------------------------------------------------------


def defender_avg_handle(agent: DefenderAgent) -> PolicyHandle:
    def fn(state, legal):
        return agent.avg.action_distribution(agent.encode_state(state),
                                             agent.avg_actions(legal))
    return PolicyHandle("AvgNet", fn)


def hla_avg_handle(agent: HlaAttackerAgent, config: NsgConfig) -> PolicyHandle:
    stash: dict = {}

    def reset(state, rng):
        exit_node = agent.averager.sample(rng)
        stash["path"] = sample_shortest_path(config.graph, state.attacker_node,
                                             exit_node, rng)

    def fn(state, legal):
        nxt = int(stash["path"][state.t + 1])
        p = np.zeros(len(legal))
        p[legal.index(nxt)] = 1.0
        return p

    return PolicyHandle("MAB-AVG", fn, reset)


def low_level_avg_handle(agent: LowLevelAttackerAgent) -> PolicyHandle:
    stash: dict = {}

    def reset(state, rng):
        stash["init"] = state.defender_locations

    def fn(state, legal):
        enc = agent.encoder.encode(state.attacker_history, stash["init"])
        return agent.avg.action_distribution(enc, np.asarray(legal)[:, None])

    return PolicyHandle("AvgNet", fn, reset)


def attacker_avg_handle(attacker, config: NsgConfig) -> PolicyHandle:
    if isinstance(attacker, HlaAttackerAgent):
        return hla_avg_handle(attacker, config)
    return low_level_avg_handle(attacker)


# ---------------------------------------------------------------------------
# Training loop (graph game)
# ---------------------------------------------------------------------------


@dataclass
class TrainResult:
    defender: DefenderAgent
    attacker: object
    curve: list
    episodes: int
    run_dir: str | None


def _write_curve(path: str, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(CURVE_HEADER + "\n")
        for row in rows:
            f.write(row + "\n")


def _build_agents(config: NfspConfig, nsg_cfg: NsgConfig, embed_vectors):
    defender = DefenderAgent(nsg_cfg, embed_vectors, config.br, config.avg,
                             substream(config.seed, "defender-init"),
                             style=config.defender_net)
    if config.use_hla:
        attacker = HlaAttackerAgent(nsg_cfg, config.hla)
    else:
        attacker = LowLevelAttackerAgent(nsg_cfg, embed_vectors, config.br,
                                         config.avg,
                                         substream(config.seed, "attacker-init"))
    return defender, attacker


def train(config: NfspConfig, nsg_cfg: NsgConfig, embed_vectors: np.ndarray,
          run_dir: str | None = None, resume: str | None = None,
          log_every: int | None = None) -> TrainResult:
    """Run the full self-play loop; returns the trained agents.

    Writes `curve.csv`, `ckpt_<episode>.nsgn` (defender average-policy
    weights), and `state_<episode>.pkl` (full training state, for exact
    resume) under run_dir when given.  `resume` takes a state pickle path.
    """
    if resume is not None:
        with open(resume, "rb") as f:
            snap = pickle.load(f)
        defender, attacker = snap["defender"], snap["attacker"]
        start, curve = snap["episode"], snap["curve"]
        if snap["seed"] != config.seed:
            raise ValueError("resume snapshot was created with a different seed")
    else:
        defender, attacker = _build_agents(config, nsg_cfg, embed_vectors)
        start, curve = 0, []

    curve_path = None
    if run_dir is not None:
        os.makedirs(run_dir, exist_ok=True)
        curve_path = os.path.join(run_dir, "curve.csv")
        _write_curve(curve_path, curve)

    for ep in range(start, config.episodes):
        rng = substream(config.seed, f"episode:{ep}")
        eps = epsilon_at(config.br, ep)
        run_episode(nsg_cfg, defender, attacker, config.eta, eps, rng)
        n = ep + 1

        if n % config.br.update_every == 0 and len(defender.br.replay) >= config.br.batch_size:
            defender.br.td_update(substream(config.seed, f"update-br:{ep}"))
        if n % config.avg.update_every == 0 and len(defender.avg.reservoir) >= config.avg.batch_size:
            defender.avg.sl_update(substream(config.seed, f"update-avg:{ep}"))
        if not config.use_hla:
            if n % config.br.update_every == 0 and len(attacker.br.replay) >= config.br.batch_size:
                attacker.br.td_update(substream(config.seed, f"update-att-br:{ep}"))
            if n % config.avg.update_every == 0 and len(attacker.avg.reservoir) >= config.avg.batch_size:
                attacker.avg.sl_update(substream(config.seed, f"update-att-avg:{ep}"))
        if n % config.br.target_sync_every == 0:
            defender.br.sync_target()
            if not config.use_hla:
                attacker.br.sync_target()
        if config.use_hla and n % config.hla.flush_every == 0:
            attacker.flush()

        if n % config.eval_every == 0 or n == config.episodes:
            rep = evaluate(defender_avg_handle(defender),
                           attacker_avg_handle(attacker, nsg_cfg),
                           nsg_cfg, config.eval_episodes,
                           substream_seed(config.seed, f"eval:{n}"))
            curve.append(rep.csv_row(n, "def_avg_vs_att_avg"))
            if curve_path is not None:
                with open(curve_path, "a", encoding="utf-8", newline="\n") as f:
                    f.write(curve[-1] + "\n")
            if log_every:
                print(f"[train] ep {n}: def_avg_vs_att_avg {rep.mean:.3f} "
                      f"± {rep.ci95:.3f}", flush=True)

        if run_dir is not None and (n % config.checkpoint_every == 0 or n == config.episodes):
            nn.save_checkpoint(defender.avg.net.params,
                               os.path.join(run_dir, f"ckpt_{n}.nsgn"),
                               extra={"episode": np.float32(n)})
            with open(os.path.join(run_dir, f"state_{n}.pkl"), "wb") as f:
                pickle.dump({"defender": defender, "attacker": attacker,
                             "episode": n, "curve": list(curve),
                             "seed": config.seed}, f)

    return TrainResult(defender, attacker, curve, config.episodes, run_dir)


# ---------------------------------------------------------------------------
# Team-bidding game (Goofspiel) self-play
# ---------------------------------------------------------------------------


class GoofAgent:
    """NFSP player for the bidding game over plain feature vectors."""

    def __init__(self, config: GoofConfig, role: str, style: str,
                 br_cfg: BrConfig, avg_cfg: AvgConfig, rng: np.random.Generator):
        if role not in ("team", "single"):
            raise ValueError(f"unknown role {role!r}")
        self.config = config
        self.role = role
        self.style = style
        k, n = config.k, config.n
        self.act_width = n * k if role == "team" else k
        self.state_dim = self.act_width + 3 * k
        self.max_actions = k ** n if role == "team" else k
        if style == "pairwise":
            br_net = VecPairNet(self.state_dim, self.act_width, rng)
        elif style == "vanilla":
            br_net = VecVanillaNet(self.state_dim, self.max_actions, rng)
        else:
            raise ValueError(f"unknown style {style!r}")
        avg_net = VecPairNet(self.state_dim, self.act_width, rng)
        self.br = BrLearner(br_net, br_cfg)
        self.avg = AvgLearner(avg_net, avg_cfg)
        self.mode = EpisodeMode.AVGER

    def encode_state(self, state) -> np.ndarray:
        k = self.config.k
        x = np.zeros(self.state_dim, dtype=np.float32)
        if self.role == "team":
            for i, rem in enumerate(state.team_remaining):
                for b in rem:
                    x[i * k + b - 1] = 1.0
        else:
            for b in state.single_remaining:
                x[b - 1] = 1.0
        off = self.act_width
        order = (RoundOutcome.TEAM, RoundOutcome.SINGLE, RoundOutcome.TIE)
        for i, o in enumerate(state.outcomes):
            x[off + 3 * i + order.index(o)] = 1.0
        return x

    def _encode_bid(self, action) -> np.ndarray:
        k = self.config.k
        v = np.zeros(self.act_width, dtype=np.float32)
        if self.role == "team":
            for i, b in enumerate(action):
                v[i * k + b - 1] = 1.0
        else:
            v[action - 1] = 1.0
        return v

    def _global_index(self, action) -> int:
        k = self.config.k
        if self.role == "team":
            idx = 0
            for b in action:
                idx = idx * k + (b - 1)
            return idx
        return action - 1

    def br_actions(self, legal) -> np.ndarray:
        if self.style == "pairwise":
            return np.stack([self._encode_bid(a) for a in legal])
        return np.array([self._global_index(a) for a in legal], dtype=np.int64)[:, None]

    def empty_br_actions(self) -> np.ndarray:
        if self.style == "pairwise":
            return np.empty((0, self.act_width), dtype=np.float32)
        return np.empty((0, 1), dtype=np.int64)

    def avg_actions(self, legal) -> np.ndarray:
        return np.stack([self._encode_bid(a) for a in legal])

    def choose(self, state, legal, eps: float, rng: np.random.Generator) -> int:
        s = self.encode_state(state)
        if self.mode is EpisodeMode.MAB:
            return self.br.act(s, self.br_actions(legal), eps, rng)
        return self.avg.sample_action(s, self.avg_actions(legal), rng)

    def policy_fn(self):
        """Average-policy distribution from this player's information only."""
        def fn(state, legal):
            return self.avg.action_distribution(self.encode_state(state),
                                                self.avg_actions(legal))
        return fn


def train_goofspiel(config: NfspConfig, goof_cfg: GoofConfig,
                    style: str = "pairwise", run_dir: str | None = None,
                    eval_exact: bool = True, log_every: int | None = None):
    """Self-play NFSP on the bidding game; returns (team, single, curve).

    When eval_exact is set, the curve tracks the exact exploitability of the
    team's average policy (the single player's exact best-response value)."""
    from .evaluation import exact_best_response_goofspiel

    team = GoofAgent(goof_cfg, "team", style, config.br, config.avg,
                     substream(config.seed, "team-init"))
    single = GoofAgent(goof_cfg, "single", style, config.br, config.avg,
                       substream(config.seed, "single-init"))
    curve: list = []
    curve_path = None
    if run_dir is not None:
        os.makedirs(run_dir, exist_ok=True)
        curve_path = os.path.join(run_dir, "curve.csv")
        _write_curve(curve_path, curve)

    for ep in range(config.episodes):
        rng = substream(config.seed, f"episode:{ep}")
        eps = epsilon_at(config.br, ep)
        for agent in (team, single):
            agent.mode = EpisodeMode.MAB if rng.random() < config.eta else EpisodeMode.AVGER
        state = initial_goof_state(goof_cfg)
        while not state.terminal:
            legal_t = legal_team_actions(state, goof_cfg)
            legal_s = legal_single_actions(state)
            ti = team.choose(state, legal_t, eps, rng)
            si = single.choose(state, legal_s, eps, rng)
            nxt, util = goof_step(state, legal_t[ti], legal_s[si], goof_cfg)
            for agent, legal, idx, side in ((team, legal_t, ti, 0), (single, legal_s, si, 1)):
                s_enc = agent.encode_state(state)
                acts = agent.br_actions(legal)
                if util is not None:
                    agent.br.store(Transition(s_enc, acts[idx], util[side], None,
                                              agent.empty_br_actions(), True))
                else:
                    legal2 = (legal_team_actions(nxt, goof_cfg) if side == 0
                              else legal_single_actions(nxt))
                    agent.br.store(Transition(s_enc, acts[idx], 0.0,
                                              agent.encode_state(nxt),
                                              agent.br_actions(legal2), False))
                if agent.mode is EpisodeMode.MAB:
                    agent.avg.store(s_enc, agent.avg_actions(legal), idx, rng)
            state = nxt

        n = ep + 1
        for tag, agent in (("team", team), ("single", single)):
            if n % config.br.update_every == 0 and len(agent.br.replay) >= config.br.batch_size:
                agent.br.td_update(substream(config.seed, f"update-br-{tag}:{ep}"))
            if n % config.avg.update_every == 0 and len(agent.avg.reservoir) >= config.avg.batch_size:
                agent.avg.sl_update(substream(config.seed, f"update-avg-{tag}:{ep}"))
            if n % config.br.target_sync_every == 0:
                agent.br.sync_target()

        if eval_exact and (n % config.eval_every == 0 or n == config.episodes):
            expl, _ = exact_best_response_goofspiel(team.policy_fn(), goof_cfg, "single")
            curve.append(f"{n},team_exploitability,{expl:.6f},0.000000")
            if curve_path is not None:
                with open(curve_path, "a", encoding="utf-8", newline="\n") as f:
                    f.write(curve[-1] + "\n")
            if log_every:
                print(f"[goofspiel] ep {n}: team exploitability {expl:.4f}", flush=True)

    return team, single, curve


# ---------------------------------------------------------------------------
# Matrix-game sanity loop (two HLA agents)
# ---------------------------------------------------------------------------


def train_hla_matrix_game(episodes: int, payoff=None, seed: int = 0,
                          eta: float = 0.1, hla_cfg: HlaConfig | None = None):
    """Fictitious self-play between two HLA agents on a 2x2 matrix game
    (default matching pennies: player 0 wins on a match).  Returns the two
    average-policy distributions."""
    cfg = hla_cfg or HlaConfig()
    if payoff is None:
        payoff = np.array([[1.0, -1.0], [-1.0, 1.0]])
    payoff = np.asarray(payoff, dtype=np.float64)
    actions = list(range(payoff.shape[0]))
    agents = [{"mab": SlidingWindowMab(actions, cfg.window),
               "avg": Averager(actions), "cache": Cache()} for _ in range(2)]

    for ep in range(episodes):
        rng = substream(seed, f"episode:{ep}")
        picks = []
        for ag in agents:
            mode = episode_mode(rng, eta, cfg.explore_prob)
            if mode is EpisodeMode.MAB:
                a = ag["mab"].select(rng)
                ag["cache"].add(a)
            elif mode is EpisodeMode.EXPLORE:
                a = actions[int(rng.integers(len(actions)))]
            else:
                a = ag["avg"].sample(rng)
            picks.append(a)
        u0 = float(payoff[picks[0], picks[1]])
        agents[0]["mab"].record(picks[0], u0)
        agents[1]["mab"].record(picks[1], -u0)
        if (ep + 1) % cfg.flush_every == 0:
            for ag in agents:
                ag["cache"].flush(ag["avg"])

    return agents[0]["avg"].distribution(), agents[1]["avg"].distribution()
