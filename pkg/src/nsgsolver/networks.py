"""Static network wirings used by the best-response and average-policy learners.

All value networks here score (state, action) pairs: state features are
broadcast across the state's legal actions and concatenated with per-action
features before a shared fully connected head.  The "vanilla" variants instead
emit a fixed-width output indexed by within-state legal-action position and are
used as ablation baselines.

Every network exposes the same training surface:

    pair_scores(states, actions_list, params=None) -> (scores, pair_state, cache)
    backward(dscores, cache) -> grads dict

where `actions_list[i]` holds the encoded actions scored against `states[i]`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn

__all__ = [
    "NsgStateEnc",
    "NsgStateEncoder",
    "NsgPairNet",
    "NsgVanillaNet",
    "VecPairNet",
    "VecVanillaNet",
]

EMB_ACT = 32
HIDDEN = 64
FEAT = 64
FILTERS = 64
KERNEL = 3


# ---------------------------------------------------------------------------
# State encoding for the graph game
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NsgStateEnc:
    """Fixed-width encoded game state: padded node history + location slots."""

    hist: np.ndarray  # (L,) int32, padded with 0 beyond the valid prefix
    mask: np.ndarray  # (L,) bool
    locs: np.ndarray  # (n_loc,) int32


class NsgStateEncoder:
    """Encodes defender or attacker views of the graph game.

    The defender sees the attacker's full history plus its own current resource
    locations.  The attacker sees its own history plus the initial resource
    locations only.
    """

    def __init__(self, hist_len: int, n_loc: int):
        self.hist_len = hist_len
        self.n_loc = n_loc

    def encode(self, history, locs) -> NsgStateEnc:
        if len(history) > self.hist_len:
            raise ValueError(f"history length {len(history)} exceeds {self.hist_len}")
        hist = np.zeros(self.hist_len, dtype=np.int32)
        mask = np.zeros(self.hist_len, dtype=bool)
        hist[: len(history)] = history
        mask[: len(history)] = True
        return NsgStateEnc(hist, mask, np.asarray(locs, dtype=np.int32))


def _mlp2_init(ps, rng, prefix, din, dh, dout, dtype):
    ps.add(f"{prefix}_fc1_w", nn.glorot_uniform(rng, din, dh, dtype=dtype))
    ps.add(f"{prefix}_fc1_b", np.zeros(dh, dtype=dtype))
    ps.add(f"{prefix}_fc2_w", nn.glorot_uniform(rng, dh, dout, dtype=dtype))
    ps.add(f"{prefix}_fc2_b", np.zeros(dout, dtype=dtype))


def _mlp2_forward(ps, prefix, x):
    h1, c1 = nn.dense_forward(x, ps[f"{prefix}_fc1_w"], ps[f"{prefix}_fc1_b"])
    a1, r1 = nn.relu_forward(h1)
    h2, c2 = nn.dense_forward(a1, ps[f"{prefix}_fc2_w"], ps[f"{prefix}_fc2_b"])
    a2, r2 = nn.relu_forward(h2)
    return a2, (c1, r1, c2, r2)


def _mlp2_backward(dy, cache, prefix, grads):
    c1, r1, c2, r2 = cache
    dh2 = nn.relu_backward(dy, r2)
    da1, dw2, db2 = nn.dense_backward(dh2, c2)
    dh1 = nn.relu_backward(da1, r1)
    dx, dw1, db1 = nn.dense_backward(dh1, c1)
    grads[f"{prefix}_fc1_w"] = dw1
    grads[f"{prefix}_fc1_b"] = db1
    grads[f"{prefix}_fc2_w"] = dw2
    grads[f"{prefix}_fc2_b"] = db2
    return dx


def _head_init(ps, rng, din, dout, dtype):
    ps.add("head_fc1_w", nn.glorot_uniform(rng, din, HIDDEN, dtype=dtype))
    ps.add("head_fc1_b", np.zeros(HIDDEN, dtype=dtype))
    ps.add("head_fc2_w", nn.glorot_uniform(rng, HIDDEN, dout, dtype=dtype))
    ps.add("head_fc2_b", np.zeros(dout, dtype=dtype))


def _head_forward(ps, x):
    h, c1 = nn.dense_forward(x, ps["head_fc1_w"], ps["head_fc1_b"])
    a, r1 = nn.relu_forward(h)
    y, c2 = nn.dense_forward(a, ps["head_fc2_w"], ps["head_fc2_b"])
    return y, (c1, r1, c2)


def _head_backward(dy, cache, grads):
    c1, r1, c2 = cache
    da, dw2, db2 = nn.dense_backward(dy, c2)
    dh = nn.relu_backward(da, r1)
    dx, dw1, db1 = nn.dense_backward(dh, c1)
    grads["head_fc1_w"] = dw1
    grads["head_fc1_b"] = db1
    grads["head_fc2_w"] = dw2
    grads["head_fc2_b"] = db2
    return dx


def _stack_states(states):
    hist = np.stack([s.hist for s in states])
    mask = np.stack([s.mask for s in states])
    locs = np.stack([s.locs for s in states])
    return hist, mask, locs


def _flatten_actions(actions_list):
    pair_state = np.concatenate(
        [np.full(len(a), i, dtype=np.int64) for i, a in enumerate(actions_list)]
    )
    actions = np.concatenate([np.asarray(a) for a in actions_list], axis=0)
    return actions, pair_state


class NsgPairNet:
    """Pair-scoring network for the graph game.

    State side: frozen node embeddings -> gated conv over the padded history,
    plus a two-layer MLP over the location-slot embeddings.  Action side: a
    learnable node embedding summed over the action's components, then a
    two-layer MLP.  Head: two dense layers on the concatenated pair features.
    """

    def __init__(self, embed_vectors: np.ndarray, hist_len: int, n_loc: int,
                 act_components: int, rng: np.random.Generator, dtype=np.float32):
        self.embed = np.asarray(embed_vectors, dtype=dtype)
        self.node_count = self.embed.shape[0]
        self.emb_dim = self.embed.shape[1]
        self.hist_len = hist_len
        self.n_loc = n_loc
        self.act_components = act_components
        self.dtype = dtype

        ps = nn.ParameterSet()
        ps.add("act_emb", rng.uniform(-0.05, 0.05, size=(self.node_count, EMB_ACT)).astype(dtype))
        _mlp2_init(ps, rng, "act", EMB_ACT, HIDDEN, FEAT, dtype)
        _mlp2_init(ps, rng, "loc", n_loc * self.emb_dim, HIDDEN, FEAT, dtype)
        fan = KERNEL * self.emb_dim
        ps.add("conv_a_w", nn.glorot_uniform(rng, fan, FILTERS, shape=(KERNEL, self.emb_dim, FILTERS), dtype=dtype))
        ps.add("conv_a_b", np.zeros(FILTERS, dtype=dtype))
        ps.add("conv_b_w", nn.glorot_uniform(rng, fan, FILTERS, shape=(KERNEL, self.emb_dim, FILTERS), dtype=dtype))
        ps.add("conv_b_b", np.zeros(FILTERS, dtype=dtype))
        _head_init(ps, rng, FILTERS + FEAT + FEAT, 1, dtype)
        self.params = ps

    def clone_with(self, params: nn.ParameterSet, dtype=None) -> "NsgPairNet":
        out = object.__new__(NsgPairNet)
        out.__dict__.update(self.__dict__)
        out.params = params
        if dtype is not None:
            out.embed = self.embed.astype(dtype)
            out.dtype = dtype
        return out

    def pair_scores(self, states, actions_list, params=None):
        ps = params or self.params
        hist, mask, locs = _stack_states(states)
        actions, pair_state = _flatten_actions(actions_list)
        if actions.ndim != 2 or actions.shape[1] != self.act_components:
            raise nn.ShapeError("actions must have shape (n, act_components)")

        x_hist, _ = nn.embedding_forward(self.embed if params is None else self.embed.astype(ps["conv_a_w"].dtype), hist)
        seq_feat, seq_cache = nn.gated_conv_pool_forward(
            x_hist, mask, ps["conv_a_w"], ps["conv_a_b"], ps["conv_b_w"], ps["conv_b_b"]
        )
        x_loc = (self.embed if params is None else self.embed.astype(ps["conv_a_w"].dtype))[locs].reshape(len(states), -1)
        loc_feat, loc_cache = _mlp2_forward(ps, "loc", x_loc)

        a_vecs, a_cache = nn.embedding_forward(ps["act_emb"], actions)  # (N, m, E)
        a_sum = a_vecs.sum(axis=1)
        act_feat, act_cache = _mlp2_forward(ps, "act", a_sum)

        state_feat = np.concatenate([seq_feat, loc_feat], axis=1)  # (B, FILTERS+FEAT)
        z = np.concatenate([state_feat[pair_state], act_feat], axis=1)
        y, head_cache = _head_forward(ps, z)
        scores = y[:, 0]
        cache = (seq_cache, loc_cache, a_cache, act_cache, head_cache, pair_state,
                 len(states), actions.shape)
        return scores, pair_state, cache

    def backward(self, dscores, cache):
        seq_cache, loc_cache, a_cache, act_cache, head_cache, pair_state, n_states, ashape = cache
        grads: dict[str, np.ndarray] = {}
        dz = _head_backward(dscores[:, None], head_cache, grads)
        dsf_pairs = dz[:, : FILTERS + FEAT]
        dact_feat = dz[:, FILTERS + FEAT :]

        dstate = np.zeros((n_states, FILTERS + FEAT), dtype=dz.dtype)
        np.add.at(dstate, pair_state, dsf_pairs)
        dseq = dstate[:, :FILTERS]
        dloc = dstate[:, FILTERS:]

        _, dwa, dba, dwb, dbb = nn.gated_conv_pool_backward(dseq, seq_cache)
        grads["conv_a_w"] = dwa
        grads["conv_a_b"] = dba
        grads["conv_b_w"] = dwb
        grads["conv_b_b"] = dbb
        _mlp2_backward(dloc, loc_cache, "loc", grads)

        da_sum = _mlp2_backward(dact_feat, act_cache, "act", grads)
        da_vecs = np.repeat(da_sum[:, None, :], ashape[1], axis=1)
        grads["act_emb"] = nn.embedding_backward(da_vecs, a_cache)
        return grads


class NsgVanillaNet:
    """Fixed-width baseline: state features -> head with one output per
    within-state legal-action position.  Actions are encoded as their index in
    the state's canonical legal-action enumeration."""

    def __init__(self, embed_vectors: np.ndarray, hist_len: int, n_loc: int,
                 max_actions: int, rng: np.random.Generator, dtype=np.float32):
        self.embed = np.asarray(embed_vectors, dtype=dtype)
        self.node_count = self.embed.shape[0]
        self.emb_dim = self.embed.shape[1]
        self.hist_len = hist_len
        self.n_loc = n_loc
        self.max_actions = max_actions
        self.dtype = dtype

        ps = nn.ParameterSet()
        _mlp2_init(ps, rng, "loc", n_loc * self.emb_dim, HIDDEN, FEAT, dtype)
        fan = KERNEL * self.emb_dim
        ps.add("conv_a_w", nn.glorot_uniform(rng, fan, FILTERS, shape=(KERNEL, self.emb_dim, FILTERS), dtype=dtype))
        ps.add("conv_a_b", np.zeros(FILTERS, dtype=dtype))
        ps.add("conv_b_w", nn.glorot_uniform(rng, fan, FILTERS, shape=(KERNEL, self.emb_dim, FILTERS), dtype=dtype))
        ps.add("conv_b_b", np.zeros(FILTERS, dtype=dtype))
        _head_init(ps, rng, FILTERS + FEAT, max_actions, dtype)
        self.params = ps

    def clone_with(self, params, dtype=None):
        out = object.__new__(NsgVanillaNet)
        out.__dict__.update(self.__dict__)
        out.params = params
        if dtype is not None:
            out.embed = self.embed.astype(dtype)
            out.dtype = dtype
        return out

    def pair_scores(self, states, actions_list, params=None):
        ps = params or self.params
        hist, mask, locs = _stack_states(states)
        actions, pair_state = _flatten_actions(actions_list)
        actions = actions.reshape(-1).astype(np.int64)
        if actions.size and actions.max() >= self.max_actions:
            raise nn.ShapeError("legal-action index exceeds the fixed output width")
        emb = self.embed if params is None else self.embed.astype(ps["conv_a_w"].dtype)
        x_hist = emb[hist]
        seq_feat, seq_cache = nn.gated_conv_pool_forward(
            x_hist, mask, ps["conv_a_w"], ps["conv_a_b"], ps["conv_b_w"], ps["conv_b_b"]
        )
        x_loc = emb[locs].reshape(len(states), -1)
        loc_feat, loc_cache = _mlp2_forward(ps, "loc", x_loc)
        state_feat = np.concatenate([seq_feat, loc_feat], axis=1)
        out, head_cache = _head_forward(ps, state_feat)  # (B, K)
        scores = out[pair_state, actions]
        cache = (seq_cache, loc_cache, head_cache, pair_state, actions, out.shape)
        return scores, pair_state, cache

    def backward(self, dscores, cache):
        seq_cache, loc_cache, head_cache, pair_state, actions, oshape = cache
        grads: dict[str, np.ndarray] = {}
        dout = np.zeros(oshape, dtype=dscores.dtype)
        np.add.at(dout, (pair_state, actions), dscores)
        dstate = _head_backward(dout, head_cache, grads)
        dseq = dstate[:, :FILTERS]
        dloc = dstate[:, FILTERS:]
        _, dwa, dba, dwb, dbb = nn.gated_conv_pool_backward(dseq, seq_cache)
        grads["conv_a_w"] = dwa
        grads["conv_a_b"] = dba
        grads["conv_b_w"] = dwb
        grads["conv_b_b"] = dbb
        _mlp2_backward(dloc, loc_cache, "loc", grads)
        return grads


class VecPairNet:
    """Pair-scoring network over plain feature vectors (used for the bidding game)."""

    def __init__(self, state_dim: int, action_dim: int, rng: np.random.Generator, dtype=np.float32):
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.dtype = dtype
        ps = nn.ParameterSet()
        _mlp2_init(ps, rng, "state", state_dim, HIDDEN, FEAT, dtype)
        _mlp2_init(ps, rng, "act", action_dim, HIDDEN, FEAT, dtype)
        _head_init(ps, rng, FEAT + FEAT, 1, dtype)
        self.params = ps

    def clone_with(self, params, dtype=None):
        out = object.__new__(VecPairNet)
        out.__dict__.update(self.__dict__)
        out.params = params
        if dtype is not None:
            out.dtype = dtype
        return out

    def pair_scores(self, states, actions_list, params=None):
        ps = params or self.params
        dtype = ps["state_fc1_w"].dtype
        sx = np.stack(states).astype(dtype)
        actions, pair_state = _flatten_actions(actions_list)
        ax = actions.astype(dtype)
        state_feat, s_cache = _mlp2_forward(ps, "state", sx)
        act_feat, a_cache = _mlp2_forward(ps, "act", ax)
        z = np.concatenate([state_feat[pair_state], act_feat], axis=1)
        y, head_cache = _head_forward(ps, z)
        cache = (s_cache, a_cache, head_cache, pair_state, len(states))
        return y[:, 0], pair_state, cache

    def backward(self, dscores, cache):
        s_cache, a_cache, head_cache, pair_state, n_states = cache
        grads: dict[str, np.ndarray] = {}
        dz = _head_backward(dscores[:, None], head_cache, grads)
        dsf_pairs = dz[:, :FEAT]
        dact = dz[:, FEAT:]
        dstate = np.zeros((n_states, FEAT), dtype=dz.dtype)
        np.add.at(dstate, pair_state, dsf_pairs)
        _mlp2_backward(dstate, s_cache, "state", grads)
        _mlp2_backward(dact, a_cache, "act", grads)
        return grads


class VecVanillaNet:
    """Fixed-width baseline over plain feature vectors."""

    def __init__(self, state_dim: int, max_actions: int, rng: np.random.Generator, dtype=np.float32):
        self.state_dim = state_dim
        self.max_actions = max_actions
        self.dtype = dtype
        ps = nn.ParameterSet()
        _mlp2_init(ps, rng, "state", state_dim, HIDDEN, FEAT, dtype)
        _head_init(ps, rng, FEAT, max_actions, dtype)
        self.params = ps

    def clone_with(self, params, dtype=None):
        out = object.__new__(VecVanillaNet)
        out.__dict__.update(self.__dict__)
        out.params = params
        if dtype is not None:
            out.dtype = dtype
        return out

    def pair_scores(self, states, actions_list, params=None):
        ps = params or self.params
        dtype = ps["state_fc1_w"].dtype
        sx = np.stack(states).astype(dtype)
        actions, pair_state = _flatten_actions(actions_list)
        actions = actions.reshape(-1).astype(np.int64)
        if actions.size and actions.max() >= self.max_actions:
            raise nn.ShapeError("legal-action index exceeds the fixed output width")
        state_feat, s_cache = _mlp2_forward(ps, "state", sx)
        out, head_cache = _head_forward(ps, state_feat)
        scores = out[pair_state, actions]
        cache = (s_cache, head_cache, pair_state, actions, out.shape)
        return scores, pair_state, cache

    def backward(self, dscores, cache):
        s_cache, head_cache, pair_state, actions, oshape = cache
        grads: dict[str, np.ndarray] = {}
        dout = np.zeros(oshape, dtype=dscores.dtype)
        np.add.at(dout, (pair_state, actions), dscores)
        dstate = _head_backward(dout, head_cache, grads)
        _mlp2_backward(dstate, s_cache, "state", grads)
        return grads
