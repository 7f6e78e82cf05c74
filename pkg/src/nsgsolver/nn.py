"""Minimal fixed-architecture neural stack on numpy.

Layers are pure forward/backward function pairs with exact analytic gradients;
there is no autodiff.  Networks are wired statically (see networks.py), and the
finite-difference harness `gradcheck` verifies every backward path in 64-bit
mode.  Training runs in 32-bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ParameterSet",
    "OptimizerConfig",
    "glorot_uniform",
    "dense_forward",
    "dense_backward",
    "relu_forward",
    "relu_backward",
    "sigmoid",
    "embedding_forward",
    "embedding_backward",
    "conv1d_same_forward",
    "conv1d_same_backward",
    "gated_conv_pool_forward",
    "gated_conv_pool_backward",
    "masked_softmax",
    "clip_global_norm",
    "optimizer_step",
    "gradcheck",
    "save_checkpoint",
    "load_checkpoint",
]

CKPT_MAGIC = b"NSGN"
CKPT_VERSION = 1


class ShapeError(ValueError):
    """Raised on layer input/parameter shape mismatch."""


# ---------------------------------------------------------------------------
# Parameters and optimizers
# ---------------------------------------------------------------------------


class ParameterSet:
    """Ordered name -> array map for one network, plus per-parameter optimizer slots."""

    def __init__(self):
        self.tensors: dict[str, np.ndarray] = {}
        self.opt_state: dict[str, dict] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self.tensors:
            raise ValueError(f"duplicate parameter name {name!r}")
        self.tensors[name] = value
        return value

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        if name in self.tensors and self.tensors[name].shape != value.shape:
            raise ShapeError(f"parameter {name!r} shape is immutable")
        self.tensors[name] = value

    def __contains__(self, name):
        return name in self.tensors

    def names(self):
        return list(self.tensors.keys())

    def copy(self) -> "ParameterSet":
        out = ParameterSet()
        out.tensors = {k: v.copy() for k, v in self.tensors.items()}
        out.opt_state = {
            k: {sk: (sv.copy() if isinstance(sv, np.ndarray) else sv) for sk, sv in st.items()}
            for k, st in self.opt_state.items()
        }
        return out

    def astype(self, dtype) -> "ParameterSet":
        out = ParameterSet()
        out.tensors = {k: v.astype(dtype) for k, v in self.tensors.items()}
        return out


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str  # "adam" | "rmsprop"
    learning_rate: float
    clip_norm: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    rho: float = 0.99
    eps: float = 1e-8

    def __post_init__(self):
        if self.kind not in ("adam", "rmsprop"):
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        if self.learning_rate <= 0 or self.clip_norm <= 0:
            raise ValueError("learning_rate and clip_norm must be positive")


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None, dtype=np.float32):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    if shape is None:
        shape = (fan_in, fan_out)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def clip_global_norm(grads: dict, clip_norm: float):
    """Rescale all grads so their joint 2-norm is at most clip_norm.

    Returns (clipped grads, scale); scale is 1.0 when no clipping applies, so
    direction is always preserved.
    """
    sq = 0.0
    for g in grads.values():
        sq += float(np.sum(np.asarray(g, dtype=np.float64) ** 2))
    norm = np.sqrt(sq)
    if norm <= clip_norm or norm == 0.0:
        return grads, 1.0
    scale = clip_norm / norm
    return {k: g * np.asarray(scale, dtype=g.dtype) for k, g in grads.items()}, scale


def optimizer_step(params: ParameterSet, grads: dict, config: OptimizerConfig) -> None:
    """Apply one clipped Adam / RMSprop update in place."""
    for name, g in grads.items():
        if name not in params:
            raise ShapeError(f"gradient for unknown parameter {name!r}")
        if g.shape != params[name].shape:
            raise ShapeError(f"gradient shape mismatch for {name!r}")
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient for {name!r}")
    grads, _ = clip_global_norm(grads, config.clip_norm)
    for name, g in grads.items():
        p = params.tensors[name]
        st = params.opt_state.setdefault(name, {})
        if config.kind == "adam":
            t = st.get("t", 0) + 1
            m = st.get("m")
            v = st.get("v")
            if m is None:
                m = np.zeros_like(p)
                v = np.zeros_like(p)
            m = config.beta1 * m + (1 - config.beta1) * g
            v = config.beta2 * v + (1 - config.beta2) * g * g
            mhat = m / (1 - config.beta1**t)
            vhat = v / (1 - config.beta2**t)
            p -= (config.learning_rate * mhat / (np.sqrt(vhat) + config.eps)).astype(p.dtype)
            st.update(t=t, m=m, v=v)
        else:  # rmsprop
            v = st.get("v")
            if v is None:
                v = np.zeros_like(p)
            v = config.rho * v + (1 - config.rho) * g * g
            p -= (config.learning_rate * g / (np.sqrt(v) + config.eps)).astype(p.dtype)
            st["v"] = v


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    if x.shape[-1] != w.shape[0]:
        raise ShapeError(f"dense: input width {x.shape[-1]} != weight rows {w.shape[0]}")
    return x @ w + b, (x, w)


def dense_backward(dy: np.ndarray, cache):
    x, w = cache
    dx = dy @ w.T
    dw = x.reshape(-1, x.shape[-1]).T @ dy.reshape(-1, dy.shape[-1])
    db = dy.reshape(-1, dy.shape[-1]).sum(axis=0)
    return dx, dw, db


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0), (x > 0)


def relu_backward(dy: np.ndarray, cache):
    return dy * cache


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def embedding_forward(table: np.ndarray, ids: np.ndarray):
    return table[ids], (table.shape, ids)


def embedding_backward(dy: np.ndarray, cache):
    shape, ids = cache
    dtable = np.zeros(shape, dtype=dy.dtype)
    np.add.at(dtable, ids.reshape(-1), dy.reshape(-1, shape[1]))
    return dtable


def conv1d_same_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """1-D convolution with stride 1 and zero same-padding.

    x: (B, L, Cin); w: (K, Cin, Cout); b: (Cout,).  Output: (B, L, Cout).
    """
    k, cin, cout = w.shape
    if x.shape[-1] != cin:
        raise ShapeError(f"conv1d: input channels {x.shape[-1]} != kernel channels {cin}")
    pad = k // 2
    xp = np.pad(x, ((0, 0), (pad, pad), (0, 0)))
    cols = np.stack([xp[:, i : i + x.shape[1], :] for i in range(k)], axis=2)  # (B,L,K,Cin)
    y = cols.reshape(*cols.shape[:2], k * cin) @ w.reshape(k * cin, cout) + b
    return y, (cols, w, x.shape)


def conv1d_same_backward(dy: np.ndarray, cache):
    cols, w, xshape = cache
    k, cin, cout = w.shape
    b_, l = xshape[0], xshape[1]
    dw = cols.reshape(-1, k * cin).T @ dy.reshape(-1, cout)
    db = dy.reshape(-1, cout).sum(axis=0)
    dcols = (dy @ w.reshape(k * cin, cout).T).reshape(b_, l, k, cin)
    pad = k // 2
    dxp = np.zeros((b_, l + 2 * pad, cin), dtype=dy.dtype)
    for i in range(k):
        dxp[:, i : i + l, :] += dcols[:, :, i, :]
    return dxp[:, pad : pad + l, :], dw.reshape(k, cin, cout), db


def gated_conv_pool_forward(x, mask, wa, ba, wb, bb):
    """Gated convolution block over padded sequences, max-pooled over valid steps.

    x: (B, L, Cin); mask: (B, L) bool, True on real positions.  Two parallel
    convolutions A and B; per-position output A * sigmoid(B); global max pool
    over valid positions only.  Returns (B, Cout).
    """
    if not mask.any(axis=1).all():
        raise ValueError("gated conv: some sequence is all padding")
    a, ca = conv1d_same_forward(x, wa, ba)
    b, cb = conv1d_same_forward(x, wb, bb)
    s = sigmoid(b)
    h = a * s
    neg = np.where(mask[:, :, None], h, -np.inf)
    arg = neg.argmax(axis=1)  # (B, Cout)
    pooled = np.take_along_axis(h, arg[:, None, :], axis=1)[:, 0, :]
    return pooled, (ca, cb, a, s, arg, h.shape)


def gated_conv_pool_backward(dpooled, cache):
    ca, cb, a, s, arg, hshape = cache
    dh = np.zeros(hshape, dtype=dpooled.dtype)
    np.put_along_axis(dh, arg[:, None, :], dpooled[:, None, :], axis=1)
    da = dh * s
    db_pre = dh * a * s * (1 - s)
    dx_a, dwa, dba = conv1d_same_backward(da, ca)
    dx_b, dwb, dbb = conv1d_same_backward(db_pre, cb)
    return dx_a + dx_b, dwa, dba, dwb, dbb


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Softmax over unmasked entries; masked entries are exactly zero."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("masked_softmax: no unmasked entry")
    z = np.where(mask, logits, -np.inf)
    z = z - z.max()
    e = np.where(mask, np.exp(z), 0.0)
    return e / e.sum()


# ---------------------------------------------------------------------------
# Finite-difference gradient check
# ---------------------------------------------------------------------------


def gradcheck(loss_fn, params: ParameterSet, eps: float = 1e-4, max_entries_per_tensor: int = 20,
              rng: np.random.Generator | None = None) -> float:
    """Max relative error between analytic and central finite-difference gradients.

    `loss_fn(params)` must return (loss, grads dict).  Run in 64-bit: pass a
    ParameterSet with float64 tensors.  For large tensors a random subset of
    coordinates is probed.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    _, grads = loss_fn(params)

    def probe(flat, i, analytic, step):
        orig = flat[i]
        flat[i] = orig + step
        lp, _ = loss_fn(params)
        flat[i] = orig - step
        lm, _ = loss_fn(params)
        flat[i] = orig
        num = (lp - lm) / (2 * step)
        denom = max(abs(num), abs(analytic), 1e-8)
        return abs(num - analytic) / denom

    worst = 0.0
    for name, g in grads.items():
        p = params.tensors[name]
        flat = p.reshape(-1)
        gflat = np.asarray(g).reshape(-1)
        n = flat.size
        idxs = range(n) if n <= max_entries_per_tensor else rng.choice(n, max_entries_per_tensor, replace=False)
        for i in idxs:
            err = probe(flat, i, gflat[i], eps)
            if err > 1e-5:
                # a ReLU/max kink within eps of the base point corrupts the
                # central difference; shrinking the step disambiguates a true
                # gradient bug from a kink crossing
                err = min(err, probe(flat, i, gflat[i], eps / 100))
            worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# Checkpoint I/O
# ---------------------------------------------------------------------------


def save_checkpoint(params: ParameterSet, path, extra: dict | None = None) -> None:
    """Binary checkpoint: magic 'NSGN', version, tensor count, named f32 tensors.

    Optimizer moment tensors are stored under 'opt.<param>.<slot>' names and
    scalar step counters under 'opt.<param>.t' so a reload resumes training
    exactly.  `extra` adds caller-named tensors.
    """
    entries: list[tuple[str, np.ndarray]] = list(params.tensors.items())
    for pname, st in params.opt_state.items():
        for slot, val in st.items():
            arr = np.asarray(val, dtype=np.float32)
            entries.append((f"opt.{pname}.{slot}", arr))
    if extra:
        entries.extend((f"extra.{k}", np.asarray(v, dtype=np.float32)) for k, v in extra.items())
    with open(path, "wb") as f:
        f.write(CKPT_MAGIC)
        f.write(struct.pack("<II", CKPT_VERSION, len(entries)))
        for name, arr in entries:
            nb = name.encode("utf-8")
            arr = np.ascontiguousarray(arr, dtype="<f4")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(struct.pack("<B", arr.ndim))
            for d in arr.shape:
                f.write(struct.pack("<I", d))
            f.write(arr.tobytes())


def load_checkpoint(path):
    """Load a checkpoint; returns (ParameterSet, extra tensors dict)."""
    with open(path, "rb") as f:
        if f.read(4) != CKPT_MAGIC:
            raise ValueError("not a checkpoint file: bad magic")
        version, count = struct.unpack("<II", f.read(8))
        if version != CKPT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        params = ParameterSet()
        extra: dict[str, np.ndarray] = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", f.read(2))
            name = f.read(nlen).decode("utf-8")
            (ndim,) = struct.unpack("<B", f.read(1))
            shape = tuple(struct.unpack("<I", f.read(4))[0] for _ in range(ndim))
            size = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(f.read(4 * size), dtype="<f4").reshape(shape).copy()
            if name.startswith("opt."):
                pname, slot = name[len("opt."):].rsplit(".", 1)
                st = params.opt_state.setdefault(pname, {})
                st[slot] = int(arr.reshape(-1)[0]) if slot == "t" else arr
            elif name.startswith("extra."):
                extra[name[len("extra."):]] = arr
            else:
                params.tensors[name] = arr
    return params, extra
