"""Command-line entry point.

Subcommands: gen-graph, embed, train, train-goofspiel, eval, best-response.
Configuration is flat ``key = value`` text with section prefixes (br., avg.,
hla., env., goof.); any key can also be set on the command line with
``--set key=value`` and flags win over the file.  Exit codes: 0 ok, 1 usage
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import nn
from .avg_policy import AvgConfig, AvgLearner
from .br_policy import BrConfig
from .embed import (WalkParams, generate_walks, load_embeddings,
                    save_embeddings, train_embeddings)
from .evaluation import (PolicyHandle, evaluate, exact_best_response_nsg,
                         greedy_handle, train_br_attacker, uniform_handle)
from .goofspiel import GoofConfig, Mode
from .graph import GridGenParams, generate_grid, load_edge_list, save_edge_list
from .hla import HlaConfig
from .networks import NsgPairNet, NsgStateEncoder
from .nfsp import NfspConfig, train, train_goofspiel
from .nsg_env import NsgConfig, load_scenario

__all__ = ["main"]


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config schema and parsing
# ---------------------------------------------------------------------------


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("true", "1", "yes"):
        return True
    if v in ("false", "0", "no"):
        return False
    raise UsageError(f"not a boolean: {s!r}")


def _ints(s: str) -> tuple:
    return tuple(int(x) for x in s.split(","))


SCHEMA = {
    "seed": int, "episodes": int, "eta": float,
    "eval_every": int, "eval_episodes": int, "checkpoint_every": int,
    "use_hla": _bool, "defender_net": str, "embeddings": str,
    "env.graph": str, "env.horizon": int, "env.resources": int,
    "env.sources": _ints, "env.targets": _ints, "env.defender_init": str,
    "br.gamma": float, "br.learning_rate": float, "br.optimizer": str,
    "br.clip_norm": float, "br.batch_size": int, "br.update_every": int,
    "br.target_sync_every": int, "br.replay_capacity": int,
    "br.eps_start": float, "br.eps_end": float, "br.eps_anneal_episodes": int,
    "avg.learning_rate": float, "avg.clip_norm": float, "avg.batch_size": int,
    "avg.update_every": int, "avg.reservoir_capacity": int,
    "hla.window": int, "hla.flush_every": int, "hla.explore_prob": float,
    "goof.k": int, "goof.n": int, "goof.mode": str, "goof.style": str,
}


def parse_config_text(text: str, source: str = "<config>") -> dict:
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise UsageError(f"{source}:{lineno}: unknown config key {key!r}")
        try:
            cfg[key] = SCHEMA[key](value)
        except UsageError:
            raise
        except ValueError as e:
            raise UsageError(f"{source}:{lineno}: bad value for {key}: {e}") from e
    return cfg


def load_config(path: str | None, overrides: list, flags: dict) -> dict:
    cfg: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as f:
            cfg.update(parse_config_text(f.read(), source=path))
    for item in overrides or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        cfg.update(parse_config_text(item, source="--set"))
    for key, value in flags.items():
        if value is not None:
            cfg[key] = value
    return cfg


def _sub(cfg: dict, prefix: str) -> dict:
    n = len(prefix)
    return {k[n:]: v for k, v in cfg.items() if k.startswith(prefix)}


def build_nfsp_config(cfg: dict) -> NfspConfig:
    if "episodes" not in cfg:
        raise UsageError("missing required key: episodes")
    kw = {k: cfg[k] for k in ("seed", "eta", "eval_every", "eval_episodes",
                              "checkpoint_every", "use_hla", "defender_net")
          if k in cfg}
    return NfspConfig(episodes=cfg["episodes"],
                      br=BrConfig(**_sub(cfg, "br.")),
                      avg=AvgConfig(**_sub(cfg, "avg.")),
                      hla=HlaConfig(**_sub(cfg, "hla.")),
                      **kw)


def build_nsg_config(cfg: dict, base_dir: str = ".") -> NsgConfig:
    for key in ("env.graph", "env.horizon", "env.resources", "env.sources",
                "env.targets"):
        if key not in cfg:
            raise UsageError(f"missing required key: {key}")
    gpath = cfg["env.graph"]
    if not os.path.isabs(gpath):
        gpath = os.path.join(base_dir, gpath)
    init_s = cfg.get("env.defender_init", "uniform")
    init = None if init_s == "uniform" else _ints(init_s)
    return NsgConfig(graph=load_edge_list(gpath), horizon=cfg["env.horizon"],
                     num_resources=cfg["env.resources"],
                     sources=cfg["env.sources"], targets=cfg["env.targets"],
                     defender_init=init)


def _resolve_run_dir(args) -> str:
    root = os.environ.get("NSG_RUN_DIR")
    run = args.run_dir or "run"
    if root and not os.path.isabs(run):
        return os.path.join(root, run)
    return run


def _load_embeddings_for(cfg: dict, nsg_cfg: NsgConfig, base_dir: str) -> np.ndarray:
    if "embeddings" not in cfg:
        raise UsageError("missing required key: embeddings")
    path = cfg["embeddings"]
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    table = load_embeddings(path)
    if table.vectors.shape[0] != nsg_cfg.graph.node_count:
        raise ValueError(
            f"embedding table covers {table.vectors.shape[0]} nodes but the "
            f"graph has {nsg_cfg.graph.node_count}")
    return table.vectors


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen_graph(args) -> int:
    try:
        params = GridGenParams(rows=args.rows, cols=args.cols, p_hv=args.p_hv,
                               p_diag=args.p_diag, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    g = generate_grid(params)
    save_edge_list(g, args.output)
    print(f"wrote {args.output}: {g.node_count} nodes, {sum(1 for _ in g.edges())} edges")
    return 0


def cmd_embed(args) -> int:
    g = load_edge_list(args.graph)
    try:
        params = WalkParams(p=args.p, q=args.q, walk_length=args.walk_length,
                            walks_per_node=args.walks_per_node, window=args.window,
                            negatives=args.negatives, dim=args.dim,
                            epochs=args.epochs, learning_rate=args.lr, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from e
    walks = generate_walks(g, params)
    table = train_embeddings(walks, g.node_count, params)
    save_embeddings(table, args.output)
    print(f"wrote {args.output}: {g.node_count} x {args.dim}")
    return 0


def cmd_train(args) -> int:
    cfg = load_config(args.config, args.set, {"episodes": args.episodes,
                                              "seed": args.seed})
    base = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    nsg_cfg = build_nsg_config(cfg, base)
    nfsp_cfg = build_nfsp_config(cfg)
    embed = _load_embeddings_for(cfg, nsg_cfg, base)
    run_dir = _resolve_run_dir(args)
    result = train(nfsp_cfg, nsg_cfg, embed, run_dir=run_dir,
                   resume=args.resume, log_every=args.log_every)
    print(f"trained {result.episodes} episodes; artifacts in {run_dir}")
    return 0


def cmd_train_goofspiel(args) -> int:
    cfg = load_config(args.config, args.set, {"episodes": args.episodes,
                                              "seed": args.seed})
    for key in ("goof.k", "goof.n", "goof.mode"):
        if key not in cfg:
            raise UsageError(f"missing required key: {key}")
    goof_cfg = GoofConfig(k=cfg["goof.k"], n=cfg["goof.n"],
                          mode=Mode(cfg["goof.mode"]))
    nfsp_cfg = build_nfsp_config(cfg)
    run_dir = _resolve_run_dir(args)
    style = cfg.get("goof.style", "pairwise")
    train_goofspiel(nfsp_cfg, goof_cfg, style=style, run_dir=run_dir,
                    log_every=args.log_every)
    print(f"trained {nfsp_cfg.episodes} episodes; artifacts in {run_dir}")
    return 0


def _defender_handle(spec: str, cfg: dict, nsg_cfg: NsgConfig, base: str) -> PolicyHandle:
    if spec == "uniform":
        return uniform_handle()
    if spec == "greedy":
        return greedy_handle(nsg_cfg)
    if spec.startswith("ckpt:"):
        embed = _load_embeddings_for(cfg, nsg_cfg, base)
        m = nsg_cfg.num_resources
        net = NsgPairNet(embed, nsg_cfg.horizon + 1, m, m,
                         np.random.default_rng(0))
        params, _ = nn.load_checkpoint(spec[5:])
        for name in net.params.names():
            if name not in params or params[name].shape != net.params[name].shape:
                raise ValueError(f"checkpoint incompatible with scenario: tensor {name}")
        net.params = params
        learner = AvgLearner(net, AvgConfig())
        encoder = NsgStateEncoder(nsg_cfg.horizon + 1, m)

        def fn(state, legal):
            enc = encoder.encode(state.attacker_history, state.defender_locations)
            return learner.action_distribution(enc, np.asarray(legal, dtype=np.int64))

        return PolicyHandle("AvgNet", fn)
    raise UsageError(f"unknown defender spec {spec!r} (uniform | greedy | ckpt:PATH)")


def cmd_eval(args) -> int:
    cfg = load_config(args.config, args.set, {"seed": args.seed})
    base = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    nsg_cfg = build_nsg_config(cfg, base)
    defender = _defender_handle(args.defender, cfg, nsg_cfg, base)
    attacker = uniform_handle()
    report = evaluate(defender, attacker, nsg_cfg, args.episodes,
                      cfg.get("seed", 0))
    print(f"defender utility: {report.mean:.6f} ± {report.ci95:.6f} "
          f"over {report.n} episodes")
    print(f"outcomes: {report.outcome_counts}")
    if args.csv:
        with open(args.csv, "a", encoding="utf-8", newline="\n") as f:
            f.write(report.csv_row(0, f"{defender.tag}_vs_uniform") + "\n")
    return 0


def cmd_best_response(args) -> int:
    cfg = load_config(args.config, args.set, {"seed": args.seed})
    base = os.path.dirname(os.path.abspath(args.config)) if args.config else "."
    nsg_cfg = build_nsg_config(cfg, base)
    defender = _defender_handle(args.defender, cfg, nsg_cfg, base)
    seed = cfg.get("seed", 0)
    if args.exact:
        value, _ = exact_best_response_nsg(defender, nsg_cfg, cap=args.cap)
        print(f"exact attacker BR value: {value:.6f}")
        print(f"defender worst-case utility: {1.0 - value:.6f}")
        return 0
    embed = _load_embeddings_for(cfg, nsg_cfg, base)
    _, report, _ = train_br_attacker(defender, nsg_cfg, embed, seed,
                                     budget=args.budget,
                                     log_every=args.log_every)
    print(f"approximate worst-case defender utility: "
          f"{report.mean:.6f} ± {report.ci95:.6f} over {report.n} episodes")
    print(f"outcomes: {report.outcome_counts}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsgsolver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a random grid graph")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--p-hv", type=float, default=0.4)
    p.add_argument("--p-diag", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("embed", help="train node embeddings")
    p.add_argument("-g", "--graph", required=True)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--walk-length", type=int, default=80)
    p.add_argument("--walks-per-node", type=int, default=10)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.025)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_embed)

    for name, fn in (("train", cmd_train), ("train-goofspiel", cmd_train_goofspiel)):
        p = sub.add_parser(name, help=f"run {name.replace('-', ' ')}")
        p.add_argument("-c", "--config")
        p.add_argument("--episodes", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--run-dir")
        p.add_argument("--resume")
        p.add_argument("--log-every", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE")
        p.set_defaults(func=fn)

    p = sub.add_parser("eval", help="evaluate a defender policy")
    p.add_argument("-c", "--config")
    p.add_argument("--defender", default="uniform")
    p.add_argument("--episodes", type=int, default=2000)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("best-response", help="best-respond to a defender policy")
    p.add_argument("-c", "--config")
    p.add_argument("--defender", default="uniform")
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--cap", type=int, default=500_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--log-every", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_best_response)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
