#!/usr/bin/env python3
"""Run the desk-scale benchmark experiments and cache results as JSON.

Stages (all idempotent; completed runs and result files are skipped):

  grid-train   NFSP self-play on the 7x7 corner-gate scenario: the main run
               (seed 0, 1e6 episodes) plus 5e5-episode runs for two more
               seeds and for the two ablations (low-level attacker instead
               of HLA, max-action vanilla net instead of the pairwise net).
  grid-eval    Approximate worst-case defender utilities: a DQN attacker is
               trained to best respond to each defender (trained / uniform /
               greedy), then the best attacker checkpoint plays 2000 final
               episodes.  Writes crit9.json and crit10.json.
  goofspiel    Team-Goofspiel k=4 n=2, both bid-aggregation modes, pairwise
               vs vanilla networks, 3 seeds each; exact exploitability of
               the learned team policy.  Writes crit8.json.

The JSON files under benchmarks/results/ are what tests/test_acceptance.py
reads for the long-running criteria.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / "src"))

from nsgsolver import nfsp
from nsgsolver.cli import (_defender_handle, _load_embeddings_for,
                           build_nsg_config, load_config)
from nsgsolver.evaluation import (exact_best_response_goofspiel,
                                  train_br_attacker)
from nsgsolver.goofspiel import GoofConfig, Mode

SCEN_DIR = HERE / "grid7"
RUNS_DIR = SCEN_DIR / "runs"
RESULTS_DIR = HERE / "results"

MAIN_EPISODES = 1_000_000      # criterion-scale main run (seed 0)
ABLATION_EPISODES = 500_000    # per-seed budget for ablation comparisons
MAIN_BR_BUDGET = 200_000       # DQN-attacker budget for the main evaluation
ABLATION_BR_BUDGET = 50_000    # reduced, but identical across ablation arms
GOOF_EPISODES = 100_000
SEEDS = (0, 1, 2)


def log(msg):
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", flush=True)


def scenario():
    cfg = load_config(str(SCEN_DIR / "scenario.cfg"), [], {})
    nsg_cfg = build_nsg_config(cfg, str(SCEN_DIR))
    embed = _load_embeddings_for(cfg, nsg_cfg, str(SCEN_DIR))
    return cfg, nsg_cfg, embed


def train_grid_run(tag, episodes, seed, nsg_cfg, embed, use_hla=True,
                   defender_net="pairwise", checkpoint_every=250_000):
    run_dir = RUNS_DIR / tag
    done = run_dir / f"ckpt_{episodes}.nsgn"
    if done.exists():
        log(f"{tag}: already trained")
        return run_dir
    log(f"{tag}: training {episodes} episodes (seed {seed})")
    cfg = nfsp.NfspConfig(episodes=episodes, seed=seed,
                          eval_every=50_000, eval_episodes=2000,
                          checkpoint_every=checkpoint_every,
                          use_hla=use_hla, defender_net=defender_net)
    t0 = time.time()
    nfsp.train(cfg, nsg_cfg, embed, run_dir=str(run_dir), log_every=50_000)
    for p in run_dir.glob("state_*.pkl"):  # resume snapshots, large
        p.unlink()
    seconds = round(time.time() - t0, 1)
    (run_dir / "train_meta.json").write_text(json.dumps(
        {"tag": tag, "episodes": episodes, "seed": seed, "use_hla": use_hla,
         "defender_net": defender_net, "seconds": seconds}) + "\n")
    log(f"{tag}: done in {seconds:.0f}s")
    return run_dir


def worst_case(defender_spec, cfg, nsg_cfg, embed, budget, seed):
    """Approximate worst-case utility of a defender (uniform|greedy|ckpt:...)."""
    defender = _defender_handle(defender_spec, cfg, nsg_cfg, str(SCEN_DIR))
    t0 = time.time()
    _, report, _ = train_br_attacker(defender, nsg_cfg, embed, seed,
                                     budget=budget, log_every=None)
    return {"mean": report.mean, "ci95": report.ci95, "n": report.n,
            "outcomes": report.outcome_counts,
            "br_budget": budget, "br_seed": seed,
            "seconds": round(time.time() - t0, 1)}


def stage_grid_train():
    _, nsg_cfg, embed = scenario()
    train_grid_run("full_seed0", MAIN_EPISODES, 0, nsg_cfg, embed,
                   checkpoint_every=ABLATION_EPISODES)
    for seed in SEEDS[1:]:
        train_grid_run(f"full_seed{seed}", ABLATION_EPISODES, seed,
                       nsg_cfg, embed)
    for seed in SEEDS:
        train_grid_run(f"no_hla_seed{seed}", ABLATION_EPISODES, seed,
                       nsg_cfg, embed, use_hla=False)
    for seed in SEEDS:
        train_grid_run(f"vanilla_seed{seed}", ABLATION_EPISODES, seed,
                       nsg_cfg, embed, defender_net="vanilla")


def stage_grid_eval():
    cfg, nsg_cfg, embed = scenario()
    crit9_path = RESULTS_DIR / "crit9.json"
    if not crit9_path.exists():
        t0 = time.time()
        ckpt = RUNS_DIR / "full_seed0" / f"ckpt_{MAIN_EPISODES}.nsgn"
        out = {"scenario": "grid7", "episodes": MAIN_EPISODES}
        log("crit9: evaluating trained defender")
        out["trained"] = worst_case(f"ckpt:{ckpt}", cfg, nsg_cfg, embed,
                                    MAIN_BR_BUDGET, seed=101)
        log(f"crit9: trained = {out['trained']['mean']:.3f}")
        log("crit9: evaluating uniform defender")
        out["uniform"] = worst_case("uniform", cfg, nsg_cfg, embed,
                                    MAIN_BR_BUDGET, seed=102)
        log(f"crit9: uniform = {out['uniform']['mean']:.3f}")
        log("crit9: evaluating greedy defender")
        out["greedy"] = worst_case("greedy", cfg, nsg_cfg, embed,
                                   MAIN_BR_BUDGET, seed=103)
        log(f"crit9: greedy = {out['greedy']['mean']:.3f}")
        run0 = RUNS_DIR / "full_seed0"
        out["curve"] = (run0 / "curve.csv").read_text().splitlines()[-5:]
        meta = json.loads((run0 / "train_meta.json").read_text())
        out["train_seconds"] = meta["seconds"]
        out["eval_seconds"] = round(time.time() - t0, 1)
        out["total_seconds"] = round(meta["seconds"] + out["eval_seconds"], 1)
        crit9_path.write_text(json.dumps(out, indent=2) + "\n")
        log(f"crit9.json written ({out['eval_seconds']}s)")
    else:
        log("crit9.json exists, skipping")

    crit10_path = RESULTS_DIR / "crit10.json"
    if not crit10_path.exists():
        t0 = time.time()
        out = {"scenario": "grid7", "episodes": ABLATION_EPISODES,
               "arms": {}}
        for arm in ("full", "no_hla", "vanilla"):
            vals = []
            for seed in SEEDS:
                ckpt = (RUNS_DIR / f"{arm}_seed{seed}" /
                        f"ckpt_{ABLATION_EPISODES}.nsgn")
                log(f"crit10: evaluating {arm} seed {seed}")
                rec = worst_case(f"ckpt:{ckpt}", cfg, nsg_cfg, embed,
                                 ABLATION_BR_BUDGET, seed=200 + seed)
                log(f"crit10: {arm} seed {seed} = {rec['mean']:.3f}")
                vals.append(rec)
            out["arms"][arm] = vals
        out["eval_seconds"] = round(time.time() - t0, 1)
        crit10_path.write_text(json.dumps(out, indent=2) + "\n")
        log(f"crit10.json written ({out['eval_seconds']}s)")
    else:
        log("crit10.json exists, skipping")


def goof_exploitability(team, goof_cfg):
    """Exact single-player BR value against the team's average policy."""
    value, _ = exact_best_response_goofspiel(team.policy_fn(), goof_cfg,
                                             "single")
    return value


def stage_goofspiel():
    path = RESULTS_DIR / "crit8.json"
    if path.exists():
        log("crit8.json exists, skipping")
        return
    t0 = time.time()
    out = {"k": 4, "n": 2, "episodes": GOOF_EPISODES, "modes": {}}
    for mode in (Mode.MAX, Mode.AVERAGE):
        goof_cfg = GoofConfig(k=4, n=2, mode=mode)
        uniform_expl, _ = exact_best_response_goofspiel(
            lambda st, legal: np.full(len(legal), 1.0 / len(legal)),
            goof_cfg, "single")
        rec = {"uniform": uniform_expl, "pairwise": [], "vanilla": []}
        for style in ("pairwise", "vanilla"):
            for seed in SEEDS:
                log(f"crit8: {mode.value} {style} seed {seed}")
                cfg = nfsp.NfspConfig(episodes=GOOF_EPISODES, seed=seed,
                                      eval_every=GOOF_EPISODES,
                                      checkpoint_every=GOOF_EPISODES)
                team, _, _ = nfsp.train_goofspiel(cfg, goof_cfg, style=style,
                                                  eval_exact=False)
                expl = goof_exploitability(team, goof_cfg)
                log(f"crit8: {mode.value} {style} seed {seed} "
                    f"expl = {expl:.3f}")
                rec[style].append(expl)
        out["modes"][mode.value] = rec
    out["seconds"] = round(time.time() - t0, 1)
    path.write_text(json.dumps(out, indent=2) + "\n")
    log(f"crit8.json written ({out['seconds']}s)")


STAGES = {"goofspiel": stage_goofspiel, "grid-train": stage_grid_train,
          "grid-eval": stage_grid_eval}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--stage", choices=["all", *STAGES], default="all")
    args = ap.parse_args()
    RESULTS_DIR.mkdir(exist_ok=True)
    RUNS_DIR.mkdir(exist_ok=True)
    t0 = time.time()
    names = list(STAGES) if args.stage == "all" else [args.stage]
    for name in names:
        log(f"=== stage {name} ===")
        STAGES[name]()
    log(f"all done in {time.time() - t0:.0f}s")


if __name__ == "__main__":
    main()
