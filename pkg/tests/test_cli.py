import os

import numpy as np
import pytest

from nsgsolver.cli import main, parse_config_text, UsageError
from nsgsolver.embed import load_embeddings


SCENARIO = """\
env.graph = g.txt
env.horizon = 4
env.resources = 1
env.sources = 3
env.targets = 0,8
env.defender_init = 4
embeddings = g.emb
episodes = 120
seed = 3
eval_every = 60
eval_episodes = 20
checkpoint_every = 60
br.replay_capacity = 2000
br.batch_size = 16
avg.reservoir_capacity = 2000
avg.batch_size = 16
hla.window = 100
hla.flush_every = 50
"""


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["gen-graph", "--rows", "3", "--cols", "3", "--p-hv", "1.0",
                 "--p-diag", "0.5", "--seed", "7", "-o", "g.txt"]) == 0
    assert main(["embed", "-g", "g.txt", "--dim", "8", "--epochs", "1",
                 "--walk-length", "10", "--walks-per-node", "2",
                 "-o", "g.emb"]) == 0
    (tmp_path / "scen.cfg").write_text(SCENARIO)
    return tmp_path


class TestConfigParsing:
    def test_unknown_key_rejected(self):
        with pytest.raises(UsageError, match="unknown config key"):
            parse_config_text("episodes = 5\nbogus = 1\n")

    def test_types_and_comments(self):
        cfg = parse_config_text("# comment\nepisodes = 5\n\nbr.eps_start = 0.2\n"
                                "env.sources = 1,2,3\nuse_hla = false\n")
        assert cfg == {"episodes": 5, "br.eps_start": 0.2,
                       "env.sources": (1, 2, 3), "use_hla": False}

    def test_bad_value_reports_line(self):
        with pytest.raises(UsageError, match=":2:"):
            parse_config_text("episodes = 5\nbr.batch_size = many\n")


class TestGenGraphEmbed:
    def test_deterministic(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        args = ["gen-graph", "--rows", "4", "--cols", "4", "--p-hv", "0.5",
                "--p-diag", "0.1", "--seed", "9"]
        assert main(args + ["-o", "a.txt"]) == 0
        assert main(args + ["-o", "b.txt"]) == 0
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()

    def test_bad_probability_is_usage_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.chdir(tmp_path)
        assert main(["gen-graph", "--rows", "3", "--cols", "3", "--p-hv", "1.5",
                     "-o", "x.txt"]) == 1

    def test_embed_dim(self, workdir):
        table = load_embeddings(workdir / "g.emb")
        assert table.vectors.shape == (9, 8)

    def test_embed_dim_zero_rejected(self, workdir):
        assert main(["embed", "-g", "g.txt", "--dim", "0", "-o", "z.emb"]) == 1

    def test_missing_graph_is_runtime_error(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["embed", "-g", "nope.txt", "-o", "z.emb"]) == 2


class TestTrainEvalCli:
    def test_train_writes_run_dir(self, workdir):
        assert main(["train", "-c", "scen.cfg", "--run-dir", "run1"]) == 0
        assert (workdir / "run1" / "curve.csv").exists()
        assert (workdir / "run1" / "ckpt_120.nsgn").exists()
        lines = (workdir / "run1" / "curve.csv").read_text().splitlines()
        assert lines[0] == "episode,metric,value,ci95"
        assert len(lines) == 3

    def test_episodes_zero_empty_curve(self, workdir):
        assert main(["train", "-c", "scen.cfg", "--episodes", "0",
                     "--run-dir", "run0"]) == 0
        assert (workdir / "run0" / "curve.csv").read_text() == \
            "episode,metric,value,ci95\n"

    def test_flag_overrides_config(self, workdir):
        assert main(["train", "-c", "scen.cfg", "--episodes", "60",
                     "--run-dir", "runf"]) == 0
        assert not (workdir / "runf" / "ckpt_120.nsgn").exists()
        assert (workdir / "runf" / "ckpt_60.nsgn").exists()

    def test_set_overrides_config(self, workdir):
        assert main(["train", "-c", "scen.cfg", "--run-dir", "runs",
                     "--set", "episodes = 60"]) == 0
        assert (workdir / "runs" / "ckpt_60.nsgn").exists()

    def test_resume_bitwise_equal(self, workdir):
        assert main(["train", "-c", "scen.cfg", "--run-dir", "full"]) == 0
        assert main(["train", "-c", "scen.cfg", "--episodes", "60",
                     "--run-dir", "split"]) == 0
        assert main(["train", "-c", "scen.cfg", "--run-dir", "split",
                     "--resume", "split/state_60.pkl"]) == 0
        for name in ("curve.csv", "ckpt_120.nsgn"):
            assert (workdir / "full" / name).read_bytes() == \
                (workdir / "split" / name).read_bytes()

    def test_nsg_run_dir_env(self, workdir, monkeypatch):
        monkeypatch.setenv("NSG_RUN_DIR", str(workdir / "root"))
        assert main(["train", "-c", "scen.cfg", "--episodes", "60",
                     "--run-dir", "sub"]) == 0
        assert (workdir / "root" / "sub" / "curve.csv").exists()

    def test_eval_checkpoint(self, workdir, capsys):
        assert main(["train", "-c", "scen.cfg", "--episodes", "60",
                     "--run-dir", "r"]) == 0
        assert main(["eval", "-c", "scen.cfg",
                     "--defender", "ckpt:r/ckpt_60.nsgn",
                     "--episodes", "40"]) == 0
        out = capsys.readouterr().out
        assert "defender utility:" in out

    def test_eval_uniform_matches_hand_value(self, workdir, capsys):
        # triangle scenario computed by hand elsewhere needs its own config
        (workdir / "tri.txt").write_text("3\n0 1\n1 2\n0 2\n")
        (workdir / "tri.cfg").write_text(
            "env.graph = tri.txt\nenv.horizon = 2\nenv.resources = 1\n"
            "env.sources = 0\nenv.targets = 2\nenv.defender_init = 1\n")
        assert main(["eval", "-c", "tri.cfg", "--defender", "uniform",
                     "--episodes", "2000", "--set", "seed=5"]) == 0
        out = capsys.readouterr().out
        mean = float(out.split("defender utility: ")[1].split(" ")[0])
        assert abs(mean - 0.5625) < 0.04

    def test_eval_missing_checkpoint(self, workdir):
        assert main(["eval", "-c", "scen.cfg", "--defender", "ckpt:nope.nsgn",
                     "--episodes", "10"]) == 2

    def test_incompatible_checkpoint(self, workdir):
        assert main(["train", "-c", "scen.cfg", "--episodes", "60",
                     "--run-dir", "r2"]) == 0
        # same checkpoint against a two-resource scenario: shape mismatch
        cfg2 = SCENARIO.replace("env.resources = 1", "env.resources = 2") \
                       .replace("env.defender_init = 4", "env.defender_init = 4,4")
        (workdir / "scen2.cfg").write_text(cfg2)
        assert main(["eval", "-c", "scen2.cfg",
                     "--defender", "ckpt:r2/ckpt_60.nsgn",
                     "--episodes", "10"]) == 2

    def test_exact_best_response(self, workdir, capsys):
        assert main(["best-response", "-c", "scen.cfg", "--defender", "greedy",
                     "--exact", "--cap", "2000000"]) == 0
        out = capsys.readouterr().out
        assert "defender worst-case utility:" in out

    def test_train_goofspiel(self, workdir):
        (workdir / "goof.cfg").write_text(
            "goof.k = 3\ngoof.n = 1\ngoof.mode = max\nepisodes = 200\n"
            "seed = 1\neval_every = 200\ncheckpoint_every = 200\n"
            "br.replay_capacity = 2000\nbr.batch_size = 16\n"
            "avg.reservoir_capacity = 2000\navg.batch_size = 16\n")
        assert main(["train-goofspiel", "-c", "goof.cfg",
                     "--run-dir", "goofrun"]) == 0
        lines = (workdir / "goofrun" / "curve.csv").read_text().splitlines()
        assert lines[1].startswith("200,team_exploitability,")

    def test_usage_exit_code(self):
        assert main(["train", "-c", "does-not-exist.cfg"]) == 2
        assert main(["no-such-command"]) == 1
