import io
import os

import numpy as np
import pytest

from pinyintypo.checkpoint import load_checkpoint
from pinyintypo.cli import main
from pinyintypo.keystrokes import load_transition_model
from pinyintypo.noise import load_corpus


def run(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture()
def tiny_lexicon_file(workdir):
    path = workdir / "lex.txt"
    path.write_text("ni\nhao\nma\nzao\nshang\nda\nhua\ngei\n")
    return str(path)


def gen_args(tiny_lexicon_file, n=60, seed=7, extra=()):
    return [
        "gen-data",
        "--lexicon_path", tiny_lexicon_file,
        "--corpus_dir", "data",
        "--n_samples", str(n),
        "--seed", str(seed),
        *extra,
    ]


def test_gen_data_writes_all_outputs(workdir, tiny_lexicon_file, capsys):
    code, out, err = run(gen_args(tiny_lexicon_file), capsys)
    assert code == 0, err
    for name in ("train.tsv", "dev.tsv", "test.tsv", "keystrokes.tsv", "transitions.ptmodel"):
        assert (workdir / "data" / name).exists(), name
    train = load_corpus(workdir / "data" / "train.tsv")
    dev = load_corpus(workdir / "data" / "dev.tsv")
    test = load_corpus(workdir / "data" / "test.tsv")
    total = len(train) + len(dev) + len(test)
    assert total == 60
    assert abs(len(train) / total - 0.85) <= 0.01
    assert abs(len(dev) / total - 0.05) <= 0.01
    assert abs(len(test) / total - 0.10) <= 0.01
    assert "type distribution" in out


def test_gen_data_deterministic(workdir, tiny_lexicon_file, capsys):
    run(gen_args(tiny_lexicon_file, extra=("--corpus_dir", "a")), capsys)
    run(gen_args(tiny_lexicon_file, extra=("--corpus_dir", "b")), capsys)
    for name in ("train.tsv", "dev.tsv", "test.tsv", "keystrokes.tsv", "transitions.ptmodel"):
        assert (workdir / "a" / name).read_bytes() == (workdir / "b" / name).read_bytes()


def test_estimate_pt_round_trip(workdir, tiny_lexicon_file, capsys):
    code, _, err = run(gen_args(tiny_lexicon_file, n=300), capsys)
    assert code == 0, err
    code, _, err = run(
        ["estimate-pt", "data/keystrokes.tsv", "estimated.ptmodel"], capsys
    )
    assert code == 0, err
    model = load_transition_model("estimated.ptmodel")
    assert np.allclose(model.p.sum(axis=1), 1.0, atol=1e-12)


def test_estimate_pt_error_free_log_gives_identity(workdir, capsys):
    (workdir / "keys.tsv").write_text("a\ta\nb\tb\n")
    code, _, _ = run(["estimate-pt", "keys.tsv", "out.ptmodel"], capsys)
    assert code == 0
    assert (load_transition_model("out.ptmodel").p == np.eye(26)).all()


def test_estimate_pt_missing_file(workdir, capsys):
    code, out, err = run(["estimate-pt", "nope.tsv", "out.ptmodel"], capsys)
    assert code == 1
    assert "nope.tsv" in err


def config_file(workdir, tiny_lexicon_file, **kv):
    lines = [f"lexicon_path = {tiny_lexicon_file}", "corpus_dir = data"]
    lines += [f"{k} = {v}" for k, v in kv.items()]
    path = workdir / "run.cfg"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


TRAIN_KV = dict(
    embed_dim=12, hidden_dim=12, attention_dim=12, iterations=150,
    batch_size=8, learning_rate=0.003, checkpoint_path="model.ckpt",
    train_log_path="train.log.tsv", k_best=3, max_decode_length=8, seed=3,
)


@pytest.fixture()
def trained_model(workdir, tiny_lexicon_file, capsys):
    run(gen_args(tiny_lexicon_file, n=40, seed=3), capsys)
    cfg = config_file(workdir, tiny_lexicon_file, **TRAIN_KV)
    code, _, err = run(["train", "--config", cfg], capsys)
    assert code == 0, err
    return cfg


def test_train_writes_checkpoint_and_log(workdir, trained_model):
    assert (workdir / "model.ckpt").exists()
    log = (workdir / "train.log.tsv").read_text().splitlines()
    assert len(log) == 150
    first = log[0].split("\t")
    assert len(first) == 4 and first[0] == "1"


def test_train_zero_iterations(workdir, tiny_lexicon_file, capsys):
    run(gen_args(tiny_lexicon_file, n=40, seed=3), capsys)
    cfg = config_file(workdir, tiny_lexicon_file, **{**TRAIN_KV, "iterations": 0})
    code, _, err = run(["train", "--config", cfg], capsys)
    assert code == 0, err
    params, config = load_checkpoint("model.ckpt")
    assert config.hidden_dim == 12


def test_eval_reports_table(workdir, trained_model, capsys):
    code, out, err = run(["eval", "--config", trained_model, "--report_path", "report.tsv"], capsys)
    assert code == 0, err
    assert "W-Acc" in out
    assert (workdir / "report.tsv").read_text().startswith("type\t")


def test_eval_sweep(workdir, trained_model, capsys):
    code, out, err = run(
        ["eval", "--config", trained_model, "--sweep_k_max", "3", "--sweep_path", "sweep.tsv"],
        capsys,
    )
    assert code == 0, err
    assert "chose K=" in out
    lines = (workdir / "sweep.tsv").read_text().splitlines()
    assert lines[0] == "k\tw_acc" and len(lines) == 4


def test_correct_stdin(workdir, trained_model, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("nihao\n\nbad1input\nma\n"))
    code, out, err = run(["correct", "model.ckpt", "--config", trained_model], capsys)
    assert code == 0
    lines = [l.split("\t") for l in out.strip().splitlines()]
    sources = {l[0] for l in lines}
    assert sources == {"nihao", "ma"}  # empty line skipped, bad one reported
    assert "bad1input" in err
    by_source = [l for l in lines if l[0] == "nihao"]
    assert [int(l[1]) for l in by_source] == list(range(1, len(by_source) + 1))
    scores = [float(l[2]) for l in by_source]
    assert scores == sorted(scores, reverse=True)


def test_correct_from_file(workdir, trained_model, capsys):
    (workdir / "inputs.txt").write_text("nihao\n")
    code, out, _ = run(["correct", "model.ckpt", "inputs.txt", "--config", trained_model], capsys)
    assert code == 0
    assert out.startswith("nihao\t1\t")


def test_repl_session(workdir, trained_model, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("nihao\nx\n1\n:quit\n"))
    # input() reads from stdin; prompts go to stdout
    code, out, err = run(
        ["repl", "model.ckpt", "--config", trained_model, "--transcript", "trans.tsv"],
        capsys,
    )
    assert code == 0
    assert "1." in out
    transcript = (workdir / "trans.tsv").read_text().splitlines()
    assert len(transcript) == 1
    src, tgt, label = transcript[0].split("\t")
    assert src == "nihao"
    # the transcript must round-trip through the corpus loader
    assert load_corpus(workdir / "trans.tsv")[0].source == "nihao"


def test_gradcheck_cli(workdir, capsys):
    code, out, _ = run(["gradcheck"], capsys)
    assert code == 0
    assert "PASS" in out
    assert "max relative error" in out


def test_unknown_config_keys_enumerated(workdir, tiny_lexicon_file, capsys):
    path = workdir / "bad.cfg"
    path.write_text("nope = 1\nalso_bad = x\nhidden_dim = oops\n")
    code, out, err = run(["train", "--config", str(path)], capsys)
    assert code == 1
    assert "nope" in err and "also_bad" in err and "hidden_dim" in err


def test_unknown_flag_is_usage_error(workdir, capsys):
    code, _, err = run(["train", "--not_a_flag", "3"], capsys)
    assert code == 1


def test_missing_corpus_is_config_error(workdir, tiny_lexicon_file, capsys):
    cfg = config_file(workdir, tiny_lexicon_file)
    code, _, err = run(["train", "--config", cfg], capsys)
    assert code == 1
    assert "missing input file" in err


def test_flag_overrides_config_file(workdir, tiny_lexicon_file, capsys):
    run(gen_args(tiny_lexicon_file, n=40, seed=3), capsys)
    cfg = config_file(workdir, tiny_lexicon_file, **{**TRAIN_KV, "iterations": 1})
    code, _, err = run(
        ["train", "--config", cfg, "--iterations", "3", "--train_log_path", "o.tsv"],
        capsys,
    )
    assert code == 0, err
    assert len((workdir / "o.tsv").read_text().splitlines()) == 3


def test_missing_config_file_is_usage_error(workdir, capsys):
    code, _, err = run(["eval", "--config", "missing.cfg"], capsys)
    assert code == 1
    assert "config" in err


def test_eval_topk_non_decreasing_in_k(workdir, trained_model, capsys):
    accs = {}
    for k in (1, 10):
        code, _, err = run(
            ["eval", "--config", trained_model, "--k_best", str(k), "--report_path", f"r{k}.tsv"],
            capsys,
        )
        assert code == 0, err
        rows = [l.split("\t") for l in (workdir / f"r{k}.tsv").read_text().splitlines()[1:]]
        accs[k] = {r[0]: float(r[4]) for r in rows}
    for name, acc in accs[10].items():
        assert acc >= accs[1].get(name, 0.0) - 1e-9


def test_correct_overfit_model_rank1(workdir, tiny_lexicon_file, capsys, monkeypatch):
    run(gen_args(tiny_lexicon_file, n=24, seed=5, extra=("--sentence_len_max", "3")), capsys)
    cfg = config_file(
        workdir, tiny_lexicon_file,
        **{**TRAIN_KV, "iterations": 600, "batch_size": 8, "seed": 5},
    )
    code, _, err = run(["train", "--config", cfg], capsys)
    assert code == 0, err
    train_rows = (workdir / "data" / "train.tsv").read_text().splitlines()
    sources = [r.split("\t")[0] for r in train_rows]
    targets = [r.split("\t")[1] for r in train_rows]
    monkeypatch.setattr("sys.stdin", io.StringIO("\n".join(sources) + "\n"))
    code, out, _ = run(["correct", "model.ckpt", "--config", cfg], capsys)
    assert code == 0
    rank1 = {}
    for line in out.strip().splitlines():
        src, rank, _, syl = line.split("\t")
        if rank == "1" and src not in rank1:
            rank1[src] = syl
    hits = sum(rank1.get(s) == t for s, t in zip(sources, targets))
    assert hits == len(sources), f"{hits}/{len(sources)} training pairs at rank 1"
