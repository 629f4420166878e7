import numpy as np
import pytest

from pinyintypo.errors import FileFormatError
from pinyintypo.keystrokes import (
    KeystrokeLog,
    TransitionModel,
    estimate_transitions,
    load_keystroke_log,
    load_transition_model,
    save_keystroke_log,
    save_transition_model,
)
from pinyintypo.lexicon import LETTER_INDEX
from pinyintypo.noise import NoiseSpec, synthesize_keystrokes


def log_of(pairs):
    log = KeystrokeLog()
    log.extend(pairs)
    return log


def test_error_free_log_gives_identity_row():
    model = estimate_transitions(log_of([("o", "o")] * 10))
    o = LETTER_INDEX["o"]
    assert model.p[o, o] == 1.0
    assert model.p[o].sum() == 1.0
    assert (np.delete(model.p[o], o) == 0).all()


def test_direct_ratio():
    model = estimate_transitions(log_of([("o", "p")] * 2 + [("o", "o")] * 8))
    assert model.prob("o", "p") == pytest.approx(0.2)
    assert model.prob("o", "o") == pytest.approx(0.8)


def test_unobserved_letters_keep_identity_rows():
    model = estimate_transitions(log_of([("o", "p")]))
    q = LETTER_INDEX["q"]
    assert model.p[q, q] == 1.0
    assert model.p[q].sum() == 1.0


def test_rows_sum_to_one_with_and_without_smoothing(rng):
    pairs = [
        ("abcdefghijklmnopqrstuvwxyz"[i], "abcdefghijklmnopqrstuvwxyz"[j])
        for i, j in zip(rng.integers(0, 26, 500), rng.integers(0, 26, 500))
    ]
    for smoothing in (0.0, 0.5):
        model = estimate_transitions(log_of(pairs), smoothing=smoothing)
        assert np.allclose(model.p.sum(axis=1), 1.0, atol=1e-12)
        assert (model.p >= 0).all() and (model.p <= 1).all()


def test_estimation_recovers_generating_matrix():
    spec = NoiseSpec(per_letter_error_rate=0.08, rng_seed=99)
    truth = spec.ground_truth_matrix().p
    log = synthesize_keystrokes(spec, 100_000)
    est = estimate_transitions(log).p
    assert np.abs(est - truth).max() < 0.02


def test_transition_model_round_trip(tmp_path, rng):
    p = np.eye(26)
    p[0, 0] = 0.875
    p[0, 16] = 0.125  # a -> q
    model = TransitionModel(p)
    path = tmp_path / "m.ptmodel"
    save_transition_model(model, path)
    loaded = load_transition_model(path)
    assert (loaded.p == model.p).all()  # exact, not approximate
    assert path.read_text().splitlines()[0] == "ptmodel v1"


def test_transition_model_rejects_bad_header(tmp_path):
    path = tmp_path / "m.ptmodel"
    path.write_text("ptmodel v9\n" + ("0.0 " * 26 + "\n") * 26)
    with pytest.raises(FileFormatError, match="header"):
        load_transition_model(path)


def test_transition_model_rejects_short_row(tmp_path):
    path = tmp_path / "m.ptmodel"
    rows = ["1.0 " * 26] * 26
    rows[4] = "1.0 " * 25
    path.write_text("ptmodel v1\n" + "\n".join(rows) + "\n")
    with pytest.raises(FileFormatError, match=":6:"):
        load_transition_model(path)


def test_keystroke_log_round_trip(tmp_path):
    log = log_of([("o", "p"), ("a", "a")])
    path = tmp_path / "keys.tsv"
    save_keystroke_log(log, path)
    assert load_keystroke_log(path).records == log.records
    assert path.read_text() == "o\tp\na\ta\n"


def test_keystroke_log_rejects_bad_line(tmp_path):
    path = tmp_path / "keys.tsv"
    path.write_text("o\tp\no\tpp\n")
    with pytest.raises(FileFormatError, match=":2:"):
        load_keystroke_log(path)
