"""Flat key = value run configuration shared by every subcommand.

Files use UTF-8 text with one ``key = value`` per line and ``#`` comments.
Every key can also be given as a command-line flag of the same name; flags
win over the file, the file wins over defaults. Unknown keys and conversion
failures are hard errors, reported all at once.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from typing import Optional

from .errors import ConfigError
from .noise import DEFAULT_TYPE_MIX, InputType


@dataclass
class RunConfig:
    # paths
    lexicon_path: str = ""  # empty: packaged standard syllable table
    corpus_dir: str = "data"
    train_corpus: str = ""  # empty: <corpus_dir>/train.tsv
    dev_corpus: str = ""  # empty: <corpus_dir>/dev.tsv
    test_corpus: str = ""  # empty: <corpus_dir>/test.tsv
    transition_model_path: str = ""  # empty: <corpus_dir>/transitions.ptmodel
    keystroke_log_path: str = ""  # empty: <corpus_dir>/keystrokes.tsv
    checkpoint_path: str = "model.ckpt"
    train_log_path: str = "train_log.tsv"
    report_path: str = ""
    sweep_path: str = ""
    # corpus generation
    n_samples: int = 20000
    error_rate: float = 0.08
    acronym_rate: float = 0.5
    type_mix: str = "0.4158,0.3474,0.1798,0.0570"  # CP,LAP,GAP,MP
    sentence_len_min: int = 1
    sentence_len_max: int = 6
    split: str = "0.85,0.05,0.10"
    # model
    embed_dim: int = 256
    hidden_dim: int = 128
    attention_dim: int = 0  # 0: use hidden_dim
    max_decode_length: int = 20
    init_range: float = 0.08
    # training
    optimizer: str = "adam"
    iterations: int = 1000
    batch_size: int = 64
    learning_rate: float = 1e-3
    lr_decay_factor: float = 1.0
    lr_decay_every: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 5.0
    attention_loss_weight: float = 1.0
    checkpoint_every: int = 0
    # evaluation
    k_best: int = 10
    sweep_k_max: int = 0  # 0: no sweep
    sweep_tau: float = 0.005
    # global
    seed: int = 0
    workers: int = 1

    def resolved_train_corpus(self) -> str:
        return self.train_corpus or os.path.join(self.corpus_dir, "train.tsv")

    def resolved_dev_corpus(self) -> str:
        return self.dev_corpus or os.path.join(self.corpus_dir, "dev.tsv")

    def resolved_test_corpus(self) -> str:
        return self.test_corpus or os.path.join(self.corpus_dir, "test.tsv")

    def resolved_transition_model(self) -> str:
        return self.transition_model_path or os.path.join(
            self.corpus_dir, "transitions.ptmodel"
        )

    def resolved_keystroke_log(self) -> str:
        return self.keystroke_log_path or os.path.join(self.corpus_dir, "keystrokes.tsv")

    def parsed_type_mix(self) -> dict[InputType, float]:
        parts = self.type_mix.split(",")
        if len(parts) != 4:
            raise ConfigError(
                f"type_mix needs 4 comma-separated shares (CP,LAP,GAP,MP), got {self.type_mix!r}"
            )
        try:
            shares = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"type_mix has a non-numeric share: {self.type_mix!r}")
        return dict(zip(DEFAULT_TYPE_MIX.keys(), shares))

    def parsed_split(self) -> tuple[float, float, float]:
        parts = self.split.split(",")
        if len(parts) != 3:
            raise ConfigError(f"split needs 3 comma-separated fractions, got {self.split!r}")
        try:
            train, dev, test = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"split has a non-numeric fraction: {self.split!r}")
        if abs(train + dev + test - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {self.split!r}")
        return train, dev, test


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def config_field_names() -> list[str]:
    return [f.name for f in fields(RunConfig)]


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
        return raw
    except ValueError:
        raise ValueError(f"{key}: cannot parse {raw!r} as {kind}")


def parse_config_file(path) -> dict[str, str]:
    """Raw key/value pairs from a config file; duplicate keys are errors."""
    values: dict[str, str] = {}
    problems = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                problems.append(f"{path}:{lineno}: expected 'key = value', got {line!r}")
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key in values:
                problems.append(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = value
    if problems:
        raise ConfigError("; ".join(problems))
    return values


def build_run_config(
    file_values: Optional[dict[str, str]] = None,
    overrides: Optional[dict[str, object]] = None,
) -> RunConfig:
    """Merge defaults, config-file values, and command-line overrides.

    Every problem (unknown key, unparsable value) is collected and reported
    in one error.
    """
    merged: dict[str, object] = {}
    problems: list[str] = []
    for key, raw in (file_values or {}).items():
        if key not in _FIELD_TYPES:
            problems.append(f"unknown config key {key!r}")
            continue
        try:
            merged[key] = _convert(key, raw)
        except ValueError as e:
            problems.append(str(e))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in _FIELD_TYPES:
            problems.append(f"unknown config key {key!r}")
            continue
        if isinstance(value, str):
            try:
                merged[key] = _convert(key, value)
            except ValueError as e:
                problems.append(str(e))
        else:
            merged[key] = value
    if problems:
        raise ConfigError("; ".join(problems))
    return RunConfig(**merged)


def require_files(*paths: str) -> None:
    """Input paths must exist before any work starts."""
    missing = [p for p in paths if p and not os.path.exists(p)]
    if missing:
        raise ConfigError("; ".join(f"missing input file: {p}" for p in missing))


def require_output_dirs(*paths: str) -> None:
    """Output locations must sit in existing, writable directories."""
    problems = []
    for p in paths:
        if not p:
            continue
        parent = os.path.dirname(os.path.abspath(p))
        if not os.path.isdir(parent):
            problems.append(f"output directory does not exist: {parent}")
        elif not os.access(parent, os.W_OK):
            problems.append(f"output directory not writable: {parent}")
    if problems:
        raise ConfigError("; ".join(problems))
