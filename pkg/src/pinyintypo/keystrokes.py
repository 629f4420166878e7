"""Per-letter mistype statistics estimated from keystroke records.

A keystroke record pairs the letter the user meant with the letter that was
actually typed. The transition model holds, for every letter, a probability
row over the 26 letters; the diagonal carries the correct-keystroke mass so
each observed row is a distribution. Letters never observed keep an identity
row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import FileFormatError
from .lexicon import LETTERS, LETTER_INDEX

N_LETTERS = 26

TRANSITION_HEADER = "ptmodel v1"


@dataclass
class KeystrokeLog:
    """Sequence of (intended, typed) letter pairs."""

    records: list[tuple[str, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def append(self, intended: str, typed: str) -> None:
        self.records.append((intended, typed))

    def extend(self, records: Iterable[tuple[str, str]]) -> None:
        self.records.extend(records)


@dataclass
class TransitionModel:
    """26x26 letter-transition probabilities, rows summing to one.

    ``p[i, j]`` is the probability that a user meaning letter i types
    letter j. ``counts`` retains the raw tallies when the model came from
    estimation.
    """

    p: np.ndarray
    counts: Optional[np.ndarray] = None

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=np.float64)
        if self.p.shape != (N_LETTERS, N_LETTERS):
            raise ValueError(f"transition matrix must be 26x26, got {self.p.shape}")

    @classmethod
    def identity(cls) -> "TransitionModel":
        return cls(np.eye(N_LETTERS))

    def prob(self, intended: str, typed: str) -> float:
        return float(self.p[LETTER_INDEX[intended], LETTER_INDEX[typed]])

    def row(self, intended: str) -> np.ndarray:
        return self.p[LETTER_INDEX[intended]]


def estimate_transitions(log: KeystrokeLog, smoothing: float = 0.0) -> TransitionModel:
    """Estimate mistype ratios from a keystroke log.

    Off-diagonal entries are (mistypes i->j) / (total keystrokes meant as i),
    optionally with additive smoothing; the diagonal is the complementary
    mass. Letters with no observations keep an identity row.
    """
    counts = np.zeros((N_LETTERS, N_LETTERS), dtype=np.int64)
    for intended, typed in log.records:
        counts[LETTER_INDEX[intended], LETTER_INDEX[typed]] += 1
    totals = counts.sum(axis=1)
    p = np.eye(N_LETTERS)
    for i in range(N_LETTERS):
        if totals[i] == 0:
            continue
        denom = totals[i] + smoothing * N_LETTERS
        row = (counts[i] + smoothing) / denom
        off = row.sum() - row[i]
        p[i] = row
        p[i, i] = 1.0 - off
    return TransitionModel(p, counts)


def save_transition_model(model: TransitionModel, path) -> None:
    """Versioned text format: header line, then 26 rows of 26 probabilities."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(TRANSITION_HEADER + "\n")
        for i in range(N_LETTERS):
            f.write(" ".join(repr(float(v)) for v in model.p[i]) + "\n")


def load_transition_model(path) -> TransitionModel:
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0].strip() != TRANSITION_HEADER:
        raise FileFormatError(
            f"expected header {TRANSITION_HEADER!r}", path=path, line=1
        )
    rows = []
    for lineno, line in enumerate(lines[1 : N_LETTERS + 1], start=2):
        parts = line.split()
        if len(parts) != N_LETTERS:
            raise FileFormatError(
                f"expected {N_LETTERS} probabilities, got {len(parts)}",
                path=path,
                line=lineno,
            )
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise FileFormatError("non-numeric probability", path=path, line=lineno)
    if len(rows) != N_LETTERS:
        raise FileFormatError(
            f"expected {N_LETTERS} rows, found {len(rows)}", path=path
        )
    return TransitionModel(np.array(rows))


def save_keystroke_log(log: KeystrokeLog, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for intended, typed in log.records:
            f.write(f"{intended}\t{typed}\n")


def load_keystroke_log(path) -> KeystrokeLog:
    """One record per line: intended<TAB>typed, both single letters a-z."""
    log = KeystrokeLog()
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or any(
                len(p) != 1 or p not in LETTERS for p in parts
            ):
                raise FileFormatError(
                    f"expected 'intended<TAB>typed' single letters, got {line!r}",
                    path=path,
                    line=lineno,
                )
            log.append(parts[0], parts[1])
    return log
