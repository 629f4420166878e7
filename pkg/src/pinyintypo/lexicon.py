"""Syllable inventory and the source/target vocabularies built from it.

The source side is the fixed letter alphabet a-z plus an end marker; the
target side is the syllable inventory plus end marker and unknown token.
Both sides expose contiguous, 0-based index maps.
"""

from __future__ import annotations

import importlib.resources
from typing import Iterable, Sequence

from .errors import LexiconError

MAX_SYLLABLE_LEN = 6
LETTERS = "abcdefghijklmnopqrstuvwxyz"
END_MARKER = "</s>"
UNKNOWN = "<unk>"

LETTER_INDEX = {ch: i for i, ch in enumerate(LETTERS)}


def is_valid_syllable(s: str) -> bool:
    return 0 < len(s) <= MAX_SYLLABLE_LEN and all(c in LETTER_INDEX for c in s)


class Lexicon:
    """Immutable syllable inventory with derived vocabularies.

    Vocabulary order is deterministic: sorted syllables, then the end
    marker, then the unknown token. The source alphabet is a-z followed by
    the end marker.
    """

    def __init__(self, syllables: Iterable[str]):
        unique = sorted(set(syllables))
        for s in unique:
            if not is_valid_syllable(s):
                raise LexiconError(
                    f"invalid syllable {s!r}: must be 1..{MAX_SYLLABLE_LEN} letters a-z"
                )
        if not unique:
            raise LexiconError("lexicon is empty")
        self.syllables: tuple[str, ...] = tuple(unique)
        self.source_alphabet: tuple[str, ...] = tuple(LETTERS) + (END_MARKER,)
        self.target_vocab: tuple[str, ...] = self.syllables + (END_MARKER, UNKNOWN)
        self.source_index: dict[str, int] = {t: i for i, t in enumerate(self.source_alphabet)}
        self.target_index: dict[str, int] = {t: i for i, t in enumerate(self.target_vocab)}
        self.source_end_id = self.source_index[END_MARKER]
        self.target_end_id = self.target_index[END_MARKER]
        self.unknown_id = self.target_index[UNKNOWN]

    def __len__(self) -> int:
        return len(self.syllables)

    def __contains__(self, syllable: str) -> bool:
        return syllable in self.target_index and syllable not in (END_MARKER, UNKNOWN)

    def encode_source(self, letters: str) -> list[int]:
        """Letter string -> ids, end marker appended. Rejects non a-z input."""
        try:
            ids = [LETTER_INDEX[c] for c in letters]
        except KeyError as e:
            raise LexiconError(f"illegal source letter {e.args[0]!r} in {letters!r}") from None
        ids.append(self.source_end_id)
        return ids

    def encode_target(self, syllables: Sequence[str]) -> list[int]:
        """Syllable sequence -> ids, end marker appended; unknowns map to <unk>."""
        ids = [self.target_index.get(s, self.unknown_id) for s in syllables]
        ids.append(self.target_end_id)
        return ids

    def decode_target(self, ids: Sequence[int]) -> list[str]:
        """Ids -> syllable strings, stopping at the first end marker."""
        out = []
        for i in ids:
            if i == self.target_end_id:
                break
            out.append(self.target_vocab[i])
        return out


def acronym_of(syllable: str) -> str:
    """First letter of a syllable, the form used by acronym input."""
    if not syllable:
        raise LexiconError("cannot take the acronym of an empty syllable")
    return syllable[0]


def load_lexicon(path) -> Lexicon:
    """Read a lexicon file: UTF-8, one syllable per line, '#' comments."""
    syllables = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not is_valid_syllable(line):
                raise LexiconError(
                    f"{path}:{lineno}: invalid syllable {line!r}: "
                    f"must be 1..{MAX_SYLLABLE_LEN} letters a-z"
                )
            syllables.append(line)
    if not syllables:
        raise LexiconError(f"{path}: no syllables found")
    return Lexicon(syllables)


def default_lexicon() -> Lexicon:
    """The packaged standard Mandarin syllable table (~410 entries)."""
    ref = importlib.resources.files("pinyintypo.data").joinpath("syllables.txt")
    syllables = [
        line.strip()
        for line in ref.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    return Lexicon(syllables)
