"""Input-type taxonomy and synthetic corpus generation.

Raw inputs fall into four categories relative to their target syllables:
correct pinyin (CP), local acronym (LAP, some syllables abbreviated to their
first letter), global acronym (GAP, all abbreviated), and misspelled pinyin
(MP, at least one letter replaced by a keyboard neighbor). The generator
inverts the taxonomy: it draws a target sentence, picks a category, and
corrupts accordingly, also emitting the letter-level keystroke record that a
transition-model estimator can consume.
"""

from __future__ import annotations

import enum
import hashlib
import importlib.resources
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import FileFormatError, LexiconError
from .keystrokes import KeystrokeLog, TransitionModel
from .lexicon import LETTERS, LETTER_INDEX, Lexicon, acronym_of

_REDRAW_CAP = 1000


class InputType(enum.Enum):
    CP = "CP"
    LAP = "LAP"
    GAP = "GAP"
    MP = "MP"

    def __str__(self) -> str:
        return self.value


# Table-style default mix: CP/LAP/GAP/MP shares of real-world input.
DEFAULT_TYPE_MIX = {
    InputType.CP: 0.4158,
    InputType.LAP: 0.3474,
    InputType.GAP: 0.1798,
    InputType.MP: 0.0570,
}


def default_neighbor_table() -> dict[str, tuple[str, ...]]:
    ref = importlib.resources.files("pinyintypo.data").joinpath("qwerty_neighbors.txt")
    table = {}
    for line in ref.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        letter, *neighbors = line.split()
        table[letter] = tuple(neighbors)
    return table


@dataclass
class NoiseSpec:
    """Knobs for the synthetic corruption process."""

    per_letter_error_rate: float = 0.08
    neighbor_table: dict[str, tuple[str, ...]] = field(default_factory=default_neighbor_table)
    type_mix: dict[InputType, float] = field(default_factory=lambda: dict(DEFAULT_TYPE_MIX))
    acronym_rate: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.per_letter_error_rate < 1.0:
            raise ValueError("per_letter_error_rate must lie in [0, 1)")
        if not 0.0 <= self.acronym_rate <= 1.0:
            raise ValueError("acronym_rate must lie in [0, 1]")
        total = 0.0
        for t in InputType:
            share = self.type_mix.get(t, 0.0)
            if share < 0:
                raise ValueError(f"type_mix[{t}] is negative")
            total += share
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"type_mix must sum to 1, got {total}")
        for ch in LETTERS:
            if not self.neighbor_table.get(ch):
                raise ValueError(f"letter {ch!r} has no keyboard neighbors")

    def ground_truth_matrix(self, pt: Optional[TransitionModel] = None) -> TransitionModel:
        """The letter-transition matrix this spec actually samples from."""
        p = np.zeros((26, 26))
        for ch in LETTERS:
            i = LETTER_INDEX[ch]
            neighbors, weights = _neighbor_weights(ch, self, pt)
            p[i, i] = 1.0 - self.per_letter_error_rate
            for nb, w in zip(neighbors, weights):
                p[i, LETTER_INDEX[nb]] = self.per_letter_error_rate * w
        return TransitionModel(p)


def _neighbor_weights(letter: str, spec: NoiseSpec, pt: Optional[TransitionModel]):
    neighbors = spec.neighbor_table[letter]
    if pt is not None:
        raw = np.array([pt.prob(letter, nb) for nb in neighbors])
        if raw.sum() > 0:
            return neighbors, raw / raw.sum()
    return neighbors, np.full(len(neighbors), 1.0 / len(neighbors))


def classify_input_type(letters: str, syllables: Sequence[str]) -> InputType:
    """Assign the most exact category: CP, then GAP, then LAP, then MP."""
    if not letters or not syllables:
        raise ValueError("both the input string and the syllables must be nonempty")
    full = "".join(syllables)
    if letters == full:
        return InputType.CP
    if letters == "".join(acronym_of(s) for s in syllables):
        return InputType.GAP
    if _lap_composition_exists(letters, syllables):
        return InputType.LAP
    return InputType.MP


def _lap_composition_exists(letters: str, syllables: Sequence[str]) -> bool:
    """Can ``letters`` be composed of full syllables and first letters, using
    at least one of each kind? Single-letter syllables may count as either."""
    states = {(0, False, False)}  # (position, saw_full, saw_acronym)
    for s in syllables:
        nxt = set()
        first = s[0]
        for pos, saw_full, saw_acr in states:
            if letters.startswith(s, pos):
                nxt.add((pos + len(s), True, saw_acr))
                if len(s) == 1:
                    nxt.add((pos + 1, saw_full, True))
            if letters.startswith(first, pos) and len(s) > 1:
                nxt.add((pos + 1, saw_full, True))
        states = nxt
        if not states:
            return False
    return (len(letters), True, True) in states


def lap_viable(syllables: Sequence[str]) -> bool:
    """LAP needs a multi-letter syllable to shorten and another to keep.

    If every kept syllable were a single letter, the result would equal the
    all-acronym form and be indistinguishable from GAP; single-letter
    syllables are their own acronym, so only multi-letter ones count.
    """
    return sum(len(s) > 1 for s in syllables) >= 2


def corrupt_sentence(
    syllables: Sequence[str],
    input_type: InputType,
    spec: NoiseSpec,
    rng: np.random.Generator,
    pt: Optional[TransitionModel] = None,
    keystroke_sink: Optional[KeystrokeLog] = None,
) -> str:
    """Produce a raw input string of the requested category.

    MP substitutions are drawn per letter from the neighbor table (weighted
    by ``pt`` when given) and every simulated keystroke, including redrawn
    attempts, is appended to ``keystroke_sink`` so estimates made from the
    log are unbiased. LAP falls back to GAP when no local-acronym pattern
    exists (single syllable, or nothing longer than one letter).
    """
    if input_type is InputType.CP:
        return "".join(syllables)
    if input_type is InputType.GAP:
        return "".join(acronym_of(s) for s in syllables)
    if input_type is InputType.LAP:
        if not lap_viable(syllables):
            return corrupt_sentence(syllables, InputType.GAP, spec, rng, pt, keystroke_sink)
        multi = [i for i, s in enumerate(syllables) if len(s) > 1]
        for _ in range(_REDRAW_CAP):
            cut = rng.random(len(syllables)) < spec.acronym_rate
            if any(cut[i] for i in multi) and not all(cut[i] for i in multi):
                break
        else:
            # Degenerate acronym_rate; force a minimal valid pattern.
            cut = np.zeros(len(syllables), dtype=bool)
            cut[multi[int(rng.integers(len(multi)))]] = True
        return "".join(acronym_of(s) if c else s for s, c in zip(syllables, cut))
    # MP: per-letter neighbor substitution, redrawn until one occurred.
    intended = "".join(syllables)
    for _ in range(_REDRAW_CAP):
        typed = []
        changed = False
        for ch in intended:
            if rng.random() < spec.per_letter_error_rate:
                neighbors, weights = _neighbor_weights(ch, spec, pt)
                out = neighbors[int(rng.choice(len(neighbors), p=weights))]
                changed = True
            else:
                out = ch
            typed.append(out)
            if keystroke_sink is not None:
                keystroke_sink.append(ch, out)
        if changed:
            return "".join(typed)
    raise RuntimeError(
        f"could not draw a substitution in {_REDRAW_CAP} attempts "
        f"(error rate {spec.per_letter_error_rate})"
    )


def synthesize_keystrokes(
    spec: NoiseSpec,
    n: int,
    rng: Optional[np.random.Generator] = None,
    pt: Optional[TransitionModel] = None,
) -> KeystrokeLog:
    """Draw n keystrokes with uniform intended letters and spec noise."""
    if rng is None:
        rng = np.random.default_rng(spec.rng_seed)
    log = KeystrokeLog()
    intended_ids = rng.integers(0, 26, size=n)
    errors = rng.random(n) < spec.per_letter_error_rate
    for idx, is_err in zip(intended_ids, errors):
        ch = LETTERS[idx]
        if is_err:
            neighbors, weights = _neighbor_weights(ch, spec, pt)
            log.append(ch, neighbors[int(rng.choice(len(neighbors), p=weights))])
        else:
            log.append(ch, ch)
    return log


@dataclass(frozen=True)
class Sample:
    source: str
    target: tuple[str, ...]
    input_type: InputType


def syllable_weights(lexicon: Lexicon) -> np.ndarray:
    """Zipf-like sampling weights, ranks assigned by a syllable-hash order.

    Hashing decorrelates frequency from alphabetical order; ranking the
    sorted lexicon directly would pour most of the probability mass on the
    highly confusable vowel-only syllables (a, ai, an, ...), which no real
    input distribution does. Deterministic for a given lexicon.
    """
    order = sorted(
        range(len(lexicon)),
        key=lambda i: hashlib.md5(lexicon.syllables[i].encode()).hexdigest(),
    )
    w = np.empty(len(lexicon))
    for rank, idx in enumerate(order):
        w[idx] = 1.0 / (rank + 1)
    return w / w.sum()


def generate_corpus(
    lexicon: Lexicon,
    n: int,
    spec: NoiseSpec,
    sentence_length_range: tuple[int, int] = (1, 6),
    pt: Optional[TransitionModel] = None,
    shards: int = 1,
) -> tuple[list[Sample], KeystrokeLog]:
    """n labeled (source, target, type) samples plus the MP keystroke log.

    Deterministic given ``spec.rng_seed``: sample i of shard k depends only
    on (seed + k, i), so sharded and unsharded runs agree when concatenated.
    Each sample's label is re-derived with ``classify_input_type``, which
    only matters for degenerate collisions (for example an all-single-letter
    sentence whose acronym form equals its full form).
    """
    if n < 1:
        raise ValueError("need n >= 1 samples")
    lo, hi = sentence_length_range
    if lo < 1 or hi < lo:
        raise ValueError(f"bad sentence length range {sentence_length_range}")
    if shards < 1:
        raise ValueError("need shards >= 1")
    weights = syllable_weights(lexicon)
    types = list(InputType)
    mix = np.array([spec.type_mix.get(t, 0.0) for t in types])
    mix = mix / mix.sum()
    samples: list[Sample] = []
    log = KeystrokeLog()
    base, extra = divmod(n, shards)
    for shard in range(shards):
        rng = np.random.default_rng(spec.rng_seed + shard)
        for _ in range(base + (1 if shard < extra else 0)):
            drawn = types[int(rng.choice(len(types), p=mix))]
            # Acronym categories need sentences that stay distinguishable:
            # LAP two multi-letter syllables, GAP at least one. Resample the
            # sentence when the draw cannot realize its category.
            length_lo = max(lo, 2) if drawn is InputType.LAP and hi >= 2 else lo
            for _ in range(_REDRAW_CAP):
                length = int(rng.integers(length_lo, hi + 1))
                idx = rng.choice(len(lexicon), size=length, p=weights)
                sentence = tuple(lexicon.syllables[i] for i in idx)
                if drawn is InputType.LAP and not lap_viable(sentence):
                    continue
                if drawn is InputType.GAP and not any(len(s) > 1 for s in sentence):
                    continue
                break
            letters = corrupt_sentence(sentence, drawn, spec, rng, pt, log)
            label = classify_input_type(letters, sentence)
            samples.append(Sample(letters, sentence, label))
    return samples, log


def save_corpus(samples: Sequence[Sample], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in samples:
            f.write(f"{s.source}\t{' '.join(s.target)}\t{s.input_type}\n")


def load_corpus(path) -> list[Sample]:
    """TSV with columns source, space-separated target syllables, type."""
    samples = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FileFormatError(
                    f"expected 3 tab-separated columns, got {len(parts)}",
                    path=path,
                    line=lineno,
                )
            source, target_text, type_text = parts
            if not source or any(c not in LETTER_INDEX for c in source):
                raise FileFormatError(
                    f"source must be nonempty letters a-z, got {source!r}",
                    path=path,
                    line=lineno,
                )
            target = tuple(target_text.split())
            if not target:
                raise FileFormatError("empty target", path=path, line=lineno)
            try:
                input_type = InputType(type_text)
            except ValueError:
                raise FileFormatError(
                    f"unknown input type {type_text!r}", path=path, line=lineno
                )
            samples.append(Sample(source, target, input_type))
    if not samples:
        raise FileFormatError("corpus is empty", path=path)
    return samples
