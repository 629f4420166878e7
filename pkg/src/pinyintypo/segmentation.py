"""Edit distance and segmentation of a raw letter string against syllables.

``best_segmentation`` splits an unsegmented input into one contiguous piece
per target syllable, maximizing the negated sum of per-piece edit distances.
Interior pieces are capped at ``MAX_SYLLABLE_LEN`` letters; the final piece
takes whatever remains (it may be longer, or empty when a cut lands on the
end of the input). Ties are broken toward the earliest cut positions, so the
result is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SegmentationError
from .lexicon import MAX_SYLLABLE_LEN

NEG_INF = float("-inf")


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance with unit-cost insert/delete/substitute."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(
                prev[j] + 1,  # delete ca
                cur[j - 1] + 1,  # insert cb
                prev[j - 1] + (ca != cb),
            )
        prev = cur
    return prev[-1]


def _prefix_distances(text: str, target: str) -> list[int]:
    """d(text[:k], target) for every k in 0..len(text), one DP sweep."""
    m = len(target)
    row = list(range(m + 1))
    out = [m]
    for ca in text:
        new = [row[0] + 1] + [0] * m
        for j, cb in enumerate(target, start=1):
            new[j] = min(row[j] + 1, new[j - 1] + 1, row[j - 1] + (ca != cb))
        row = new
        out.append(row[m])
    return out


def segmentation_score(segments: Sequence[str], syllables: Sequence[str]) -> int:
    """Negated sum of per-position edit distances; 0 iff an exact match."""
    if len(segments) != len(syllables):
        raise ValueError(
            f"segment count {len(segments)} does not match syllable count {len(syllables)}"
        )
    return -sum(edit_distance(seg, s) for seg, s in zip(segments, syllables))


@dataclass(frozen=True)
class Segmentation:
    """A split of the input into one piece per syllable, with its score."""

    segments: tuple[str, ...]
    boundaries: tuple[int, ...]  # end position of each segment
    score: int

    @property
    def spans(self) -> tuple[tuple[int, int], ...]:
        starts = (0,) + self.boundaries[:-1]
        return tuple(zip(starts, self.boundaries))

    def assignment_matrix(self) -> np.ndarray:
        """(letters x segments) 0/1 matrix: entry (i, j) marks letter i in piece j."""
        n_letters = self.boundaries[-1]
        mat = np.zeros((n_letters, len(self.segments)), dtype=np.float64)
        for j, (start, end) in enumerate(self.spans):
            mat[start:end, j] = 1.0
        return mat


def best_segmentation(letters: str, syllables: Sequence[str]) -> Segmentation:
    """Highest-scoring split of ``letters`` into ``len(syllables)`` pieces.

    Equivalent to scoring every candidate split (interior pieces of length
    1..MAX_SYLLABLE_LEN, final piece unbounded) and keeping the first maximum
    in cut-position order; computed by dynamic programming over suffixes.
    """
    n_seg = len(syllables)
    n = len(letters)
    if n_seg < 1:
        raise SegmentationError("need at least one target syllable")
    if n_seg > n:
        raise SegmentationError(
            f"cannot split {n} letters into {n_seg} non-empty segments"
        )

    # best[j][pos] = best score splitting letters[pos:] into pieces j..n_seg-1
    best = [[NEG_INF] * (n + 1) for _ in range(n_seg)]
    choice = [[-1] * (n + 1) for _ in range(n_seg)]
    last = syllables[n_seg - 1]
    for pos in range(n + 1):
        best[n_seg - 1][pos] = -edit_distance(letters[pos:], last)
        choice[n_seg - 1][pos] = n
    for j in range(n_seg - 2, -1, -1):
        target = syllables[j]
        nxt = best[j + 1]
        for pos in range(n + 1):
            window = letters[pos : pos + MAX_SYLLABLE_LEN]
            dists = _prefix_distances(window, target)
            score_best = NEG_INF
            end_best = -1
            for length in range(1, len(window) + 1):
                tail = nxt[pos + length]
                if tail == NEG_INF:
                    continue
                score = tail - dists[length]
                if score > score_best:
                    score_best = score
                    end_best = pos + length
            best[j][pos] = score_best
            choice[j][pos] = end_best

    if best[0][0] == NEG_INF:
        raise SegmentationError(f"no valid segmentation of {letters!r}")

    segments = []
    bounds = []
    pos = 0
    for j in range(n_seg):
        end = choice[j][pos]
        segments.append(letters[pos:end])
        bounds.append(end)
        pos = end
    return Segmentation(tuple(segments), tuple(bounds), int(best[0][0]))
