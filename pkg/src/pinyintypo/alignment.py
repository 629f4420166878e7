"""Ground-truth attention targets from segmentations and mistype statistics.

For a raw input of T_L letters segmented against T_S syllables, the target
is a (T_L+1) x (T_S+1) matrix: rows are letters plus the end marker, columns
syllables plus the end marker. A letter cell holds the largest probability,
over the letters of its owning syllable, of that syllable letter being
mistyped as the observed letter; cells outside the owning segment are zero,
and the end-marker corner is one. Column normalization turns each syllable's
column into a distribution suitable for supervising attention weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .keystrokes import TransitionModel
from .lexicon import LETTER_INDEX
from .segmentation import Segmentation


@dataclass(frozen=True)
class AlignmentMatrix:
    """Matrix plus the letter-row span owned by each syllable column."""

    values: np.ndarray
    segment_spans: Optional[tuple[tuple[int, int], ...]] = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def build_alignment(
    letters: str,
    syllables: Sequence[str],
    segmentation: Segmentation,
    pt: TransitionModel,
) -> AlignmentMatrix:
    """Raw alignment matrix for one (input, syllables, segmentation) triple."""
    if len(segmentation.segments) != len(syllables):
        raise ValueError(
            f"segmentation has {len(segmentation.segments)} pieces "
            f"for {len(syllables)} syllables"
        )
    if "".join(segmentation.segments) != letters:
        raise ValueError("segmentation does not cover the input string")
    n_letters = len(letters)
    n_syll = len(syllables)
    values = np.zeros((n_letters + 1, n_syll + 1))
    for j, ((start, end), syllable) in enumerate(zip(segmentation.spans, syllables)):
        rows = np.array([LETTER_INDEX[c] for c in syllable])
        for i in range(start, end):
            col = LETTER_INDEX[letters[i]]
            values[i, j] = pt.p[rows, col].max()
    values[n_letters, n_syll] = 1.0
    return AlignmentMatrix(values, segmentation.spans)


def normalize_alignment(matrix: AlignmentMatrix) -> AlignmentMatrix:
    """Scale every column to sum to one.

    A column with no mass (the mistype statistics assign zero to all of its
    segment's letters) becomes uniform over that segment's rows, which needs
    the span information; idempotent on already-normalized input.
    """
    values = matrix.values.astype(np.float64, copy=True)
    n_cols = values.shape[1]
    for j in range(n_cols):
        total = values[:, j].sum()
        if total > 0:
            values[:, j] /= total
        else:
            if matrix.segment_spans is None or j >= len(matrix.segment_spans):
                raise ValueError(
                    f"column {j} has zero mass and no segment span to fall back on"
                )
            start, end = matrix.segment_spans[j]
            if end > start:
                values[start:end, j] = 1.0 / (end - start)
    return AlignmentMatrix(values, matrix.segment_spans)


def attention_distance(target: np.ndarray | AlignmentMatrix, produced: np.ndarray) -> float:
    """Sum of squared elementwise differences between two equal-shape matrices.

    The decoder's attention stack must be transposed to letters x syllables
    orientation before the comparison; ``model.forward_loss`` returns
    produced matrices already oriented this way.
    """
    a = target.values if isinstance(target, AlignmentMatrix) else np.asarray(target)
    b = produced.values if isinstance(produced, AlignmentMatrix) else np.asarray(produced)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.sum(diff * diff))


def alignment_to_tsv(
    matrix: AlignmentMatrix,
    letters: str,
    syllables: Sequence[str],
    end_marker: str = "</s>",
) -> str:
    """Labeled TSV grid of the matrix, for inspection and golden tests."""
    rows = list(letters) + [end_marker]
    cols = list(syllables) + [end_marker]
    if matrix.values.shape != (len(rows), len(cols)):
        raise ValueError(
            f"matrix shape {matrix.values.shape} does not match "
            f"{len(rows)} letters x {len(cols)} syllables"
        )
    lines = ["\t" + "\t".join(cols)]
    for label, row in zip(rows, matrix.values):
        lines.append(label + "\t" + "\t".join(f"{v:.6f}" for v in row))
    return "\n".join(lines) + "\n"
