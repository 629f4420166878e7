"""Word/sentence accuracy, per-input-type reports, and the K-selection sweep.

Word accuracy aligns predicted and reference syllables with a unit-cost
edit script (among minimum-cost scripts, the one with the most exact
matches) and divides matched positions by the reference length. Sentence
accuracy is exact sequence equality, counted for the first candidate
(top-1) or anywhere in the K-best list (top-K).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .beam import beam_search
from .lexicon import Lexicon
from .model import ModelConfig, Parameters
from .noise import InputType, Sample

MIX = "MIX"
TYPE_ORDER = [t.value for t in InputType] + [MIX]


def word_hits(pred: Sequence[str], ref: Sequence[str]) -> int:
    """Exact-match count under a minimum edit script (ties favor matches)."""
    np_, nr = len(pred), len(ref)
    # DP over (cost, -hits), lexicographic
    prev = [(j, 0) for j in range(nr + 1)]
    for i in range(1, np_ + 1):
        cur = [(i, 0)] + [(0, 0)] * nr
        for j in range(1, nr + 1):
            equal = pred[i - 1] == ref[j - 1]
            c_sub, h_sub = prev[j - 1]
            best = (c_sub + (0 if equal else 1), h_sub + (1 if equal else 0))
            c_del, h_del = prev[j]
            if (c_del + 1, -h_del) < (best[0], -best[1]):
                best = (c_del + 1, h_del)
            c_ins, h_ins = cur[j - 1]
            if (c_ins + 1, -h_ins) < (best[0], -best[1]):
                best = (c_ins + 1, h_ins)
            cur[j] = best
        prev = cur
    return prev[nr][1]


def word_accuracy(pred: Sequence[str], ref: Sequence[str]) -> float:
    if not ref:
        raise ValueError("reference must be nonempty")
    return word_hits(pred, ref) / len(ref)


def sentence_accuracy(
    candidates: Sequence[Sequence[Sequence[str]]],
    refs: Sequence[Sequence[str]],
    mode: str = "top1",
) -> float:
    """Fraction of references found at rank 1 (top1) or anywhere (topk)."""
    if mode not in ("top1", "topk"):
        raise ValueError(f"mode must be 'top1' or 'topk', got {mode!r}")
    if len(candidates) != len(refs):
        raise ValueError("candidate and reference counts differ")
    hits = 0
    for cands, ref in zip(candidates, refs):
        ref = list(ref)
        if mode == "top1":
            hits += bool(cands) and list(cands[0]) == ref
        else:
            hits += any(list(c) == ref for c in cands)
    return hits / len(refs) if refs else 0.0


@dataclass
class TypeRow:
    count: int
    w_acc: float  # percent, first candidate
    s_acc_top1: float  # percent
    s_acc_topk: float  # percent


@dataclass
class EvalReport:
    rows: dict[str, TypeRow]
    k: int
    notes: list[str] = field(default_factory=list)

    def format_table(self) -> str:
        lines = [f"{'type':<6} {'count':>7} {'W-Acc':>8} {'S-Acc@1':>9} {'S-Acc@K':>9}   (K={self.k})"]
        for name in TYPE_ORDER:
            if name not in self.rows:
                continue
            r = self.rows[name]
            lines.append(
                f"{name:<6} {r.count:>7} {r.w_acc:>8.2f} {r.s_acc_top1:>9.2f} {r.s_acc_topk:>9.2f}"
            )
        lines.extend(f"# {note}" for note in self.notes)
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        lines = ["type\tcount\tw_acc\ts_acc_top1\ts_acc_topk"]
        for name in TYPE_ORDER:
            if name in self.rows:
                r = self.rows[name]
                lines.append(
                    f"{name}\t{r.count}\t{r.w_acc:.4f}\t{r.s_acc_top1:.4f}\t{r.s_acc_topk:.4f}"
                )
        return "\n".join(lines) + "\n"


@dataclass
class SweepResult:
    points: list[tuple[int, float]]  # (K, oracle-within-K word accuracy)
    chosen_k: int
    tau: float
    saturated: bool  # False when no K met the threshold and K_max was used

    def to_tsv(self) -> str:
        lines = ["k\tw_acc"] + [f"{k}\t{w:.6f}" for k, w in self.points]
        return "\n".join(lines) + "\n"


def decode_corpus(
    params: Parameters,
    config: ModelConfig,
    lexicon: Lexicon,
    samples: Sequence[Sample],
    k: int,
) -> list[list[list[str]]]:
    """K-best syllable sequences for every sample, best first."""
    out = []
    for sample in samples:
        hyps = beam_search(
            params,
            lexicon.encode_source(sample.source),
            lexicon.target_end_id,
            k,
            config.max_decode_length,
        )
        out.append([lexicon.decode_target(h.tokens) for h in hyps])
    return out


def evaluate(
    params: Parameters,
    config: ModelConfig,
    lexicon: Lexicon,
    samples: Sequence[Sample],
    k: int,
    candidates: Optional[Sequence[Sequence[Sequence[str]]]] = None,
) -> EvalReport:
    """Per-type and aggregate accuracy over beam-search output.

    Pass ``candidates`` to reuse existing decodes; otherwise the corpus is
    decoded here. Types absent from the corpus are noted, not reported.
    """
    if candidates is None:
        candidates = decode_corpus(params, config, lexicon, samples, k)
    stats = {
        name: {"count": 0, "hits": 0, "ref_len": 0, "s1": 0, "sk": 0}
        for name in TYPE_ORDER
    }
    for sample, cands in zip(samples, candidates):
        ref = list(sample.target)
        top1 = list(cands[0]) if cands else []
        hits = word_hits(top1, ref)
        exact1 = int(bool(cands) and top1 == ref)
        exactk = int(any(list(c) == ref for c in cands))
        for name in (sample.input_type.value, MIX):
            s = stats[name]
            s["count"] += 1
            s["hits"] += hits
            s["ref_len"] += len(ref)
            s["s1"] += exact1
            s["sk"] += exactk
    rows = {}
    notes = []
    for name in TYPE_ORDER:
        s = stats[name]
        if s["count"] == 0:
            notes.append(f"no {name} samples in the corpus; row omitted")
            continue
        rows[name] = TypeRow(
            count=s["count"],
            w_acc=100.0 * s["hits"] / s["ref_len"],
            s_acc_top1=100.0 * s["s1"] / s["count"],
            s_acc_topk=100.0 * s["sk"] / s["count"],
        )
    return EvalReport(rows=rows, k=k, notes=notes)


def sweep_k(
    params: Parameters,
    config: ModelConfig,
    lexicon: Lexicon,
    samples: Sequence[Sample],
    k_max: int,
    tau: float,
    candidates: Optional[Sequence[Sequence[Sequence[str]]]] = None,
) -> SweepResult:
    """Oracle-within-K word accuracy for K = 1..k_max and the chosen K.

    The chosen K is the smallest K >= 2 whose improvement over K-1 falls
    below tau; if none qualifies the sweep saturates at k_max.
    """
    if k_max < 2:
        raise ValueError("need k_max >= 2")
    if candidates is None:
        candidates = decode_corpus(params, config, lexicon, samples, k_max)
    total_ref = sum(len(s.target) for s in samples)
    points = []
    for k in range(1, k_max + 1):
        hits = 0
        for sample, cands in zip(samples, candidates):
            ref = list(sample.target)
            best = 0
            for cand in cands[:k]:
                best = max(best, word_hits(list(cand), ref))
            hits += best
        points.append((k, hits / total_ref))
    chosen = None
    for k in range(2, k_max + 1):
        if points[k - 1][1] - points[k - 2][1] < tau:
            chosen = k
            break
    saturated = chosen is not None
    if chosen is None:
        chosen = k_max
    return SweepResult(points=points, chosen_k=chosen, tau=tau, saturated=saturated)
