"""K-best decoding over the trained model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Parameters, decode_step, encode, initial_decoder_state, log_softmax


@dataclass(frozen=True)
class Hypothesis:
    """A (possibly finished) decoder path. ``tokens`` excludes the end
    marker; ``log_prob`` includes its probability when finished."""

    tokens: tuple[int, ...]
    log_prob: float
    state: np.ndarray
    finished: bool


def beam_search(
    params: Parameters,
    x_ids,
    end_id: int,
    k: int,
    max_len: int,
) -> list[Hypothesis]:
    """Up to k best hypotheses, sorted by descending total log-probability.

    The end marker doubles as the start symbol. Paths terminate when they
    emit the end marker or reach ``max_len`` tokens (the latter are returned
    unfinished). With k=1 this is exactly greedy decoding.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    enc = encode(params, x_ids)
    live = [Hypothesis((), 0.0, initial_decoder_state(params, enc), False)]
    finished: list[Hypothesis] = []
    for _ in range(max_len):
        candidates = []
        for hyp in live:
            prev = hyp.tokens[-1] if hyp.tokens else end_id
            state, logits = decode_step(params, hyp.state, prev, enc)
            logp = log_softmax(logits)
            top = np.argsort(logp)[::-1][:k]
            for token in top:
                candidates.append(
                    (hyp.log_prob + float(logp[token]), int(token), hyp, state)
                )
        candidates.sort(key=lambda c: c[0], reverse=True)
        live = []
        for score, token, hyp, state in candidates[:k]:
            if token == end_id:
                finished.append(Hypothesis(hyp.tokens, score, state.hidden, True))
            else:
                live.append(Hypothesis(hyp.tokens + (token,), score, state.hidden, False))
        if not live:
            break
        if len(finished) >= k:
            bar = sorted(finished, key=lambda h: h.log_prob, reverse=True)[k - 1]
            if live[0].log_prob < bar.log_prob:
                break
    finished.extend(live)  # paths cut off at max_len
    finished.sort(key=lambda h: h.log_prob, reverse=True)
    return finished[:k]
