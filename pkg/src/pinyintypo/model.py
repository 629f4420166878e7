"""Character-to-syllable encoder-decoder with supervised attention.

A bidirectional gated-recurrent encoder reads the letter sequence; the
decoder attends over encoder states with a one-hidden-layer scorer,
advances its own recurrence on [previous-token embedding; context], and
projects [state; context; previous-token embedding] to syllable logits.
The training objective is teacher-forced cross entropy plus, per sample,
the squared distance between the attention stack and a constructed
alignment target, weighted by ``lam``.

Everything runs in float64. The sequence-level heavy lifting is delegated
to the selected kernel lane (see ``pinyintypo.kernels``).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .kernels.reference import sigmoid


@dataclass
class ModelConfig:
    embed_dim: int = 256
    hidden_dim: int = 128
    source_vocab_size: int = 27
    target_vocab_size: int = 412
    attention_dim: int = 0  # 0 means: use hidden_dim
    max_decode_length: int = 20
    init_range: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.attention_dim == 0:
            self.attention_dim = self.hidden_dim
        for name in (
            "embed_dim",
            "hidden_dim",
            "source_vocab_size",
            "target_vocab_size",
            "attention_dim",
            "max_decode_length",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class Parameters:
    """All trainable tensors, in fixed manifest order."""

    src_embed: np.ndarray
    enc_fwd_wx: np.ndarray
    enc_fwd_wh: np.ndarray
    enc_fwd_b: np.ndarray
    enc_bwd_wx: np.ndarray
    enc_bwd_wh: np.ndarray
    enc_bwd_b: np.ndarray
    dec_wx: np.ndarray
    dec_wh: np.ndarray
    dec_b: np.ndarray
    tgt_embed: np.ndarray
    attn_wd: np.ndarray
    attn_we: np.ndarray
    attn_b: np.ndarray
    attn_v: np.ndarray
    init_w: np.ndarray
    init_b: np.ndarray
    out_w: np.ndarray
    out_b: np.ndarray

    def tensors(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @staticmethod
    def shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
        e, h, a = config.embed_dim, config.hidden_dim, config.attention_dim
        vs, vt = config.source_vocab_size, config.target_vocab_size
        return {
            "src_embed": (vs, e),
            "enc_fwd_wx": (3 * h, e),
            "enc_fwd_wh": (3 * h, h),
            "enc_fwd_b": (3 * h,),
            "enc_bwd_wx": (3 * h, e),
            "enc_bwd_wh": (3 * h, h),
            "enc_bwd_b": (3 * h,),
            "dec_wx": (3 * h, e + 2 * h),
            "dec_wh": (3 * h, h),
            "dec_b": (3 * h,),
            "tgt_embed": (vt, e),
            "attn_wd": (a, h),
            "attn_we": (a, 2 * h),
            "attn_b": (a,),
            "attn_v": (a,),
            "init_w": (h, h),
            "init_b": (h,),
            "out_w": (vt, 3 * h + e),
            "out_b": (vt,),
        }

    @classmethod
    def init(cls, config: ModelConfig) -> "Parameters":
        """Uniform initialization in [-init_range, init_range], seeded."""
        rng = np.random.default_rng(config.seed)
        r = config.init_range
        arrays = {
            name: rng.uniform(-r, r, size=shape)
            for name, shape in cls.shapes(config).items()
        }
        return cls(**arrays)

    @classmethod
    def zeros(cls, config: ModelConfig) -> "Parameters":
        return cls(**{n: np.zeros(s) for n, s in cls.shapes(config).items()})


@dataclass
class EncoderStates:
    """Concatenated forward/backward states, one row per source position."""

    states: np.ndarray  # (T_x, 2H)
    backward_first: np.ndarray  # (H,), seeds the decoder's initial state


@dataclass
class DecoderState:
    hidden: np.ndarray
    attention: np.ndarray
    context: np.ndarray
    distribution: np.ndarray


@dataclass(frozen=True)
class PreparedSample:
    """Token ids (end marker included on both sides) plus the attention
    target in (source positions x decoder steps) orientation."""

    x: np.ndarray
    y: np.ndarray
    target: Optional[np.ndarray] = None


def softmax(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max())
    return e / e.sum()


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def gru_cell(wx, wh, b, u, h_prev):
    """Single recurrence step; must match the sequence kernels exactly."""
    h = wh.shape[1]
    pre = wx @ u + b
    z = sigmoid(pre[:h] + wh[:h] @ h_prev)
    r = sigmoid(pre[h : 2 * h] + wh[h : 2 * h] @ h_prev)
    cand = np.tanh(pre[2 * h :] + wh[2 * h :] @ (r * h_prev))
    return (1.0 - z) * h_prev + z * cand


def encode(params: Parameters, x_ids: Sequence[int]) -> EncoderStates:
    """Bidirectional encoding of a source id sequence (end marker last)."""
    x = np.asarray(x_ids, dtype=np.intp)
    if x.ndim != 1 or len(x) == 0:
        raise ValueError("source must be a nonempty id sequence")
    if x.min() < 0 or x.max() >= params.src_embed.shape[0]:
        raise ValueError(f"source id out of range 0..{params.src_embed.shape[0] - 1}")
    xemb = params.src_embed[x]
    h = params.enc_fwd_wh.shape[1]
    h0 = np.zeros(h)
    fwd, _ = kernels.gru_seq_forward(
        params.enc_fwd_wx, params.enc_fwd_wh, params.enc_fwd_b, xemb, h0
    )
    bwd_rev, _ = kernels.gru_seq_forward(
        params.enc_bwd_wx,
        params.enc_bwd_wh,
        params.enc_bwd_b,
        np.ascontiguousarray(xemb[::-1]),
        h0,
    )
    bwd = bwd_rev[::-1]
    return EncoderStates(np.ascontiguousarray(np.hstack([fwd, bwd])), bwd[0].copy())


def initial_decoder_state(params: Parameters, enc: EncoderStates) -> np.ndarray:
    return np.tanh(params.init_w @ enc.backward_first + params.init_b)


def attend(params: Parameters, d_prev: np.ndarray, enc: EncoderStates):
    """Attention weights over source positions and the resulting context."""
    estates = enc.states if isinstance(enc, EncoderStates) else enc
    act = np.tanh(estates @ params.attn_we.T + params.attn_wd @ d_prev + params.attn_b)
    alpha = softmax(act @ params.attn_v)
    return alpha, alpha @ estates


def decode_step(
    params: Parameters, d_prev: np.ndarray, y_prev: int, enc: EncoderStates
):
    """One decoder step: attend, advance the recurrence, project to logits."""
    vt = params.tgt_embed.shape[0]
    if not 0 <= y_prev < vt:
        raise ValueError(f"target id {y_prev} out of range 0..{vt - 1}")
    alpha, ctx = attend(params, d_prev, enc)
    emb = params.tgt_embed[y_prev]
    d = gru_cell(params.dec_wx, params.dec_wh, params.dec_b, np.concatenate([emb, ctx]), d_prev)
    logits = params.out_w @ np.concatenate([d, ctx, emb]) + params.out_b
    return DecoderState(d, alpha, ctx, softmax(logits)), logits


def _run_sample(params: Parameters, sample: PreparedSample):
    """Forward pass of one sample; returns everything backward needs."""
    x = sample.x
    y = sample.y
    xemb = params.src_embed[x]
    h = params.enc_fwd_wh.shape[1]
    h0 = np.zeros(h)
    fwd, fwd_gates = kernels.gru_seq_forward(
        params.enc_fwd_wx, params.enc_fwd_wh, params.enc_fwd_b, xemb, h0
    )
    xemb_rev = np.ascontiguousarray(xemb[::-1])
    bwd_rev, bwd_gates = kernels.gru_seq_forward(
        params.enc_bwd_wx, params.enc_bwd_wh, params.enc_bwd_b, xemb_rev, h0
    )
    bwd = bwd_rev[::-1]
    estates = np.ascontiguousarray(np.hstack([fwd, bwd]))
    d0_pre = params.init_w @ bwd[0] + params.init_b
    d0 = np.tanh(d0_pre)
    # Teacher forcing: the end marker doubles as the start symbol.
    y_in = np.concatenate([y[-1:], y[:-1]])
    yemb = np.ascontiguousarray(params.tgt_embed[y_in])
    p_mat = np.ascontiguousarray(estates @ params.attn_we.T)
    d_states, alphas, contexts, gates, tanh_cache = kernels.decoder_seq_forward(
        params.dec_wx,
        params.dec_wh,
        params.dec_b,
        params.attn_wd,
        params.attn_b,
        params.attn_v,
        p_mat,
        estates,
        yemb,
        d0,
    )
    return {
        "xemb": xemb,
        "xemb_rev": xemb_rev,
        "fwd": fwd,
        "fwd_gates": fwd_gates,
        "bwd": bwd,
        "bwd_rev": bwd_rev,
        "bwd_gates": bwd_gates,
        "estates": estates,
        "d0": d0,
        "y_in": y_in,
        "yemb": yemb,
        "p_mat": p_mat,
        "d_states": d_states,
        "alphas": alphas,
        "contexts": contexts,
        "gates": gates,
        "tanh_cache": tanh_cache,
    }


def _batched_projection(params: Parameters, runs, batch):
    """Output projection and cross entropy over all samples in one matmul."""
    feats = [np.hstack([r["d_states"], r["contexts"], r["yemb"]]) for r in runs]
    feats_all = np.vstack(feats)
    logits_all = feats_all @ params.out_w.T + params.out_b
    logp_all = log_softmax(logits_all)
    y_all = np.concatenate([s.y for s in batch])
    offsets = np.zeros(len(batch) + 1, dtype=np.intp)
    np.cumsum([len(s.y) for s in batch], out=offsets[1:])
    token_logp = logp_all[np.arange(len(y_all)), y_all]
    ce_per = -np.add.reduceat(token_logp, offsets[:-1])
    return feats, feats_all, logp_all, y_all, offsets, ce_per


def _attention_penalty(alphas: np.ndarray, target: np.ndarray):
    """Squared distance between the attention stack and its target, plus the
    gradient with respect to the attention weights."""
    delta = alphas - target.T
    return float(np.sum(delta * delta)), 2.0 * delta


def forward_loss(params: Parameters, batch: Sequence[PreparedSample], lam: float):
    """Total loss over a batch and each sample's produced attention matrix.

    Per sample: cross entropy of the teacher-forced target sequence, plus
    ``lam`` times the squared attention-target distance when the sample
    carries a target. Produced matrices are returned in (source x steps)
    orientation, matching the alignment targets.
    """
    runs = [_run_sample(params, sample) for sample in batch]
    _, _, _, _, _, ce_per = _batched_projection(params, runs, batch)
    total = float(ce_per.sum())
    produced = []
    for sample, run in zip(batch, runs):
        if sample.target is not None:
            penalty, _ = _attention_penalty(run["alphas"], sample.target)
            total += lam * penalty
        produced.append(run["alphas"].T.copy())
    return total, produced


def loss_and_gradients(
    params: Parameters, batch: Sequence[PreparedSample], lam: float
):
    """Summed loss components and their exact gradients over a batch.

    Returns (cross_entropy_sum, attention_penalty_sum, gradient Parameters).
    The attention penalty is accumulated (and differentiated) only for
    samples carrying a target; with lam == 0 it is still reported for
    monitoring but contributes nothing to the gradients.
    """
    grads = {name: np.zeros_like(arr) for name, arr in params.tensors().items()}
    h = params.enc_fwd_wh.shape[1]
    attn_total = 0.0
    runs = [_run_sample(params, sample) for sample in batch]
    _, feats_all, logp_all, y_all, offsets, ce_per = _batched_projection(
        params, runs, batch
    )
    ce_total = float(ce_per.sum())
    dlogits_all = np.exp(logp_all)
    dlogits_all[np.arange(len(y_all)), y_all] -= 1.0
    grads["out_w"] += dlogits_all.T @ feats_all
    grads["out_b"] += dlogits_all.sum(axis=0)
    dfeats_all = dlogits_all @ params.out_w
    for idx, (sample, run) in enumerate(zip(batch, runs)):
        dfeats = dfeats_all[offsets[idx] : offsets[idx + 1]]
        dalpha_ext = np.zeros_like(run["alphas"])
        if sample.target is not None:
            penalty, dpen = _attention_penalty(run["alphas"], sample.target)
            attn_total += penalty
            if lam != 0.0:
                dalpha_ext = lam * dpen
        (
            d_dec_wx,
            d_dec_wh,
            d_dec_b,
            d_attn_wd,
            d_attn_b,
            d_attn_v,
            d_p,
            d_estates,
            d_yemb,
            d_d0,
        ) = kernels.decoder_seq_backward(
            params.dec_wx,
            params.dec_wh,
            params.attn_wd,
            params.attn_v,
            run["estates"],
            run["yemb"],
            run["d0"],
            run["d_states"],
            run["alphas"],
            run["contexts"],
            run["gates"],
            run["tanh_cache"],
            np.ascontiguousarray(dfeats[:, :h]),
            np.ascontiguousarray(dfeats[:, h : 3 * h]),
            dalpha_ext,
        )
        grads["dec_wx"] += d_dec_wx
        grads["dec_wh"] += d_dec_wh
        grads["dec_b"] += d_dec_b
        grads["attn_wd"] += d_attn_wd
        grads["attn_b"] += d_attn_b
        grads["attn_v"] += d_attn_v
        d_yemb = d_yemb + dfeats[:, 3 * h :]
        np.add.at(grads["tgt_embed"], run["y_in"], d_yemb)
        grads["attn_we"] += d_p.T @ run["estates"]
        d_estates = d_estates + d_p @ params.attn_we
        # initial decoder state: d0 = tanh(init_w @ bwd[0] + init_b)
        d0 = run["d0"]
        d_pre0 = d_d0 * (1.0 - d0 * d0)
        grads["init_w"] += np.outer(d_pre0, run["bwd"][0])
        grads["init_b"] += d_pre0
        d_bwd = d_estates[:, h:].copy()
        d_bwd[0] += params.init_w.T @ d_pre0
        d_fwd_wx, d_fwd_wh, d_fwd_b, d_x_fwd, _ = kernels.gru_seq_backward(
            params.enc_fwd_wx,
            params.enc_fwd_wh,
            run["xemb"],
            np.zeros(h),
            run["fwd"],
            run["fwd_gates"],
            np.ascontiguousarray(d_estates[:, :h]),
        )
        d_bwd_wx, d_bwd_wh, d_bwd_b, d_x_bwd_rev, _ = kernels.gru_seq_backward(
            params.enc_bwd_wx,
            params.enc_bwd_wh,
            run["xemb_rev"],
            np.zeros(h),
            run["bwd_rev"],
            run["bwd_gates"],
            np.ascontiguousarray(d_bwd[::-1]),
        )
        grads["enc_fwd_wx"] += d_fwd_wx
        grads["enc_fwd_wh"] += d_fwd_wh
        grads["enc_fwd_b"] += d_fwd_b
        grads["enc_bwd_wx"] += d_bwd_wx
        grads["enc_bwd_wh"] += d_bwd_wh
        grads["enc_bwd_b"] += d_bwd_b
        np.add.at(grads["src_embed"], sample.x, d_x_fwd + d_x_bwd_rev[::-1])
    return ce_total, attn_total, Parameters(**grads)


def backward(params: Parameters, batch: Sequence[PreparedSample], lam: float) -> Parameters:
    """Gradients of the joint objective; rejects non-finite results by name."""
    _, _, grads = loss_and_gradients(params, batch, lam)
    for name, arr in grads.tensors().items():
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(f"non-finite gradient in tensor {name!r}")
    return grads
