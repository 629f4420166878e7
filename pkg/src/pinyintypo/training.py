"""Minibatch training of the joint objective with moment-based updates.

Each corpus sample is prepared once: token ids on both sides plus the
normalized alignment target built from its best segmentation and the
transition model. Training then runs seeded minibatch passes, logging the
per-iteration mean cross entropy and attention penalty to an append-only
TSV. Single-threaded (BLAS included) so that equal seeds give bitwise-equal
checkpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

try:
    from threadpoolctl import threadpool_limits
except ImportError:  # pragma: no cover - threadpoolctl ships with scipy stacks
    from contextlib import nullcontext

    def threadpool_limits(limits=None):
        return nullcontext()

from .alignment import build_alignment, normalize_alignment
from .checkpoint import save_checkpoint
from .errors import TrainingDiverged
from .keystrokes import TransitionModel
from .lexicon import Lexicon
from .model import ModelConfig, Parameters, PreparedSample, loss_and_gradients
from .noise import Sample
from .segmentation import best_segmentation


@dataclass
class TrainSpec:
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    lr_decay_factor: float = 1.0  # applied every lr_decay_every iterations
    lr_decay_every: int = 0  # 0: constant learning rate
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 64
    iterations: int = 1000
    attention_loss_weight: float = 1.0
    grad_clip: float = 5.0
    checkpoint_every: int = 0  # 0: only the final checkpoint is written
    checkpoint_path: Optional[str] = None
    log_path: Optional[str] = None

    def __post_init__(self):
        if self.optimizer != "adam":
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.attention_loss_weight < 0:
            raise ValueError("attention_loss_weight must be >= 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not 0.0 < self.lr_decay_factor <= 1.0:
            raise ValueError("lr_decay_factor must lie in (0, 1]")


@dataclass
class Checkpoint:
    params: Parameters
    config: ModelConfig


def prepare_samples(
    corpus: Sequence[Sample], lexicon: Lexicon, pt: TransitionModel
) -> list[PreparedSample]:
    """Token ids plus the normalized alignment target for every sample."""
    prepared = []
    for sample in corpus:
        x = np.array(lexicon.encode_source(sample.source), dtype=np.intp)
        y = np.array(lexicon.encode_target(sample.target), dtype=np.intp)
        seg = best_segmentation(sample.source, sample.target)
        target = normalize_alignment(
            build_alignment(sample.source, sample.target, seg, pt)
        ).values
        prepared.append(PreparedSample(x, y, target))
    return prepared


class AdamOptimizer:
    """Adaptive-moment updates with global gradient-norm clipping."""

    def __init__(self, params: Parameters, spec: TrainSpec):
        self.spec = spec
        self.step_count = 0
        self.m = {n: np.zeros_like(a) for n, a in params.tensors().items()}
        self.v = {n: np.zeros_like(a) for n, a in params.tensors().items()}

    def step(self, params: Parameters, grads: Parameters, scale: float = 1.0):
        spec = self.spec
        tensors = params.tensors()
        gtensors = grads.tensors()
        sq = 0.0
        for g in gtensors.values():
            sq += float(np.sum((scale * g) ** 2))
        norm = np.sqrt(sq)
        clip = 1.0
        if spec.grad_clip > 0 and norm > spec.grad_clip:
            clip = spec.grad_clip / norm
        self.step_count += 1
        t = self.step_count
        b1, b2 = spec.adam_beta1, spec.adam_beta2
        correction = np.sqrt(1.0 - b2**t) / (1.0 - b1**t)
        lr = spec.learning_rate * correction
        if spec.lr_decay_every > 0:
            lr *= spec.lr_decay_factor ** (t // spec.lr_decay_every)
        for name, p in tensors.items():
            g = gtensors[name] * (scale * clip)
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * m / (np.sqrt(v) + spec.adam_eps)


def train(
    corpus: Sequence[Sample],
    lexicon: Lexicon,
    pt: TransitionModel,
    config: ModelConfig,
    spec: TrainSpec,
    progress: Optional[Callable[[int, float, float], None]] = None,
) -> Checkpoint:
    """Train from scratch on the corpus; returns the final checkpoint.

    Deterministic given ``config.seed``: it drives both the parameter
    initialization and the minibatch order. Aborts with TrainingDiverged if
    the loss goes non-finite. With iterations == 0, the initial checkpoint
    is emitted as-is.
    """
    if not corpus:
        raise ValueError("corpus is empty")
    samples = prepare_samples(corpus, lexicon, pt)
    params = Parameters.init(config)
    optimizer = AdamOptimizer(params, spec)
    lam = spec.attention_loss_weight
    order_rng = np.random.default_rng(config.seed + 1)
    order: list[int] = []
    log_file = open(spec.log_path, "a", encoding="utf-8") if spec.log_path else None
    try:
        with threadpool_limits(limits=1):
            for iteration in range(1, spec.iterations + 1):
                while len(order) < spec.batch_size:
                    order.extend(order_rng.permutation(len(samples)))
                idx, order = order[: spec.batch_size], order[spec.batch_size :]
                batch = [samples[i] for i in idx]
                ce, attn, grads = loss_and_gradients(params, batch, lam)
                n = len(batch)
                mean_ce = ce / n
                mean_attn = attn / n
                mean_total = mean_ce + lam * mean_attn
                if not np.isfinite(mean_total):
                    raise TrainingDiverged(iteration)
                if log_file:
                    log_file.write(
                        f"{iteration}\t{mean_ce:.6f}\t{mean_attn:.6f}\t{mean_total:.6f}\n"
                    )
                if progress:
                    progress(iteration, mean_ce, mean_attn)
                optimizer.step(params, grads, scale=1.0 / n)
                if (
                    spec.checkpoint_every
                    and spec.checkpoint_path
                    and iteration % spec.checkpoint_every == 0
                ):
                    save_checkpoint(params, config, spec.checkpoint_path)
    finally:
        if log_file:
            log_file.close()
    if spec.checkpoint_path:
        save_checkpoint(params, config, spec.checkpoint_path)
    return Checkpoint(params, config)
