"""Central finite-difference verification of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import ModelConfig, Parameters, PreparedSample, forward_loss, loss_and_gradients


@dataclass
class GradCheckResult:
    max_rel_error: float
    coords_checked: int
    worst_tensor: str
    worst_index: tuple
    worst_analytic: float
    worst_numeric: float

    def __str__(self):
        return (
            f"max relative error {self.max_rel_error:.3e} over "
            f"{self.coords_checked} coordinates "
            f"(worst: {self.worst_tensor}{list(self.worst_index)}, "
            f"analytic {self.worst_analytic:.6e}, numeric {self.worst_numeric:.6e})"
        )


def make_check_batch(
    config: ModelConfig, rng: np.random.Generator, batch_size: int = 2
) -> list[PreparedSample]:
    """Random id sequences with column-stochastic attention targets."""
    batch = []
    for _ in range(batch_size):
        t_l = int(rng.integers(4, 8))
        t_s = int(rng.integers(2, 5))
        x = np.concatenate(
            [
                rng.integers(0, config.source_vocab_size - 1, size=t_l),
                [config.source_vocab_size - 1],
            ]
        )
        y = np.concatenate(
            [
                rng.integers(0, config.target_vocab_size - 2, size=t_s),
                [config.target_vocab_size - 2],
            ]
        )
        target = rng.random((t_l + 1, t_s + 1))
        target /= target.sum(axis=0, keepdims=True)
        batch.append(PreparedSample(x, y, target))
    return batch


def finite_difference_check(
    params: Parameters,
    batch: Sequence[PreparedSample],
    lam: float,
    n_coords: int = 200,
    step: float = 1e-5,
    rng: Optional[np.random.Generator] = None,
    denominator_floor: float = 1e-4,
) -> GradCheckResult:
    """Compare analytic gradients against central differences.

    Samples at least ``n_coords`` coordinates with every tensor represented.
    The relative error denominator is floored so that coordinates with a
    near-zero true gradient are held to an absolute tolerance of
    floor * threshold instead of amplifying rounding noise.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    _, _, grads = loss_and_gradients(params, batch, lam)
    tensors = params.tensors()
    quota = max(2, -(-n_coords // len(tensors)))  # ceil division
    worst = GradCheckResult(-1.0, 0, "", (), 0.0, 0.0)
    checked = 0
    for name, arr in tensors.items():
        flat_indices = rng.choice(arr.size, size=min(quota, arr.size), replace=False)
        for flat in flat_indices:
            idx = np.unravel_index(flat, arr.shape)
            saved = arr[idx]
            arr[idx] = saved + step
            plus, _ = forward_loss(params, batch, lam)
            arr[idx] = saved - step
            minus, _ = forward_loss(params, batch, lam)
            arr[idx] = saved
            numeric = (plus - minus) / (2.0 * step)
            analytic = float(grads.tensors()[name][idx])
            denom = max(abs(analytic), abs(numeric), denominator_floor)
            rel = abs(analytic - numeric) / denom
            checked += 1
            if rel > worst.max_rel_error:
                worst = GradCheckResult(rel, 0, name, idx, analytic, numeric)
    worst.coords_checked = checked
    return worst
