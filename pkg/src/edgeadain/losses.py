"""Content, style and edge losses and their weighted total.

Each distance is a mean squared error, so the losses are smooth at zero.
All functions accept torch tensors and stay differentiable.
"""
import math
from dataclasses import dataclass

import torch

from .core import DEFAULT_EPS, channel_stats

DEFAULT_WEIGHTS = (1.0, 0.05, 0.05)


@dataclass(frozen=True)
class LossWeights:
    alpha: float = DEFAULT_WEIGHTS[0]
    beta: float = DEFAULT_WEIGHTS[1]
    gamma: float = DEFAULT_WEIGHTS[2]

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("loss weights must be >= 0")


@dataclass(frozen=True)
class LossReport:
    content: float
    style: float
    edge: float
    total: float


def _mse(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    return ((a - b) ** 2).mean()


def _check_pairs(a, b):
    if len(a) != len(b):
        raise ValueError(f"tap count mismatch: {len(a)} vs {len(b)}")


def content_loss(reencoded, adacs_target):
    return _mse(reencoded, adacs_target)


def style_loss(output_taps, style_taps, eps=DEFAULT_EPS):
    _check_pairs(output_taps, style_taps)
    total = 0.0
    for out, sty in zip(output_taps, style_taps):
        if out.shape[-3] != sty.shape[-3]:
            raise ValueError(f"channel mismatch: {out.shape[-3]} vs {sty.shape[-3]}")
        o_mean, o_std = channel_stats(out, eps)
        s_mean, s_std = channel_stats(sty, eps)
        total = total + _mse(o_mean, s_mean) + _mse(o_std, s_std)
    return total


def edge_loss(output_taps, edge_taps):
    _check_pairs(output_taps, edge_taps)
    total = 0.0
    for out, edg in zip(output_taps, edge_taps):
        total = total + _mse(out, edg)
    return total


def total_loss(lc, ls, le, weights=LossWeights()):
    """Weighted sum ``alpha*lc + beta*ls + gamma*le``.

    Floats give a :class:`LossReport`; tensors give a differentiable tensor.
    """
    for name, value in (("content", lc), ("style", ls), ("edge", le)):
        value = value.item() if isinstance(value, torch.Tensor) else float(value)
        if not math.isfinite(value):
            raise FloatingPointError(f"non-finite {name} loss: {value}")
    total = weights.alpha * lc + weights.beta * ls + weights.gamma * le
    if isinstance(total, torch.Tensor):
        return total
    return LossReport(float(lc), float(ls), float(le), float(total))
