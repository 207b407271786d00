"""Small torch helpers shared by the generator, discriminators, and losses."""

from __future__ import annotations

import torch
from torch import nn
from torch.nn.utils.parametrizations import weight_norm


def reflect_pad_1d(x: torch.Tensor, pad: int) -> torch.Tensor:
    """Reflect-pad the last dimension, allowing pad >= length.

    Equivalent to numpy's 'reflect' mode: the signal is extended by
    repeated even reflection about its endpoints. Differentiable (pure
    indexing). Falls back to the native op when it applies.
    """
    if pad < 0:
        raise ValueError(f"pad must be non-negative, got {pad}")
    if pad == 0:
        return x
    n = x.size(-1)
    if pad < n:
        return torch.nn.functional.pad(x, (pad, pad), mode="reflect")
    if n == 1:
        idx = torch.zeros(1 + 2 * pad, dtype=torch.long, device=x.device)
        return x.index_select(-1, idx)
    period = 2 * (n - 1)
    idx = torch.arange(-pad, n + pad, device=x.device) % period
    idx = torch.where(idx >= n, period - idx, idx)
    return x.index_select(-1, idx)


class ReflectPad1d(nn.Module):
    """nn.ReflectionPad1d replacement that tolerates inputs shorter than pad."""

    def __init__(self, pad: int):
        super().__init__()
        self.pad = pad

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return reflect_pad_1d(x, self.pad)

    def extra_repr(self) -> str:
        return str(self.pad)


def init_convs(root: nn.Module, std: float, seed: int) -> None:
    """Seeded re-initialization of every conv, in module order.

    Weights draw from N(0, std); biases keep the stock uniform
    (+-1/sqrt(fan_in)) law but from the same seeded generator, so builds
    are reproducible without silencing the initial signal path.
    """
    g = torch.Generator().manual_seed(seed)
    for m in root.modules():
        if isinstance(m, (nn.Conv1d, nn.ConvTranspose1d, nn.Conv2d)):
            m.weight.data.normal_(0.0, std, generator=g)
            if m.bias is not None:
                fan_in = m.weight.size(1) * m.weight[0][0].numel()
                bound = 1.0 / (fan_in**0.5)
                m.bias.data.uniform_(-bound, bound, generator=g)


def apply_weight_norm(root: nn.Module) -> None:
    for m in root.modules():
        if isinstance(m, (nn.Conv1d, nn.ConvTranspose1d, nn.Conv2d)):
            weight_norm(m)
