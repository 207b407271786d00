"""Mel-to-waveform generator.

Fully convolutional: a boundary conv, three transposed-conv upsampling
stages (8x, 8x, 4x to cover the 256-sample hop), each followed by a stack
of dilated residual blocks and a channel-doubling conv feeding a gated
activation unit, then a boundary conv and tanh. Hidden widths default to
the enlarged 2048/1024/512/256 schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.nn.utils import parametrize

from ..dsp.spectral import MelSpectrogram
from ..errors import ConfigurationError, InvalidInputError, ShapeMismatchError
from ..torchutil import ReflectPad1d, apply_weight_norm, init_convs

LEAKY_SLOPE = 0.2
OUTPUT_HOP = 256


@dataclass(frozen=True)
class GeneratorConfig:
    input_channels: int = 100
    channel_schedule: tuple[int, ...] = (2048, 1024, 512, 256)
    upsample_rates: tuple[int, ...] = (8, 8, 4)
    residual_dilations: tuple[int, ...] = (1, 3, 9, 27)
    kernel_boundary: int = 7
    kernel_residual: int = 3
    upsample_kernel_factor: int = 2  # transposed-conv kernel = factor * stride
    gau_enabled: bool = True
    weight_normalization: bool = True
    init_std: float = 0.02

    def __post_init__(self) -> None:
        object.__setattr__(self, "channel_schedule", tuple(self.channel_schedule))
        object.__setattr__(self, "upsample_rates", tuple(self.upsample_rates))
        object.__setattr__(self, "residual_dilations", tuple(self.residual_dilations))
        self.validate()

    def validate(self) -> None:
        if len(self.channel_schedule) != len(self.upsample_rates) + 1:
            raise ConfigurationError(
                "channel_schedule length must be upsample_rates length + 1, got "
                f"{len(self.channel_schedule)} vs {len(self.upsample_rates)}"
            )
        if math.prod(self.upsample_rates) != OUTPUT_HOP:
            raise ConfigurationError(
                f"product of upsample_rates must equal the {OUTPUT_HOP}-sample hop, "
                f"got {math.prod(self.upsample_rates)}"
            )
        if any(c < 2 or c % 2 for c in self.channel_schedule):
            raise ConfigurationError("channel_schedule entries must be even and >= 2")
        if self.input_channels < 1:
            raise ConfigurationError("input_channels must be positive")
        if self.kernel_boundary % 2 == 0 or self.kernel_residual % 2 == 0:
            raise ConfigurationError("conv kernels must be odd for symmetric padding")
        if any(d < 1 for d in self.residual_dilations) or not self.residual_dilations:
            raise ConfigurationError("residual_dilations must be positive")
        if self.upsample_kernel_factor < 1:
            raise ConfigurationError("upsample_kernel_factor must be >= 1")
        for r in self.upsample_rates:
            if (r * (self.upsample_kernel_factor - 1)) % 2:
                raise ConfigurationError(
                    f"rate {r} with kernel factor {self.upsample_kernel_factor} "
                    "has no symmetric padding"
                )

    @property
    def upsample_factor(self) -> int:
        return math.prod(self.upsample_rates)


def gau(x: torch.Tensor) -> torch.Tensor:
    """Gated activation: split channels in half, tanh(a) * sigmoid(b)."""
    if x.dim() < 2:
        raise InvalidInputError("expected (..., channels, length) input")
    channels = x.size(-2)
    if channels % 2:
        raise InvalidInputError(f"gated activation needs an even channel count, got {channels}")
    a, b = x.chunk(2, dim=-2)
    return torch.tanh(a) * torch.sigmoid(b)


class GatedActivation(nn.Module):
    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return gau(x)


class ResidualBlock(nn.Module):
    """Dilated conv + pointwise conv with an identity skip."""

    def __init__(self, channels: int, kernel: int, dilation: int):
        super().__init__()
        self.body = nn.Sequential(
            nn.LeakyReLU(LEAKY_SLOPE),
            ReflectPad1d(dilation * (kernel - 1) // 2),
            nn.Conv1d(channels, channels, kernel, dilation=dilation),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv1d(channels, channels, 1),
        )

    def forward(self, x):
        return x + self.body(x)


class Generator(nn.Module):
    def __init__(self, config: GeneratorConfig = GeneratorConfig(), seed: int = 0):
        super().__init__()
        config.validate()
        self.config = config
        c = config.channel_schedule
        k_b, k_r = config.kernel_boundary, config.kernel_residual

        layers: list[nn.Module] = [
            ReflectPad1d((k_b - 1) // 2),
            nn.Conv1d(config.input_channels, c[0], k_b),
        ]
        for i, rate in enumerate(config.upsample_rates):
            kernel = config.upsample_kernel_factor * rate
            layers += [
                nn.LeakyReLU(LEAKY_SLOPE),
                nn.ConvTranspose1d(
                    c[i], c[i + 1], kernel, stride=rate, padding=(kernel - rate) // 2
                ),
            ]
            layers += [
                ResidualBlock(c[i + 1], k_r, d) for d in config.residual_dilations
            ]
            if config.gau_enabled:
                layers += [
                    ReflectPad1d((k_r - 1) // 2),
                    nn.Conv1d(c[i + 1], 2 * c[i + 1], k_r),
                    GatedActivation(),
                ]
        layers += [
            nn.LeakyReLU(LEAKY_SLOPE),
            ReflectPad1d((k_b - 1) // 2),
            nn.Conv1d(c[-1], 1, k_b),
            nn.Tanh(),
        ]
        self.network = nn.Sequential(*layers)
        init_convs(self, config.init_std, seed)
        if config.weight_normalization:
            apply_weight_norm(self)

    def forward(self, mel: torch.Tensor) -> torch.Tensor:
        """(B, input_channels, T) -> (B, 1, T * upsample_factor)."""
        if mel.dim() != 3 or mel.size(1) != self.config.input_channels:
            raise ShapeMismatchError(
                f"expected (batch, {self.config.input_channels}, frames) input, "
                f"got {tuple(mel.shape)}"
            )
        return self.network(mel)

    def remove_weight_norm(self) -> None:
        """Fuse the weight parametrization for faster inference."""
        for module in self.modules():
            if parametrize.is_parametrized(module, "weight"):
                parametrize.remove_parametrizations(module, "weight", leave_parametrized=True)


def build_generator(config: GeneratorConfig, seed: int = 0) -> Generator:
    return Generator(config, seed)


def generate(g: Generator, mel: MelSpectrogram) -> np.ndarray:
    """Vocode one normalized mel matrix; returns 256*T float samples in (-1, 1)."""
    if not mel.normalized:
        raise InvalidInputError("generator consumes normalized mel spectrograms")
    if mel.n_mels != g.config.input_channels:
        raise ShapeMismatchError(
            f"expected {g.config.input_channels} mel bands, got {mel.n_mels}"
        )
    with torch.no_grad():
        x = torch.from_numpy(np.ascontiguousarray(mel.values, dtype=np.float32))
        wav = g(x.unsqueeze(0))
    return wav.squeeze(0).squeeze(0).numpy().astype(np.float64)


def expected_parameter_count(config: GeneratorConfig) -> int:
    """Exact trainable-parameter count implied by the config.

    With weight normalization each conv holds its direction tensor (same
    element count as the plain weight), a per-output-row gain (size = dim-0
    of the weight), and the bias; without it, weight + bias.
    """
    wn = config.weight_normalization

    def conv1d(cin, cout, k):
        return cin * cout * k + cout + (cout if wn else 0)

    def tconv1d(cin, cout, k):
        # transposed conv weight layout is (cin, cout, k): the gain is per input row
        return cin * cout * k + cout + (cin if wn else 0)

    c = config.channel_schedule
    k_b, k_r = config.kernel_boundary, config.kernel_residual
    total = conv1d(config.input_channels, c[0], k_b)
    for i, rate in enumerate(config.upsample_rates):
        ch = c[i + 1]
        total += tconv1d(c[i], ch, config.upsample_kernel_factor * rate)
        total += len(config.residual_dilations) * (conv1d(ch, ch, k_r) + conv1d(ch, ch, 1))
        if config.gau_enabled:
            total += conv1d(ch, 2 * ch, k_r)
    total += conv1d(c[-1], 1, k_b)
    return total


def receptive_field(config: GeneratorConfig) -> int:
    """Output samples influenced by a single conditioning frame.

    Computed by exact interval propagation through every layer; the span is
    position-independent in the interior, so this is also the footprint the
    locality contract bounds.
    """
    config.validate()
    lo, hi = 0, 0
    grow = (config.kernel_boundary - 1) // 2
    lo, hi = lo - grow, hi + grow
    for rate in config.upsample_rates:
        kernel = config.upsample_kernel_factor * rate
        pad = (kernel - rate) // 2
        lo, hi = rate * lo - pad, rate * hi + kernel - 1 - pad
        for d in config.residual_dilations:
            grow = d * (config.kernel_residual - 1) // 2
            lo, hi = lo - grow, hi + grow
        if config.gau_enabled:
            grow = (config.kernel_residual - 1) // 2
            lo, hi = lo - grow, hi + grow
    grow = (config.kernel_boundary - 1) // 2
    lo, hi = lo - grow, hi + grow
    return hi - lo + 1
