"""Waveform and spectrogram discriminator banks.

Two families judge the generator output: K structurally identical 1-d
discriminators over progressively average-pooled waveforms, and M 2-d
discriminators over the linear STFT magnitudes of the M analysis
resolutions (the same magnitudes the auxiliary loss consumes).
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from ..dsp.spectral import STFTParams
from ..errors import ConfigurationError, InvalidInputError
from ..torchutil import apply_weight_norm, init_convs
from .generator import LEAKY_SLOPE


@dataclass(frozen=True)
class WaveDiscConfig:
    num_scales: int = 3
    pooling_kernel: int = 4
    pooling_stride: int = 2
    input_kernel: int = 15
    input_channels_out: int = 16
    down_kernel: int = 41
    down_stride: int = 4
    down_channels: tuple[int, ...] = (64, 256, 1024, 1024)
    down_groups: tuple[int, ...] = (4, 16, 64, 256)
    penultimate_kernel: int = 5
    output_kernel: int = 3
    weight_normalization: bool = True
    init_std: float = 0.02

    def __post_init__(self) -> None:
        object.__setattr__(self, "down_channels", tuple(self.down_channels))
        object.__setattr__(self, "down_groups", tuple(self.down_groups))
        if self.num_scales < 1:
            raise ConfigurationError("need at least one waveform discriminator")
        if len(self.down_channels) != len(self.down_groups):
            raise ConfigurationError("down_channels and down_groups must align")
        cin = self.input_channels_out
        for cout, groups in zip(self.down_channels, self.down_groups):
            if cin % groups or cout % groups:
                raise ConfigurationError(
                    f"groups {groups} must divide both {cin} and {cout}"
                )
            cin = cout

    @property
    def min_input_length(self) -> int:
        # Each pooling halves the length; the coarsest scale needs >= 1 sample.
        return 2 ** (self.num_scales - 1)


class WaveformDiscriminator(nn.Module):
    """MelGAN-style stack: wide input conv, grouped strided convs, 1-ch output."""

    def __init__(self, cfg: WaveDiscConfig):
        super().__init__()
        layers: list[nn.Module] = [
            nn.Conv1d(1, cfg.input_channels_out, cfg.input_kernel, padding=cfg.input_kernel // 2),
            nn.LeakyReLU(LEAKY_SLOPE),
        ]
        cin = cfg.input_channels_out
        for cout, groups in zip(cfg.down_channels, cfg.down_groups):
            layers += [
                nn.Conv1d(
                    cin,
                    cout,
                    cfg.down_kernel,
                    stride=cfg.down_stride,
                    groups=groups,
                    padding=cfg.down_kernel // 2,
                ),
                nn.LeakyReLU(LEAKY_SLOPE),
            ]
            cin = cout
        layers += [
            nn.Conv1d(cin, cin, cfg.penultimate_kernel, padding=cfg.penultimate_kernel // 2),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv1d(cin, 1, cfg.output_kernel, padding=cfg.output_kernel // 2),
        ]
        self.network = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.network(x)


@dataclass
class ScoreMap:
    """One discriminator's per-window outputs plus its provenance."""

    values: torch.Tensor
    source: str


class WaveformDiscriminatorBank(nn.Module):
    def __init__(self, cfg: WaveDiscConfig = WaveDiscConfig(), seed: int = 1):
        super().__init__()
        self.config = cfg
        self.discriminators = nn.ModuleList(
            WaveformDiscriminator(cfg) for _ in range(cfg.num_scales)
        )
        self.pooling = nn.AvgPool1d(
            cfg.pooling_kernel, stride=cfg.pooling_stride, padding=1
        )
        init_convs(self, cfg.init_std, seed)
        if cfg.weight_normalization:
            apply_weight_norm(self)

    def pooled_inputs(self, x: torch.Tensor) -> list[torch.Tensor]:
        """The waveform each scale sees: scale k is pooled k times."""
        outs = [x]
        for _ in range(self.config.num_scales - 1):
            outs.append(self.pooling(outs[-1]))
        return outs

    def forward(self, x: torch.Tensor) -> list[ScoreMap]:
        if x.dim() != 3 or x.size(1) != 1:
            raise InvalidInputError(f"expected (batch, 1, samples), got {tuple(x.shape)}")
        if x.size(-1) < self.config.min_input_length:
            raise InvalidInputError(
                f"waveform of {x.size(-1)} samples is shorter than the "
                f"{self.config.min_input_length}-sample minimum for "
                f"{self.config.num_scales} scales"
            )
        return [
            ScoreMap(disc(inp), source=f"wave_scale_{k}")
            for k, (disc, inp) in enumerate(
                zip(self.discriminators, self.pooled_inputs(x))
            )
        ]


@dataclass(frozen=True)
class SpecDiscConfig:
    num_resolutions: int = 3
    channels: int = 32
    groups: int = 1
    dilation: int = 1
    kernel_main: int = 9
    kernel_tail: int = 3
    temporal_stride: int = 2
    strided_layers: int = 3
    weight_normalization: bool = True
    init_std: float = 0.02

    def __post_init__(self) -> None:
        if self.num_resolutions < 0:
            raise ConfigurationError("num_resolutions must be >= 0 (0 disables the family)")
        if self.channels < 1 or self.channels % self.groups:
            raise ConfigurationError("channels must be positive and divisible by groups")
        if self.kernel_main % 2 == 0 or self.kernel_tail % 2 == 0:
            raise ConfigurationError("kernels must be odd for symmetric padding")


class SpectrogramDiscriminator(nn.Module):
    """2-d critic over one (frequency, time) magnitude matrix.

    Six conv layers; the middle three stride the time axis by 2 while the
    frequency axis keeps stride 1.
    """

    def __init__(self, cfg: SpecDiscConfig):
        super().__init__()
        k, kt = cfg.kernel_main, cfg.kernel_tail
        ch, d = cfg.channels, cfg.dilation
        pad = d * (k - 1) // 2
        layers: list[nn.Module] = [
            nn.Conv2d(1, ch, k, padding=pad, dilation=d, groups=1),
            nn.LeakyReLU(LEAKY_SLOPE),
        ]
        for _ in range(cfg.strided_layers):
            layers += [
                nn.Conv2d(
                    ch,
                    ch,
                    k,
                    stride=(1, cfg.temporal_stride),
                    padding=pad,
                    dilation=d,
                    groups=cfg.groups,
                ),
                nn.LeakyReLU(LEAKY_SLOPE),
            ]
        layers += [
            nn.Conv2d(ch, ch, kt, padding=(kt - 1) // 2, groups=cfg.groups),
            nn.LeakyReLU(LEAKY_SLOPE),
            nn.Conv2d(ch, 1, kt, padding=(kt - 1) // 2),
        ]
        self.network = nn.Sequential(*layers)

    def forward(self, mag: torch.Tensor) -> torch.Tensor:
        return self.network(mag)


class SpectrogramDiscriminatorBank(nn.Module):
    """One 2-d discriminator per STFT resolution, consuming linear magnitudes."""

    def __init__(
        self,
        resolutions: tuple[STFTParams, ...],
        cfg: SpecDiscConfig = SpecDiscConfig(),
        seed: int = 2,
    ):
        super().__init__()
        if cfg.num_resolutions != len(resolutions):
            raise ConfigurationError(
                f"config expects {cfg.num_resolutions} resolutions, got {len(resolutions)}"
            )
        self.config = cfg
        self.resolutions = tuple(resolutions)
        self.discriminators = nn.ModuleList(
            SpectrogramDiscriminator(cfg) for _ in resolutions
        )
        init_convs(self, cfg.init_std, seed)
        if cfg.weight_normalization:
            apply_weight_norm(self)

    def forward(self, magnitudes: list[torch.Tensor]) -> list[ScoreMap]:
        if len(magnitudes) != len(self.discriminators):
            raise ConfigurationError(
                f"got {len(magnitudes)} magnitude matrices for "
                f"{len(self.discriminators)} discriminators"
            )
        out = []
        for m, (disc, mag) in enumerate(zip(self.discriminators, magnitudes)):
            if mag.dim() == 3:  # (B, bins, frames) -> (B, 1, bins, frames)
                mag = mag.unsqueeze(1)
            out.append(ScoreMap(disc(mag), source=f"spec_resolution_{m}"))
        return out
