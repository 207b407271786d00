"""Training objectives.

Auxiliary loss: for each analysis resolution, spectral convergence
(normalized Frobenius distance between magnitude spectrograms) plus mean
absolute log-magnitude distance, averaged over resolutions.

Adversarial losses: least-squares form. The generator pushes all K + M
discriminator score maps toward 1 with weight lambda / (K + M) on top of
the auxiliary loss; discriminators push real toward 1 and fake toward 0,
averaged over the K + M family. With an empty spectrogram family both
objectives reduce to the waveform-only baseline with normalizer K.

Expectations are realized as arithmetic means over score-map elements and
batch items; Frobenius / L1 norms are taken per batch item and averaged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import torch
from torch import nn

from .dsp.spectral import DEFAULT_RESOLUTIONS, STFTParams
from .errors import ConfigurationError, InvalidInputError
from .models.discriminators import ScoreMap
from .torchutil import reflect_pad_1d

# Linear magnitudes never drop below this, so logs stay finite on silence.
MAGNITUDE_FLOOR = 1e-7
DEFAULT_LAMBDA = 2.5


def stft_magnitude_torch(x: torch.Tensor, p: STFTParams, window: torch.Tensor | None = None) -> torch.Tensor:
    """Differentiable magnitude spectrogram, (B, bins, frames).

    Same framing convention as the numpy front-end: centered frames over a
    reflect-padded signal, periodic Hann window, frames = n // hop + 1.
    """
    squeeze = x.dim() == 1
    if squeeze:
        x = x.unsqueeze(0)
    if x.dim() != 2:
        raise InvalidInputError(f"expected (batch, samples) waveforms, got {tuple(x.shape)}")
    if window is None:
        window = torch.hann_window(p.window_length, periodic=True, dtype=x.dtype, device=x.device)
    padded = reflect_pad_1d(x, p.fft_size // 2)
    spec = torch.stft(
        padded,
        n_fft=p.fft_size,
        hop_length=p.hop,
        win_length=p.window_length,
        window=window,
        center=False,
        return_complex=True,
    )
    power = spec.real**2 + spec.imag**2
    # Smooth floor: keeps gradients alive when the estimate is near-silent
    # (a hard clamp would zero them) while flooring silence at exactly 1e-7.
    return torch.sqrt(power + MAGNITUDE_FLOOR**2)


class MultiResolutionSTFT(nn.Module):
    """Shared magnitude front-end for the auxiliary loss and the
    spectrogram discriminators: call once per waveform per step and hand
    the resulting list to both consumers."""

    def __init__(self, resolutions: Sequence[STFTParams] = DEFAULT_RESOLUTIONS):
        super().__init__()
        if not resolutions:
            raise ConfigurationError("need at least one STFT resolution")
        self.resolutions = tuple(resolutions)
        for i, p in enumerate(self.resolutions):
            self.register_buffer(
                f"window_{i}",
                torch.hann_window(p.window_length, periodic=True, dtype=torch.float64),
            )

    def forward(self, x: torch.Tensor) -> list[torch.Tensor]:
        out = []
        for i, p in enumerate(self.resolutions):
            window = getattr(self, f"window_{i}").to(x.dtype)
            out.append(stft_magnitude_torch(x, p, window))
        return out


def _as_batched(x: torch.Tensor) -> torch.Tensor:
    return x.unsqueeze(0) if x.dim() == 1 else x


def spectral_convergence_from_mags(ref: torch.Tensor, gen: torch.Tensor) -> torch.Tensor:
    num = torch.linalg.matrix_norm(ref - gen, ord="fro")
    den = torch.linalg.matrix_norm(ref, ord="fro")
    return (num / den).mean()


def log_magnitude_from_mags(ref: torch.Tensor, gen: torch.Tensor) -> torch.Tensor:
    log_ref = torch.log(torch.clamp(ref, min=MAGNITUDE_FLOOR))
    log_gen = torch.log(torch.clamp(gen, min=MAGNITUDE_FLOOR))
    return torch.mean(torch.abs(log_ref - log_gen))


def _check_pair(x: torch.Tensor, xh: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    if x.shape[-1] != xh.shape[-1]:
        raise InvalidInputError(
            f"waveform lengths differ: {x.shape[-1]} vs {xh.shape[-1]}"
        )
    return _as_batched(x), _as_batched(xh)


def spectral_convergence(x: torch.Tensor, xh: torch.Tensor, p: STFTParams) -> torch.Tensor:
    """|| |STFT(x)| - |STFT(xh)| ||_F / || |STFT(x)| ||_F, averaged over the batch."""
    x, xh = _check_pair(x, xh)
    if not torch.any(x != 0):
        raise ZeroDivisionError("spectral convergence is undefined for an all-zero reference")
    return spectral_convergence_from_mags(stft_magnitude_torch(x, p), stft_magnitude_torch(xh, p))


def log_stft_magnitude(x: torch.Tensor, xh: torch.Tensor, p: STFTParams) -> torch.Tensor:
    """Mean absolute distance between log magnitude spectrograms."""
    x, xh = _check_pair(x, xh)
    return log_magnitude_from_mags(stft_magnitude_torch(x, p), stft_magnitude_torch(xh, p))


@dataclass
class StftLossTerms:
    """Per-resolution components of the auxiliary loss (detached floats)."""

    sc_per_resolution: list[float] = field(default_factory=list)
    mag_per_resolution: list[float] = field(default_factory=list)

    @property
    def aux(self) -> float:
        m = len(self.sc_per_resolution)
        return sum(s + g for s, g in zip(self.sc_per_resolution, self.mag_per_resolution)) / m


def multires_stft_loss_from_mags(
    ref_mags: Sequence[torch.Tensor], gen_mags: Sequence[torch.Tensor]
) -> tuple[torch.Tensor, StftLossTerms]:
    if len(ref_mags) != len(gen_mags) or not ref_mags:
        raise ConfigurationError("mismatched or empty magnitude lists")
    terms = StftLossTerms()
    total = None
    for ref, gen in zip(ref_mags, gen_mags):
        sc = spectral_convergence_from_mags(ref, gen)
        mag = log_magnitude_from_mags(ref, gen)
        terms.sc_per_resolution.append(float(sc.detach()))
        terms.mag_per_resolution.append(float(mag.detach()))
        total = sc + mag if total is None else total + sc + mag
    return total / len(ref_mags), terms


def multires_stft_loss(
    x: torch.Tensor,
    xh: torch.Tensor,
    resolutions: Sequence[STFTParams] = DEFAULT_RESOLUTIONS,
) -> tuple[torch.Tensor, StftLossTerms]:
    """Mean over resolutions of (spectral convergence + log magnitude)."""
    x, xh = _check_pair(x, xh)
    if not torch.any(x != 0):
        raise ZeroDivisionError("auxiliary loss is undefined for an all-zero reference")
    ref = [stft_magnitude_torch(x, p) for p in resolutions]
    gen = [stft_magnitude_torch(xh, p) for p in resolutions]
    return multires_stft_loss_from_mags(ref, gen)


def _values(score) -> torch.Tensor:
    return score.values if isinstance(score, ScoreMap) else score


def score_penalty(scores: Sequence, target: float) -> torch.Tensor:
    """Sum over score maps of mean squared distance to `target`."""
    total = torch.tensor(0.0)
    for s in scores:
        v = _values(s)
        total = total + torch.mean((v - target) ** 2)
    return total


def generator_loss(
    aux: torch.Tensor,
    fake_wave_scores: Sequence,
    fake_spec_scores: Sequence,
    lambda_weight: float = DEFAULT_LAMBDA,
) -> torch.Tensor:
    """aux + lambda / (K + M) * sum of mean((score - 1)^2) over both families."""
    families = len(fake_wave_scores) + len(fake_spec_scores)
    if families == 0:
        raise ConfigurationError("generator loss needs at least one discriminator")
    adv = score_penalty(fake_wave_scores, 1.0) + score_penalty(fake_spec_scores, 1.0)
    return aux + (lambda_weight / families) * adv


def discriminator_loss(
    real_wave_scores: Sequence,
    fake_wave_scores: Sequence,
    real_spec_scores: Sequence,
    fake_spec_scores: Sequence,
) -> torch.Tensor:
    """1 / (K + M) * sum of [mean((D(real) - 1)^2) + mean(D(fake)^2)]."""
    if len(real_wave_scores) != len(fake_wave_scores):
        raise ConfigurationError(
            f"waveform family mismatch: {len(real_wave_scores)} real vs "
            f"{len(fake_wave_scores)} fake"
        )
    if len(real_spec_scores) != len(fake_spec_scores):
        raise ConfigurationError(
            f"spectrogram family mismatch: {len(real_spec_scores)} real vs "
            f"{len(fake_spec_scores)} fake"
        )
    families = len(real_wave_scores) + len(real_spec_scores)
    if families == 0:
        raise ConfigurationError("discriminator loss needs at least one discriminator")
    total = (
        score_penalty(real_wave_scores, 1.0)
        + score_penalty(fake_wave_scores, 0.0)
        + score_penalty(real_spec_scores, 1.0)
        + score_penalty(fake_spec_scores, 0.0)
    )
    return total / families


def baseline_generator_loss(
    aux: torch.Tensor, fake_wave_scores: Sequence, lambda_weight: float = DEFAULT_LAMBDA
) -> torch.Tensor:
    """Waveform-only objective: the general form with an empty spectrogram family."""
    return generator_loss(aux, fake_wave_scores, (), lambda_weight)


def baseline_discriminator_loss(
    real_wave_scores: Sequence, fake_wave_scores: Sequence
) -> torch.Tensor:
    return discriminator_loss(real_wave_scores, fake_wave_scores, (), ())


@dataclass
class LossBreakdown:
    """Every component of one optimization step, as plain floats."""

    sc_per_resolution: list[float]
    mag_per_resolution: list[float]
    aux: float
    adv_wave: float
    adv_spec: float
    total_g: float
    total_d: float
    lambda_weight: float

    def to_record(self) -> dict:
        return {
            "sc_per_resolution": self.sc_per_resolution,
            "mag_per_resolution": self.mag_per_resolution,
            "aux": self.aux,
            "adv_wave": self.adv_wave,
            "adv_spec": self.adv_spec,
            "total_g": self.total_g,
            "total_d": self.total_d,
            "lambda": self.lambda_weight,
        }

    def all_finite(self) -> bool:
        import math

        values = (
            self.sc_per_resolution
            + self.mag_per_resolution
            + [self.aux, self.adv_wave, self.adv_spec, self.total_g, self.total_d]
        )
        return all(math.isfinite(v) for v in values)
