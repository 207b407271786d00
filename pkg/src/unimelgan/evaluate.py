"""Benchmark and diagnostic tooling.

Real-time factor: wall time of the mel-to-waveform forward pass alone
(no model load, no file I/O) divided by the duration of the generated
audio; the median over several timed runs after warmup.

High-band diagnostic: quantifies over-smoothing of generated audio by
comparing STFT log magnitudes and energies over the 6-12 kHz band against
a reference. Callers should hand it loudness-matched signals.
"""

from __future__ import annotations

import json
import platform
import statistics
import time
from dataclasses import dataclass

import numpy as np
import torch

from .dsp.audio import Waveform
from .dsp.spectral import STFTParams, stft_magnitude
from .errors import InvalidInputError
from .models.generator import Generator

HIGHBAND_STFT = STFTParams(1024, 256, 1024)
LOG_FLOOR = 1e-7


@dataclass
class RTFReport:
    audio_seconds: float
    wall_seconds: float
    rtf: float
    runs: int
    warmup_runs: int
    device: str
    per_run_seconds: list[float]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=2)


def describe_device() -> str:
    return f"{platform.processor() or platform.machine()} / {platform.system()} / torch {torch.__version__}"


def benchmark_rtf(
    generator: Generator,
    duration_seconds: float,
    runs: int = 5,
    warmup: int = 1,
    seed: int = 0,
) -> RTFReport:
    """Median-of-runs real-time factor for `duration_seconds` of audio."""
    if runs < 3:
        raise InvalidInputError(f"need at least 3 timed runs, got {runs}")
    if warmup < 1:
        raise InvalidInputError("need at least 1 warmup run")
    if duration_seconds <= 0:
        raise InvalidInputError("duration must be positive")
    hop = generator.config.upsample_factor
    frames = max(1, round(duration_seconds * 24000 / hop))
    audio_seconds = frames * hop / 24000
    g = torch.Generator().manual_seed(seed)
    mel = torch.randn(1, generator.config.input_channels, frames, generator=g)

    with torch.no_grad():
        for _ in range(warmup):
            generator(mel)
        timings = []
        for _ in range(runs):
            start = time.perf_counter()
            generator(mel)
            timings.append(time.perf_counter() - start)
    wall = statistics.median(timings)
    return RTFReport(
        audio_seconds=audio_seconds,
        wall_seconds=wall,
        rtf=wall / audio_seconds,
        runs=runs,
        warmup_runs=warmup,
        device=describe_device(),
        per_run_seconds=timings,
    )


@dataclass
class HighBandReport:
    band_low_hz: float
    band_high_hz: float
    log_magnitude_distance: float
    band_energy_ratio: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True, indent=2)


def highband_distance(
    ref: Waveform,
    gen: Waveform,
    band: tuple[float, float] = (6000.0, 12000.0),
) -> HighBandReport:
    """Mean |delta log magnitude| and generated/reference energy ratio over
    the band. Lengths are aligned by truncation to the shorter signal."""
    if ref.sample_rate != gen.sample_rate:
        raise InvalidInputError(
            f"sample rates differ: {ref.sample_rate} vs {gen.sample_rate}"
        )
    n = min(len(ref), len(gen))
    if n < HIGHBAND_STFT.fft_size:
        raise InvalidInputError(f"need at least {HIGHBAND_STFT.fft_size} samples")
    ref_mag = stft_magnitude(Waveform(ref.samples[:n], ref.sample_rate), HIGHBAND_STFT)
    gen_mag = stft_magnitude(Waveform(gen.samples[:n], gen.sample_rate), HIGHBAND_STFT)
    bin_hz = np.arange(ref_mag.shape[0]) * ref.sample_rate / HIGHBAND_STFT.fft_size
    keep = (bin_hz >= band[0]) & (bin_hz <= band[1])
    ref_band, gen_band = ref_mag[keep], gen_mag[keep]
    distance = float(
        np.mean(
            np.abs(
                np.log(np.maximum(ref_band, LOG_FLOOR))
                - np.log(np.maximum(gen_band, LOG_FLOOR))
            )
        )
    )
    ref_energy = float(np.sum(ref_band**2))
    gen_energy = float(np.sum(gen_band**2))
    ratio = gen_energy / ref_energy if ref_energy > 0 else float("inf")
    return HighBandReport(
        band_low_hz=band[0],
        band_high_hz=band[1],
        log_magnitude_distance=distance,
        band_energy_ratio=ratio,
    )
