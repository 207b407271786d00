"""STFT magnitudes, mel feature extraction, and utterance normalization.

Framing convention used everywhere in this package: frames are centered,
the signal is reflect-padded by fft_size // 2 on both sides, windows are
periodic Hann zero-padded symmetrically up to fft_size, so a signal of n
samples yields n // hop + 1 frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import (
    ConfigurationError,
    DegenerateStatisticsError,
    InvalidAudioError,
    InvalidInputError,
)
from .audio import Waveform


@dataclass(frozen=True)
class STFTParams:
    """One (fft_size, hop, window_length) analysis configuration."""

    fft_size: int
    hop: int
    window_length: int
    window: str = "hann"

    def __post_init__(self) -> None:
        if not (0 < self.hop <= self.window_length <= self.fft_size):
            raise ConfigurationError(
                "need 0 < hop <= window_length <= fft_size, got "
                f"hop={self.hop} window_length={self.window_length} fft_size={self.fft_size}"
            )
        if self.window != "hann":
            raise ConfigurationError(f"unsupported window {self.window!r}")

    @property
    def bins(self) -> int:
        return self.fft_size // 2 + 1


# The three analysis resolutions shared by the auxiliary loss and the
# spectrogram discriminators.
DEFAULT_RESOLUTIONS: tuple[STFTParams, ...] = (
    STFTParams(1024, 120, 600),
    STFTParams(2048, 240, 1200),
    STFTParams(512, 50, 240),
)


def hann_window(length: int) -> np.ndarray:
    """Periodic Hann window."""
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(length) / length))


def padded_window(p: STFTParams) -> np.ndarray:
    """Hann window of window_length, zero-padded symmetrically to fft_size."""
    w = hann_window(p.window_length)
    left = (p.fft_size - p.window_length) // 2
    out = np.zeros(p.fft_size)
    out[left : left + p.window_length] = w
    return out


def frame_count(n_samples: int, hop: int) -> int:
    return n_samples // hop + 1


def frame_signal(x: np.ndarray, p: STFTParams) -> np.ndarray:
    """Centered, reflect-padded frames of shape (n_frames, fft_size)."""
    if x.size < 2:
        raise InvalidAudioError("need at least 2 samples to frame with reflection")
    pad = p.fft_size // 2
    padded = np.pad(x, pad, mode="reflect")
    n_frames = frame_count(x.size, p.hop)
    view = np.lib.stride_tricks.sliding_window_view(padded, p.fft_size)
    return view[:: p.hop][:n_frames]


def stft_magnitude(w: Waveform, p: STFTParams) -> np.ndarray:
    """Magnitude spectrogram, shape (fft_size // 2 + 1, n_frames)."""
    if len(w) == 0:
        raise InvalidAudioError("cannot analyze an empty waveform")
    frames = frame_signal(w.samples, p)
    spec = np.fft.rfft(frames * padded_window(p), n=p.fft_size, axis=1)
    return np.abs(spec).T


@dataclass(frozen=True)
class MelConfig:
    """Feature-extraction settings: 100 mel bands over 0-12 kHz at 24 kHz."""

    n_mels: int = 100
    fmin: float = 0.0
    fmax: float = 12000.0
    fft_size: int = 1024
    hop: int = 256
    window_length: int = 1024
    sample_rate: int = 24000
    log_floor: float = 1e-5
    mel_scale: str = "htk"  # breakpoint spacing curve; filters are Slaney area-normalized

    def __post_init__(self) -> None:
        if self.n_mels < 1 or self.fmax <= self.fmin:
            raise ConfigurationError("invalid mel band layout")
        if self.fmax > self.sample_rate / 2:
            raise ConfigurationError(
                f"fmax {self.fmax} above Nyquist {self.sample_rate / 2}"
            )
        STFTParams(self.fft_size, self.hop, self.window_length)

    @property
    def stft(self) -> STFTParams:
        return STFTParams(self.fft_size, self.hop, self.window_length)


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def mel_filterbank(cfg: MelConfig) -> np.ndarray:
    """Triangular filterbank (n_mels, fft_size // 2 + 1).

    Breakpoints are uniform on the mel curve between fmin and fmax; each
    triangle is scaled by 2 / bandwidth so it has unit area.
    """
    if cfg.mel_scale != "htk":
        raise ConfigurationError(f"unsupported mel scale {cfg.mel_scale!r}")
    n_bins = cfg.fft_size // 2 + 1
    bin_hz = np.arange(n_bins) * cfg.sample_rate / cfg.fft_size
    edges = _mel_to_hz(np.linspace(_hz_to_mel(cfg.fmin), _hz_to_mel(cfg.fmax), cfg.n_mels + 2))
    fb = np.zeros((cfg.n_mels, n_bins))
    for m in range(cfg.n_mels):
        lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
        fb[m] *= 2.0 / (hi - lo)
    return fb


@dataclass
class MelSpectrogram:
    """Log-mel matrix (n_mels, T) plus its utterance statistics.

    `mean` and `std` are populated by normalize_utterance and allow an
    exact round-trip back to the unnormalized values.
    """

    values: np.ndarray
    mean: float | None = None
    std: float | None = None
    normalized: bool = False

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[1] < 1:
            raise InvalidInputError(f"expected (bands, T>=1) matrix, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidInputError("mel matrix contains non-finite entries")

    @property
    def n_mels(self) -> int:
        return self.values.shape[0]

    @property
    def frames(self) -> int:
        return self.values.shape[1]


def mel_spectrogram(w: Waveform, cfg: MelConfig = MelConfig()) -> MelSpectrogram:
    """Unnormalized log-mel features: ln(max(filterbank @ |STFT|, log_floor))."""
    if w.sample_rate != cfg.sample_rate:
        raise InvalidAudioError(
            f"expected {cfg.sample_rate} Hz input, got {w.sample_rate} Hz"
        )
    mag = stft_magnitude(w, cfg.stft)
    mel = mel_filterbank(cfg) @ mag
    return MelSpectrogram(np.log(np.maximum(mel, cfg.log_floor)))


def normalize_utterance(m: MelSpectrogram) -> MelSpectrogram:
    """Standardize to zero mean / unit variance over all entries jointly.

    One scalar mean and one scalar variance per utterance; the originals
    are stored on the result for denormalization.
    """
    if m.normalized:
        raise InvalidInputError("mel spectrogram is already normalized")
    if m.frames < 2:
        raise InvalidInputError("need at least 2 frames to normalize")
    mean = float(np.mean(m.values))
    std = float(np.std(m.values))
    if std < 1e-10 * max(1.0, abs(mean)):
        raise DegenerateStatisticsError(
            "zero-variance mel matrix cannot be standardized"
        )
    return MelSpectrogram((m.values - mean) / std, mean=mean, std=std, normalized=True)


def denormalize_utterance(m: MelSpectrogram) -> MelSpectrogram:
    """Invert normalize_utterance using the stored statistics."""
    if not m.normalized:
        raise InvalidInputError("mel spectrogram is not normalized")
    if m.mean is None or m.std is None:
        raise InvalidInputError("normalized mel spectrogram lost its statistics")
    return MelSpectrogram(m.values * m.std + m.mean, normalized=False)


def with_values(m: MelSpectrogram, values: np.ndarray) -> MelSpectrogram:
    """Same metadata, different matrix (used by file round-trips)."""
    out = MelSpectrogram(values, mean=m.mean, std=m.std, normalized=m.normalized)
    return out


__all__ = [
    "STFTParams",
    "DEFAULT_RESOLUTIONS",
    "hann_window",
    "padded_window",
    "frame_count",
    "frame_signal",
    "stft_magnitude",
    "MelConfig",
    "mel_filterbank",
    "MelSpectrogram",
    "mel_spectrogram",
    "normalize_utterance",
    "denormalize_utterance",
    "with_values",
]
