"""Deterministic audio preprocessing and feature extraction.

The pipeline order is: resample to 24 kHz, 50 Hz high-pass, loudness
normalization to -23 LUFS, log-mel extraction, utterance-wise
standardization. The high-pass runs before loudness measurement since
filtering changes the measured value.
"""

from .audio import (
    DEFAULT_HIGHPASS_HZ,
    TARGET_SAMPLE_RATE,
    Waveform,
    highpass,
    load_wav,
    resample,
    save_wav,
)
from .features import peek_frames, read_feature_file, write_feature_file
from .loudness import DEFAULT_TARGET_LUFS, measure_loudness, normalize_loudness
from .spectral import (
    DEFAULT_RESOLUTIONS,
    MelConfig,
    MelSpectrogram,
    STFTParams,
    denormalize_utterance,
    frame_count,
    mel_filterbank,
    mel_spectrogram,
    normalize_utterance,
    stft_magnitude,
)

__all__ = [
    "DEFAULT_HIGHPASS_HZ",
    "DEFAULT_RESOLUTIONS",
    "DEFAULT_TARGET_LUFS",
    "MelConfig",
    "MelSpectrogram",
    "STFTParams",
    "TARGET_SAMPLE_RATE",
    "Waveform",
    "denormalize_utterance",
    "frame_count",
    "highpass",
    "load_wav",
    "measure_loudness",
    "mel_filterbank",
    "mel_spectrogram",
    "normalize_loudness",
    "normalize_utterance",
    "peek_frames",
    "read_feature_file",
    "resample",
    "save_wav",
    "stft_magnitude",
    "write_feature_file",
]
