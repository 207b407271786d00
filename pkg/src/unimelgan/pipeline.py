"""File-level preprocessing: WAV in, aligned (processed WAV, features) out.

Order is fixed: resample to the working rate, 50 Hz high-pass, loudness
normalization, then feature extraction. A manifest covering every
successfully processed utterance is written alongside the outputs.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .config import Config
from .data import DatasetManifest, ManifestEntry
from .dsp import (
    MelSpectrogram,
    Waveform,
    highpass,
    load_wav,
    mel_spectrogram,
    normalize_loudness,
    normalize_utterance,
    resample,
    save_wav,
    write_feature_file,
)
from .errors import DegenerateStatisticsError, InvalidAudioError, SilentAudioError

logger = logging.getLogger(__name__)


def preprocess_waveform(
    w: Waveform, cfg: Config, lenient: bool = False
) -> tuple[Waveform, MelSpectrogram]:
    """Full pipeline on one in-memory waveform; returns the processed audio
    and its normalized features.

    With `lenient` set, digital silence passes through instead of raising:
    no loudness gain is applied and the all-floor mel matrix is carried
    with identity statistics (mean = floor value, std = 1).
    """
    w = resample(w, cfg.preprocess.sample_rate)
    w = highpass(w, cfg.preprocess.highpass_hz)
    try:
        w = normalize_loudness(w, cfg.preprocess.target_lufs)
    except SilentAudioError:
        if not lenient:
            raise
    raw = mel_spectrogram(w, cfg.mel)
    try:
        mel = normalize_utterance(raw)
    except DegenerateStatisticsError:
        if not lenient:
            raise
        constant = float(raw.values.flat[0])
        mel = MelSpectrogram(
            raw.values - constant, mean=constant, std=1.0, normalized=True
        )
    return w, mel


def preprocess_file(path, out_dir, cfg: Config) -> ManifestEntry:
    out_dir = Path(out_dir)
    w, mel = preprocess_waveform(load_wav(path), cfg)
    stem = Path(path).stem
    wave_path = out_dir / f"{stem}.wav"
    feature_path = out_dir / f"{stem}.umf"
    save_wav(w, wave_path)
    write_feature_file(feature_path, mel)
    return ManifestEntry(str(wave_path), str(feature_path), mel.frames)


def preprocess_directory(in_dir, out_dir, cfg: Config) -> DatasetManifest:
    """Process every .wav under `in_dir`; unusable files (silent, shorter
    than one loudness gating block, corrupt) are skipped with a warning."""
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for path in sorted(in_dir.glob("*.wav")):
        try:
            entries.append(preprocess_file(path, out_dir, cfg))
        except SilentAudioError:
            logger.warning("skipping %s: below the loudness gate", path.name)
        except InvalidAudioError as e:
            logger.warning("skipping %s: %s", path.name, e)
    manifest = DatasetManifest(entries)
    manifest.save(out_dir / "manifest.tsv")
    return manifest
