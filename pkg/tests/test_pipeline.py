import logging

import numpy as np
import pytest

from unimelgan.dsp import Waveform, load_wav, measure_loudness, save_wav
from unimelgan.pipeline import preprocess_directory, preprocess_waveform
from unimelgan.errors import SilentAudioError

from conftest import harmonic_utterance
from helpers import tiny_config


def test_waveform_pipeline_outputs(rng):
    cfg = tiny_config()
    w = Waveform(harmonic_utterance(seconds=1.0, sr=48000), 48000)
    processed, mel = preprocess_waveform(w, cfg)
    assert processed.sample_rate == 24000
    assert measure_loudness(processed) == pytest.approx(-23.0, abs=0.1)
    assert mel.normalized
    assert mel.n_mels == 100
    assert mel.frames == len(processed) // 256 + 1


def test_strict_mode_rejects_silence():
    cfg = tiny_config()
    with pytest.raises(SilentAudioError):
        preprocess_waveform(Waveform(np.zeros(24000), 24000), cfg)


def test_lenient_mode_carries_silence():
    cfg = tiny_config()
    processed, mel = preprocess_waveform(
        Waveform(np.zeros(24000), 24000), cfg, lenient=True
    )
    assert mel.normalized
    assert np.all(mel.values == 0.0)
    assert mel.std == 1.0


def test_directory_skips_unusable_files(tmp_path, caplog):
    cfg = tiny_config()
    raw = tmp_path / "raw"
    raw.mkdir()
    save_wav(Waveform(harmonic_utterance(seconds=0.8), 24000), raw / "good.wav")
    save_wav(Waveform(np.zeros(24000), 24000), raw / "silent.wav")
    save_wav(Waveform(harmonic_utterance(seconds=0.2), 24000), raw / "short.wav")
    with caplog.at_level(logging.WARNING, logger="unimelgan.pipeline"):
        manifest = preprocess_directory(raw, tmp_path / "out", cfg)
    assert len(manifest.entries) == 1
    assert "good" in manifest.entries[0].wave_path
    skipped = [r.message for r in caplog.records]
    assert any("silent" in m for m in skipped)
    assert any("short" in m for m in skipped)
    manifest.validate()
    w = load_wav(manifest.entries[0].wave_path)
    assert measure_loudness(w) == pytest.approx(-23.0, abs=0.1)
