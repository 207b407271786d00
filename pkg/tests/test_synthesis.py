import numpy as np
import pytest

from unimelgan.dsp import Waveform, load_wav, save_wav
from unimelgan.dsp.features import write_feature_file
from unimelgan.dsp.spectral import MelSpectrogram
from unimelgan.errors import ShapeMismatchError
from unimelgan.synthesis import copy_synthesis, load_vocoder, vocode_file, vocode_mel
from unimelgan.trainer import build_state, save_checkpoint

from conftest import harmonic_utterance
from helpers import tiny_config


@pytest.fixture(scope="module")
def ckpt(tmp_path_factory):
    root = tmp_path_factory.mktemp("voc")
    cfg = tiny_config()
    state = build_state(cfg)
    path = root / "toy.ckpt"
    save_checkpoint(state, path)
    return path


def normalized_mel(rng, frames, bands=100):
    return MelSpectrogram(
        rng.normal(size=(bands, frames)), mean=-4.0, std=2.0, normalized=True
    )


class TestVocode:
    def test_101_frames_gives_25856_samples(self, ckpt, tmp_path, rng):
        feat = tmp_path / "u.umf"
        write_feature_file(feat, normalized_mel(rng, 101))
        out = vocode_file(ckpt, feat, tmp_path / "u.wav")
        assert len(out) == 25856
        assert out.sample_rate == 24000
        written = load_wav(tmp_path / "u.wav")
        assert len(written) == 25856

    def test_mismatched_band_count_rejected(self, ckpt, tmp_path, rng):
        feat = tmp_path / "bad.umf"
        write_feature_file(feat, normalized_mel(rng, 20, bands=80))
        with pytest.raises(ShapeMismatchError, match="80"):
            vocode_file(ckpt, feat, tmp_path / "bad.wav")

    def test_output_peak_safe(self, ckpt, rng):
        generator, _ = load_vocoder(ckpt)
        out = vocode_mel(generator, normalized_mel(rng, 40))
        assert np.max(np.abs(out.samples)) <= 1.0

    def test_length_law_arbitrary_frames(self, ckpt, rng):
        generator, _ = load_vocoder(ckpt)
        for frames in (1, 7, 33):
            out = vocode_mel(generator, normalized_mel(rng, frames))
            assert len(out) == 256 * frames


class TestCopySynthesis:
    def test_duration_within_one_hop(self, ckpt, tmp_path):
        wav_in = tmp_path / "in.wav"
        save_wav(Waveform(harmonic_utterance(seconds=1.0), 24000), wav_in)
        out, ref = copy_synthesis(ckpt, wav_in, tmp_path / "out.wav")
        assert abs(len(out) - 24000) <= 256
        assert abs(len(out) - len(ref)) <= 256

    def test_silence_vocodes_to_finite_output(self, ckpt, tmp_path):
        wav_in = tmp_path / "sil.wav"
        save_wav(Waveform(np.zeros(24000), 24000), wav_in)
        out, _ = copy_synthesis(ckpt, wav_in)
        assert np.all(np.isfinite(out.samples))
        assert len(out) > 0

    def test_deterministic(self, ckpt, tmp_path):
        wav_in = tmp_path / "d.wav"
        save_wav(Waveform(harmonic_utterance(seconds=0.5), 24000), wav_in)
        a, _ = copy_synthesis(ckpt, wav_in)
        b, _ = copy_synthesis(ckpt, wav_in)
        assert np.array_equal(a.samples, b.samples)
