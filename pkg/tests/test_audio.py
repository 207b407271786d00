import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import signal as sp_signal
from scipy.io import wavfile

from unimelgan.dsp.audio import Waveform, highpass, load_wav, resample, save_wav
from unimelgan.errors import InvalidAudioError

from conftest import SAMPLE_RATE, faded_tone, sine


class TestWaveform:
    def test_rejects_non_mono(self):
        with pytest.raises(InvalidAudioError):
            Waveform(np.zeros((2, 100)), 24000)

    def test_rejects_nan(self):
        with pytest.raises(InvalidAudioError):
            Waveform(np.array([0.0, np.nan]), 24000)

    def test_rejects_bad_rate(self):
        with pytest.raises(InvalidAudioError):
            Waveform(np.zeros(10), 0)

    def test_duration(self):
        assert Waveform(np.zeros(12000), 24000).duration == 0.5


class TestWavIO:
    def test_pcm16_roundtrip(self, tmp_path):
        w = Waveform(faded_tone(24000, seconds=0.25), 24000)
        save_wav(w, tmp_path / "t.wav")
        back = load_wav(tmp_path / "t.wav")
        assert back.sample_rate == 24000
        assert len(back) == len(w)
        assert np.max(np.abs(back.samples - w.samples)) < 1.0 / 32767

    def test_float32_input(self, tmp_path):
        x = faded_tone(48000, seconds=0.1).astype(np.float32)
        wavfile.write(tmp_path / "f.wav", 48000, x)
        w = load_wav(tmp_path / "f.wav")
        assert w.sample_rate == 48000
        assert np.allclose(w.samples, x, atol=1e-7)

    def test_stereo_downmix(self, tmp_path):
        left = sine(440, seconds=0.1)
        right = sine(880, seconds=0.1)
        stereo = np.stack([left, right], axis=1).astype(np.float32)
        wavfile.write(tmp_path / "s.wav", 24000, stereo)
        w = load_wav(tmp_path / "s.wav")
        assert np.allclose(w.samples, (left + right) / 2, atol=1e-7)

    def test_empty_file_rejected(self, tmp_path):
        wavfile.write(tmp_path / "e.wav", 24000, np.zeros(0, dtype=np.int16))
        with pytest.raises(InvalidAudioError):
            load_wav(tmp_path / "e.wav")


class TestResample:
    def test_2_to_1_decimation_length(self):
        w = Waveform(np.random.default_rng(0).normal(size=48000) * 0.1, 48000)
        out = resample(w, 24000)
        assert len(out) == 24000
        assert out.sample_rate == 24000

    def test_identity_unchanged(self):
        x = faded_tone(24000, seconds=0.2)
        out = resample(Waveform(x, 24000), 24000)
        assert np.array_equal(out.samples, x)

    def test_sine_44k1_to_24k_matches_analytic(self):
        # Faded 1 kHz tone sampled from the same analytic function at both
        # rates; fades keep the boundary well-posed so the whole output is
        # comparable sample by sample.
        w = Waveform(faded_tone(44100), 44100)
        out = resample(w, 24000)
        ref = faded_tone(24000)[: len(out)]
        assert len(out) == 24000
        assert np.max(np.abs(out.samples - ref)) < 1e-3

    def test_pure_sine_steady_state(self):
        # Away from the first/last few samples (where the continuation of a
        # hard-truncated sine is unknowable) the error is far below 1e-3.
        w = Waveform(sine(1000, sr=44100), 44100)
        out = resample(w, 24000)
        ref = sine(1000, seconds=len(out) / 24000)[: len(out)]
        assert np.max(np.abs(out.samples - ref)[32:-32]) < 1e-3

    def test_duration_preserved_within_one_sample(self):
        for n in (1000, 12345, 44100):
            w = Waveform(np.random.default_rng(n).normal(size=n) * 0.1, 44100)
            out = resample(w, 24000)
            assert abs(len(out) / 24000 - n / 44100) <= 1.0 / 24000

    def test_empty_rejected(self):
        with pytest.raises(InvalidAudioError):
            resample(Waveform(np.zeros(0), 48000), 24000)


class TestHighpass:
    def test_dc_rejection(self):
        w = Waveform(np.full(SAMPLE_RATE, 0.5), SAMPLE_RATE)
        out = highpass(w)
        tail = out.samples[SAMPLE_RATE // 2 :]
        assert np.sqrt(np.mean(tail**2)) < 0.005

    def test_dc_attenuation_exceeds_40db(self):
        w = Waveform(np.full(SAMPLE_RATE, 0.5), SAMPLE_RATE)
        out = highpass(w)
        residual = np.abs(np.mean(out.samples[SAMPLE_RATE // 2 :]))
        assert residual < 0.5 * 10 ** (-40 / 20)

    def test_cutoff_is_minus_3db(self):
        w = Waveform(sine(50, seconds=3.0), SAMPLE_RATE)
        out = highpass(w)
        amp = np.max(np.abs(out.samples[SAMPLE_RATE:]))
        assert abs(20 * np.log10(amp) - (-3.01)) < 0.5

    def test_1khz_passband_analytic(self):
        # Oracle: the filter's transfer function evaluated at 1 kHz.
        sos = sp_signal.butter(2, 50, btype="highpass", fs=SAMPLE_RATE, output="sos")
        _, resp = sp_signal.sosfreqz(sos, worN=[1000.0], fs=SAMPLE_RATE)
        expected_db = 20 * np.log10(np.abs(resp[0]))
        assert abs(expected_db) < 0.5

        w = Waveform(sine(1000, seconds=1.0), SAMPLE_RATE)
        out = highpass(w)
        measured_db = 20 * np.log10(np.max(np.abs(out.samples[SAMPLE_RATE // 2 :])))
        assert abs(measured_db - expected_db) < 0.1

    @given(
        a=st.floats(-2, 2, allow_nan=False),
        b=st.floats(-2, 2, allow_nan=False),
    )
    def test_linearity(self, a, b):
        rng = np.random.default_rng(7)
        x = rng.normal(size=2048) * 0.1
        y = rng.normal(size=2048) * 0.1
        lhs = highpass(Waveform(a * x + b * y, SAMPLE_RATE)).samples
        rhs = a * highpass(Waveform(x, SAMPLE_RATE)).samples + b * highpass(
            Waveform(y, SAMPLE_RATE)
        ).samples
        assert np.max(np.abs(lhs - rhs)) < 1e-6
