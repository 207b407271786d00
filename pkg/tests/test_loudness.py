import logging

import numpy as np
import pytest

from unimelgan.dsp.audio import Waveform
from unimelgan.dsp.loudness import measure_loudness, normalize_loudness
from unimelgan.errors import InvalidAudioError, SilentAudioError

from conftest import SAMPLE_RATE, sine


def test_full_scale_997hz_conformance():
    # BS.1770 conformance point: 0 dBFS 997 Hz sine reads -3.01 LUFS.
    w = Waveform(sine(997, seconds=2.0), SAMPLE_RATE)
    assert measure_loudness(w) == pytest.approx(-3.01, abs=0.1)


def test_gain_linearity_above_gate():
    w = Waveform(sine(997, seconds=2.0, amplitude=0.9), SAMPLE_RATE)
    half = Waveform(w.samples * 0.5, SAMPLE_RATE)
    assert measure_loudness(w) - measure_loudness(half) == pytest.approx(6.02, abs=0.1)


def test_silence_gated_out():
    with pytest.raises(SilentAudioError):
        measure_loudness(Waveform(np.zeros(SAMPLE_RATE), SAMPLE_RATE))


def test_near_silence_below_absolute_gate():
    w = Waveform(sine(997, seconds=1.0, amplitude=1e-5), SAMPLE_RATE)
    with pytest.raises(SilentAudioError):
        measure_loudness(w)


def test_too_short_rejected():
    w = Waveform(sine(997, seconds=0.3), SAMPLE_RATE)
    with pytest.raises(InvalidAudioError):
        measure_loudness(w)


def test_works_at_other_sample_rates():
    w = Waveform(sine(997, seconds=2.0, sr=48000), 48000)
    assert measure_loudness(w) == pytest.approx(-3.01, abs=0.1)


class TestNormalize:
    def test_minus_13_to_minus_23(self):
        # A sine at -13 LUFS needs -10 dB of gain; nothing near clipping.
        amp = 10 ** ((-13.0 + 3.01) / 20)
        w = Waveform(sine(997, seconds=2.0, amplitude=amp), SAMPLE_RATE)
        out = normalize_loudness(w, -23.0)
        assert measure_loudness(out) == pytest.approx(-23.0, abs=0.1)
        gain = out.samples[1000] / w.samples[1000]
        assert 20 * np.log10(gain) == pytest.approx(-10.0, abs=0.2)

    def test_identity_when_already_at_target(self):
        amp = 10 ** ((-23.0 + 3.01) / 20)
        w = Waveform(sine(997, seconds=2.0, amplitude=amp), SAMPLE_RATE)
        out = normalize_loudness(w, -23.0)
        gain_db = 20 * np.log10(np.max(np.abs(out.samples)) / np.max(np.abs(w.samples)))
        assert abs(gain_db) < 0.1

    def test_gain_clamped_at_full_scale(self, caplog):
        # Very quiet input (a -63 LUFS tone) with an isolated 0.02 peak:
        # the +40 dB gain it needs would put the peak at 2.0, so the gain
        # is clamped so the peak lands at 1.0 instead.
        x = sine(997, seconds=2.0, amplitude=1e-3)
        x[SAMPLE_RATE] = 0.02
        w = Waveform(x, SAMPLE_RATE)
        needed_db = -23.0 - measure_loudness(w)
        assert needed_db == pytest.approx(40.0, abs=1.0)
        assert w.peak * 10 ** (needed_db / 20) == pytest.approx(2.0, abs=0.25)

        with caplog.at_level(logging.WARNING, logger="unimelgan.dsp.loudness"):
            out = normalize_loudness(w, -23.0)
        assert any("clamp" in r.message for r in caplog.records)
        assert out.peak <= 1.0 + 1e-12
        assert out.peak == pytest.approx(1.0, abs=1e-6)

    def test_pure_gain_preserves_waveshape(self):
        rng = np.random.default_rng(3)
        w = Waveform(rng.normal(size=SAMPLE_RATE) * 0.1, SAMPLE_RATE)
        out = normalize_loudness(w, -23.0)
        ratio = out.samples / w.samples
        assert np.allclose(ratio, ratio[0], rtol=1e-9)

    def test_silence_propagates(self):
        with pytest.raises(SilentAudioError):
            normalize_loudness(Waveform(np.zeros(SAMPLE_RATE), SAMPLE_RATE))
