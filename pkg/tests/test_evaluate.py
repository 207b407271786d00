import json

import numpy as np
import pytest
import torch
from scipy import signal as sp_signal

from unimelgan.dsp.audio import Waveform
from unimelgan.errors import InvalidInputError
from unimelgan.evaluate import benchmark_rtf, highband_distance
from unimelgan.models.generator import build_generator

from helpers import TINY_GENERATOR


@pytest.fixture(scope="module")
def generator():
    return build_generator(TINY_GENERATOR, seed=0)


@pytest.fixture
def noise(rng):
    return Waveform(rng.normal(size=24000) * 0.1, 24000)


class TestRTF:
    def test_report_contract(self, generator):
        report = benchmark_rtf(generator, 0.5, runs=3, warmup=1)
        assert report.rtf > 0
        assert report.audio_seconds > 0
        assert report.warmup_runs == 1
        assert report.runs == 3
        assert len(report.per_run_seconds) == 3
        assert report.device
        parsed = json.loads(report.to_json())
        assert parsed["rtf"] == report.rtf

    def test_timing_excludes_model_load_and_io(self, generator):
        # The forward pass is timed on a preloaded in-memory feature; the
        # wall time must be consistent with the per-run medians.
        report = benchmark_rtf(generator, 0.25, runs=5, warmup=1)
        assert report.wall_seconds == sorted(report.per_run_seconds)[2]

    def test_rtf_matches_manual_timing_with_io_outside(self, tmp_path, rng):
        # Writing/reading the features before the timed region must not
        # change the measured rtf beyond run-to-run noise. The forward here
        # takes on the order of a second so scheduler jitter stays small.
        import time as time_mod

        from unimelgan.dsp.features import read_feature_file, write_feature_file
        from unimelgan.dsp.spectral import MelSpectrogram
        from unimelgan.models.generator import GeneratorConfig

        mid = build_generator(GeneratorConfig(channel_schedule=(256, 128, 64, 32)), seed=0)
        report = benchmark_rtf(mid, 2.0, runs=3, warmup=1)
        frames = round(2.0 * 24000 / 256)
        mel = MelSpectrogram(
            rng.normal(size=(100, frames)), mean=0.0, std=1.0, normalized=True
        )
        write_feature_file(tmp_path / "m.umf", mel)
        loaded = read_feature_file(tmp_path / "m.umf")
        x = torch.tensor(loaded.values, dtype=torch.float32).unsqueeze(0)
        with torch.no_grad():
            mid(x)
            timings = []
            for _ in range(3):
                t0 = time_mod.perf_counter()
                mid(x)
                timings.append(time_mod.perf_counter() - t0)
        manual_rtf = sorted(timings)[1] / (frames * 256 / 24000)
        assert abs(manual_rtf - report.rtf) / report.rtf < 0.5

    def test_too_few_runs_rejected(self, generator):
        with pytest.raises(InvalidInputError):
            benchmark_rtf(generator, 0.5, runs=2)

    def test_missing_warmup_rejected(self, generator):
        with pytest.raises(InvalidInputError):
            benchmark_rtf(generator, 0.5, runs=3, warmup=0)


class TestHighBand:
    def test_identity(self, noise):
        report = highband_distance(noise, noise)
        assert report.log_magnitude_distance == 0.0
        assert report.band_energy_ratio == pytest.approx(1.0)
        assert (report.band_low_hz, report.band_high_hz) == (6000.0, 12000.0)

    def test_half_amplitude_quarters_energy(self, noise):
        half = Waveform(noise.samples * 0.5, 24000)
        report = highband_distance(noise, half)
        assert report.band_energy_ratio == pytest.approx(0.25, abs=1e-3)

    def test_lowpassed_signal_loses_band_energy(self, noise):
        sos = sp_signal.butter(8, 6000.0, btype="lowpass", fs=24000, output="sos")
        filtered = Waveform(sp_signal.sosfiltfilt(sos, noise.samples), 24000)
        report = highband_distance(noise, filtered)
        assert report.band_energy_ratio < 0.1

    def test_sample_rate_mismatch_rejected(self, noise):
        other = Waveform(noise.samples[:12000], 22050)
        with pytest.raises(InvalidInputError):
            highband_distance(noise, other)

    def test_lengths_aligned_by_truncation(self, noise):
        longer = Waveform(np.concatenate([noise.samples, noise.samples[:5000]]), 24000)
        report = highband_distance(noise, longer)
        assert report.log_magnitude_distance == 0.0

    def test_distance_symmetric(self, rng, noise):
        other = Waveform(rng.normal(size=24000) * 0.1, 24000)
        a = highband_distance(noise, other)
        b = highband_distance(other, noise)
        assert a.log_magnitude_distance == pytest.approx(b.log_magnitude_distance, rel=1e-9)

    def test_distance_positive_for_different_signals(self, rng, noise):
        other = Waveform(rng.normal(size=24000) * 0.1, 24000)
        assert highband_distance(noise, other).log_magnitude_distance > 0

    def test_json_fields(self, noise):
        parsed = json.loads(highband_distance(noise, noise).to_json())
        assert set(parsed) == {
            "band_low_hz",
            "band_high_hz",
            "log_magnitude_distance",
            "band_energy_ratio",
        }
