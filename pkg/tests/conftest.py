import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("ci", deadline=None, max_examples=25)
settings.load_profile("ci")

SAMPLE_RATE = 24000


def sine(freq, seconds=1.0, sr=SAMPLE_RATE, amplitude=1.0, phase=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return amplitude * np.sin(2.0 * np.pi * freq * t + phase)


def faded_tone(sr, seconds=1.0, freq=1000.0, fade=0.02, amplitude=1.0):
    """Sine with raised-cosine fades, defined as a pure function of time so
    the same analytic signal can be sampled at any rate."""
    t = np.arange(int(round(seconds * sr))) / sr
    u = np.clip(np.minimum(t, seconds - t) / fade, 0.0, 1.0)
    env = 0.5 - 0.5 * np.cos(np.pi * u)
    return amplitude * env * np.sin(2.0 * np.pi * freq * t)


def harmonic_utterance(seconds=1.0, sr=SAMPLE_RATE, f0=220.0, harmonics=5, fade=0.02):
    """Synthetic voiced tone: fundamental plus `harmonics` overtones."""
    t = np.arange(int(round(seconds * sr))) / sr
    u = np.clip(np.minimum(t, seconds - t) / fade, 0.0, 1.0)
    env = 0.5 - 0.5 * np.cos(np.pi * u)
    x = np.zeros_like(t)
    for k in range(1, harmonics + 2):
        x += np.sin(2.0 * np.pi * k * f0 * t) / k
    x /= np.max(np.abs(x))
    return 0.6 * env * x


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
