"""Shared fixtures: reduced-width configs and synthetic corpora."""

from pathlib import Path

from unimelgan.config import Config, TrainConfig
from unimelgan.data import DatasetManifest
from unimelgan.dsp import Waveform, save_wav
from unimelgan.models.discriminators import SpecDiscConfig, WaveDiscConfig
from unimelgan.models.generator import GeneratorConfig
from unimelgan.pipeline import preprocess_directory

from conftest import harmonic_utterance

TINY_GENERATOR = GeneratorConfig(channel_schedule=(16, 8, 4, 2))
SMALL_WAVE_DISC = WaveDiscConfig(
    down_channels=(32, 64, 64, 64), down_groups=(4, 8, 16, 16)
)
SMALL_SPEC_DISC = SpecDiscConfig(channels=8)


def tiny_config(**train_overrides) -> Config:
    train = dict(
        batch_size=2,
        segment_frames=16,
        pretrain_steps=2,
        total_steps=4,
        checkpoint_interval=0,
        seed=7,
    )
    train.update(train_overrides)
    return Config(
        generator=TINY_GENERATOR,
        wave_disc=SMALL_WAVE_DISC,
        spec_disc=SMALL_SPEC_DISC,
        train=TrainConfig(**train),
    )


def build_corpus(root, cfg: Config, specs=((220.0, 0.6), (330.0, 0.7))) -> DatasetManifest:
    """Synthesize a few harmonic utterances and push them through the real
    preprocessing pipeline; returns the resulting manifest."""
    root = Path(root)
    raw = root / "raw"
    raw.mkdir(parents=True, exist_ok=True)
    for i, (f0, seconds) in enumerate(specs):
        x = harmonic_utterance(seconds=seconds, f0=f0)
        save_wav(Waveform(x, 24000), raw / f"utt{i}.wav")
    return preprocess_directory(raw, root / "processed", cfg)
