"""Inference: feature files or raw audio in, 24 kHz waveforms out."""

from __future__ import annotations

import logging

import numpy as np
import torch

from .checkpoint import read_checkpoint
from .config import Config, parse_config
from .dsp import MelSpectrogram, Waveform, load_wav, read_feature_file, save_wav
from .errors import ShapeMismatchError
from .models.generator import Generator
from .pipeline import preprocess_waveform
from .trainer import _load_module

logger = logging.getLogger(__name__)


def load_vocoder(ckpt_path, fuse: bool = True) -> tuple[Generator, Config]:
    """Generator (eval mode) plus the run config stored in the checkpoint."""
    meta, arrays = read_checkpoint(ckpt_path)
    cfg = parse_config(meta["config_text"])
    generator = Generator(cfg.generator, seed=0)
    _load_module(generator, "generator", arrays, ckpt_path)
    if fuse:
        generator.remove_weight_norm()
    generator.eval()
    return generator, cfg


def vocode_mel(generator: Generator, mel: MelSpectrogram) -> Waveform:
    """Run the generator and clamp into [-1, 1] (clamped samples are logged)."""
    with torch.no_grad():
        x = torch.as_tensor(
            np.ascontiguousarray(mel.values, dtype=np.float32)
        ).unsqueeze(0)
        out = generator(x).squeeze(0).squeeze(0).numpy().astype(np.float64)
    clamped = int(np.count_nonzero(np.abs(out) > 1.0))
    if clamped:
        logger.info("clamped %d of %d samples to [-1, 1]", clamped, out.size)
    return Waveform(np.clip(out, -1.0, 1.0), 24000)


def vocode_file(ckpt_path, feature_path, out_path=None) -> Waveform:
    """Vocode one feature file; checks its header against the checkpoint."""
    generator, cfg = load_vocoder(ckpt_path)
    mel = read_feature_file(feature_path)
    if mel.n_mels != cfg.mel.n_mels or mel.n_mels != cfg.generator.input_channels:
        raise ShapeMismatchError(
            f"{feature_path}: n_mels={mel.n_mels} but checkpoint expects "
            f"mel.n_mels={cfg.mel.n_mels} / generator.input_channels="
            f"{cfg.generator.input_channels}"
        )
    wav = vocode_mel(generator, mel)
    if out_path is not None:
        save_wav(wav, out_path)
    return wav


def copy_synthesis(ckpt_path, wav_in, out_path=None) -> tuple[Waveform, Waveform]:
    """Analysis-resynthesis: preprocess a recording, vocode its features.

    Returns (vocoded, preprocessed reference); both are at 24 kHz and the
    vocoded length is within one hop of the reference. Digital silence is
    vocoded from all-floor features rather than rejected.
    """
    generator, cfg = load_vocoder(ckpt_path)
    reference, mel = preprocess_waveform(load_wav(wav_in), cfg, lenient=True)
    out = vocode_mel(generator, mel)
    if out_path is not None:
        save_wav(out, out_path)
    return out, reference
