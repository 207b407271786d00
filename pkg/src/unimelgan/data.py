"""Training data plumbing: manifests, aligned crops, batch assembly.

A manifest is line-delimited text, one utterance per line:

    wave_path<TAB>feature_path<TAB>frames

Waveforms are the preprocessed 24 kHz files; features are the matching
normalized mel matrices. Mel frame t is aligned with waveform samples
[256*t, 256*(t+1)), so a crop of F frames pairs with exactly 256*F
samples. Waveforms are zero-padded up to 256*frames (framing produces one
more frame than len/256 covers).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsp.audio import load_wav
from .dsp.features import peek_frames, read_feature_file
from .errors import FileFormatError, InvalidInputError

logger = logging.getLogger(__name__)

HOP = 256


class UtteranceTooShort(Exception):
    """Skip signal: the utterance has fewer frames than one segment."""


@dataclass(frozen=True)
class ManifestEntry:
    wave_path: str
    feature_path: str
    frames: int

    @property
    def utterance_id(self) -> str:
        return Path(self.feature_path).stem


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        entries = []
        with open(path) as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise FileFormatError(
                        f"{path}:{lineno}: expected wave<TAB>feature<TAB>frames"
                    )
                entries.append(ManifestEntry(parts[0], parts[1], int(parts[2])))
        return cls(entries)

    def save(self, path) -> None:
        with open(path, "w") as f:
            for e in self.entries:
                f.write(f"{e.wave_path}\t{e.feature_path}\t{e.frames}\n")

    def validate(self) -> None:
        """Check every file exists and lengths are mutually consistent."""
        if not self.entries:
            raise InvalidInputError("manifest holds no utterances")
        for e in self.entries:
            if not Path(e.wave_path).exists():
                raise FileFormatError(f"missing waveform {e.wave_path}")
            if not Path(e.feature_path).exists():
                raise FileFormatError(f"missing features {e.feature_path}")
            frames = peek_frames(e.feature_path)
            if frames != e.frames:
                raise FileFormatError(
                    f"{e.feature_path}: header says {frames} frames, manifest says {e.frames}"
                )
            n = len(load_wav(e.wave_path))
            if abs(HOP * e.frames - n) > HOP:
                raise FileFormatError(
                    f"{e.wave_path}: {n} samples inconsistent with {e.frames} frames "
                    f"(expected within one hop of {HOP * e.frames})"
                )


class UtteranceStore:
    """Loads (mel, wave) pairs on demand and keeps them in memory.

    Suited to desk-scale corpora; everything is float32 and the waveform is
    zero-padded to exactly 256 * frames samples.
    """

    def __init__(self, manifest: DatasetManifest, expected_bands: int = 100):
        self.manifest = manifest
        self.expected_bands = expected_bands
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._warned: set[str] = set()

    def __len__(self) -> int:
        return len(self.manifest.entries)

    def pair(self, index: int) -> tuple[np.ndarray, np.ndarray]:
        if index not in self._cache:
            e = self.manifest.entries[index]
            mel = read_feature_file(e.feature_path)
            if mel.n_mels != self.expected_bands:
                raise InvalidInputError(
                    f"{e.feature_path}: {mel.n_mels} bands, expected {self.expected_bands}"
                )
            wave = load_wav(e.wave_path).samples
            target = HOP * mel.frames
            if len(wave) < target:
                wave = np.pad(wave, (0, target - len(wave)))
            self._cache[index] = (
                mel.values.astype(np.float32),
                wave[:target].astype(np.float32),
            )
        return self._cache[index]

    def warn_short_once(self, index: int, segment_frames: int) -> None:
        e = self.manifest.entries[index]
        if e.utterance_id not in self._warned:
            self._warned.add(e.utterance_id)
            logger.warning(
                "skipping %s: %d frames < segment of %d",
                e.utterance_id,
                e.frames,
                segment_frames,
            )


def sample_segment(
    mel: np.ndarray, wave: np.ndarray, segment_frames: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Aligned random crop: F mel frames and the 256*F samples under them."""
    frames = mel.shape[1]
    if frames < segment_frames:
        raise UtteranceTooShort(f"{frames} frames < {segment_frames}")
    start = int(rng.integers(0, frames - segment_frames + 1))
    mel_crop = mel[:, start : start + segment_frames]
    wave_crop = wave[HOP * start : HOP * (start + segment_frames)]
    return mel_crop, wave_crop


def make_batch(
    store: UtteranceStore,
    batch_size: int,
    segment_frames: int,
    rng: np.random.Generator,
):
    """(mel[B, bands, F], wave[B, 1, 256F]) float32 arrays plus utterance ids.

    Utterances shorter than the segment are skipped with one logged warning
    each; drawing fails only if nothing in the store is long enough.
    """
    usable = [
        i
        for i in range(len(store))
        if store.manifest.entries[i].frames >= segment_frames
    ]
    for i in range(len(store)):
        if store.manifest.entries[i].frames < segment_frames:
            store.warn_short_once(i, segment_frames)
    if not usable:
        raise InvalidInputError(
            f"no utterance has the {segment_frames} frames a segment needs"
        )
    mels, waves, ids = [], [], []
    for index in rng.choice(usable, size=batch_size, replace=True):
        mel, wave = store.pair(int(index))
        mel_crop, wave_crop = sample_segment(mel, wave, segment_frames, rng)
        mels.append(mel_crop)
        waves.append(wave_crop[None, :])
        ids.append(store.manifest.entries[int(index)].utterance_id)
    return np.stack(mels), np.stack(waves), ids
