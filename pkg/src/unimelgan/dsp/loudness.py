"""Integrated loudness (ITU-R BS.1770-4) and gain normalization.

The meter applies the two-stage K-weighting prefilter (high-shelf followed
by an RLB high-pass), integrates mean-square energy over 400 ms blocks with
75% overlap, and gates twice: an absolute gate at -70 LUFS, then a relative
gate 10 LU below the loudness of the absolutely-gated blocks. Only
integrated loudness is implemented; short-term and momentary are out of
scope here.

Filter coefficients for arbitrary sample rates follow the parametric
designs published by Brecht De Man, which reproduce the tabulated 48 kHz
coefficients of the standard.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np
from scipy import signal

from ..errors import InvalidAudioError, SilentAudioError
from .audio import Waveform

logger = logging.getLogger(__name__)

DEFAULT_TARGET_LUFS = -23.0

_BLOCK_SECONDS = 0.4
_OVERLAP = 0.75
_ABSOLUTE_GATE_LUFS = -70.0
_RELATIVE_GATE_LU = 10.0
# Calibration offset from the standard: a 997 Hz full-scale sine reads
# -3.01 LUFS once this is applied.
_OFFSET_LU = -0.691


@lru_cache(maxsize=8)
def _k_weighting_sos(sample_rate: int) -> np.ndarray:
    """Second-order sections of the K-weighting prefilter at `sample_rate`."""
    # Stage 1: spherical-head high shelf (+4 dB above ~1.5 kHz).
    f0 = 1681.9744509555319
    gain_db = 3.99984385397
    q = 0.7071752369554193
    k = math.tan(math.pi * f0 / sample_rate)
    vh = 10.0 ** (gain_db / 20.0)
    vb = vh ** 0.499666774155
    a0 = 1.0 + k / q + k * k
    shelf_b = [
        (vh + vb * k / q + k * k) / a0,
        2.0 * (k * k - vh) / a0,
        (vh - vb * k / q + k * k) / a0,
    ]
    shelf_a = [1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0]

    # Stage 2: RLB weighting, a ~38 Hz high-pass.
    f0 = 38.13547087613982
    q = 0.5003270373253953
    k = math.tan(math.pi * f0 / sample_rate)
    a0 = 1.0 + k / q + k * k
    hp_b = [1.0, -2.0, 1.0]
    hp_a = [1.0, 2.0 * (k * k - 1.0) / a0, (1.0 - k / q + k * k) / a0]

    return np.array([shelf_b + shelf_a, hp_b + hp_a])


def _gated_block_powers(w: Waveform) -> np.ndarray:
    """Mean-square power of each 400 ms block of the K-weighted signal."""
    block = int(round(_BLOCK_SECONDS * w.sample_rate))
    hop = int(round(block * (1.0 - _OVERLAP)))
    if len(w) < block:
        raise InvalidAudioError(
            f"loudness needs at least {_BLOCK_SECONDS:.1f} s "
            f"({block} samples at {w.sample_rate} Hz), got {len(w)}"
        )
    weighted = signal.sosfilt(_k_weighting_sos(w.sample_rate), w.samples)
    n_blocks = (len(w) - block) // hop + 1
    idx = np.arange(block)[None, :] + hop * np.arange(n_blocks)[:, None]
    return np.mean(np.square(weighted[idx]), axis=1)


def measure_loudness(w: Waveform) -> float:
    """Integrated loudness in LUFS.

    Raises SilentAudioError when no block survives the absolute gate, i.e.
    the signal is (close to) digital silence.
    """
    powers = _gated_block_powers(w)
    abs_threshold = 10.0 ** ((_ABSOLUTE_GATE_LUFS - _OFFSET_LU) / 10.0)
    above_abs = powers[powers > abs_threshold]
    if above_abs.size == 0:
        raise SilentAudioError("no gating block above -70 LUFS; loudness unmeasurable")
    rel_gate = _OFFSET_LU + 10.0 * math.log10(np.mean(above_abs)) - _RELATIVE_GATE_LU
    rel_threshold = 10.0 ** ((rel_gate - _OFFSET_LU) / 10.0)
    gated = powers[powers > rel_threshold]
    if gated.size == 0:  # cannot happen: the loudest block always passes
        raise SilentAudioError("every gating block fell below the relative gate")
    return _OFFSET_LU + 10.0 * math.log10(np.mean(gated))


def normalize_loudness(w: Waveform, target_lufs: float = DEFAULT_TARGET_LUFS) -> Waveform:
    """Scale the waveform so it measures `target_lufs`.

    Pure gain: the waveshape is preserved up to scaling. If the required
    gain would push any sample beyond full scale, the gain is clamped so
    the peak lands at 1.0 and a warning is logged; the result then measures
    quieter than the target.
    """
    measured = measure_loudness(w)
    gain = 10.0 ** ((target_lufs - measured) / 20.0)
    peak = w.peak
    if peak * gain > 1.0:
        clamped = 1.0 / peak
        logger.warning(
            "loudness gain %.2f dB would clip (peak %.4f); clamping to %.2f dB",
            20.0 * math.log10(gain),
            peak,
            20.0 * math.log10(clamped),
        )
        gain = clamped
    return Waveform(w.samples * gain, w.sample_rate)
