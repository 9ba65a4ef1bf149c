"""Integrated loudness (BS.1770-style), loudness normalization, clip
counting, the clip-count compressor trigger, and the dynamic-range
compressor.

Loudness is the gated integrated measure: K-weighting, 400 ms blocks with
75 % overlap, an absolute gate at -70 LUFS, then a relative gate 10 LU
below the absolutely-gated level. Fully gated-out signals have *undefined*
loudness, carried as an explicit state rather than a sentinel number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import sosfilt

from .audio import AudioBuffer

CLIP_TRIGGER_COUNT = 25_000

_BLOCK_SECONDS = 0.4
_HOP_SECONDS = 0.1
_ABSOLUTE_GATE_LUFS = -70.0
_RELATIVE_GATE_LU = 10.0
_LOUDNESS_OFFSET = -0.691


class UndefinedLoudnessError(ValueError):
    """The signal's loudness is undefined (silent or fully gated out)."""


@dataclass(frozen=True)
class LoudnessLufs:
    """Integrated loudness; ``value`` is None when undefined."""

    value: float | None

    @property
    def is_defined(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class ClipReport:
    """Per-channel counts of samples at or beyond full scale."""

    per_channel: tuple[int, ...]
    trigger_threshold: int = CLIP_TRIGGER_COUNT


@dataclass(frozen=True)
class CompressorParams:
    """Feed-forward peak compressor settings."""

    threshold_db: float = -6.0
    ratio: float = 6.0
    attack_ms: float = 5.0
    release_ms: float = 100.0
    makeup_db: float = 0.0

    def __post_init__(self):
        if self.ratio < 1.0:
            raise ValueError(f"ratio must be >= 1, got {self.ratio}")
        if self.attack_ms <= 0.0 or self.release_ms <= 0.0:
            raise ValueError("attack and release must be positive")


def _k_weighting_sos(sample_rate: int) -> np.ndarray:
    """K-weighting as two biquads: high shelf, then high pass.

    Coefficients are recomputed for the given rate from the analog
    prototype (shelf at 1681.97 Hz / +4 dB, high pass at 38.14 Hz), which
    reproduces the published 48 kHz tables.
    """
    f0, gain_db, q = 1681.9744509555319, 3.99984385397, 0.7071752369554193
    k = math.tan(math.pi * f0 / sample_rate)
    vh = 10.0 ** (gain_db / 20.0)
    vb = vh**0.499666774155
    a0 = 1.0 + k / q + k * k
    shelf = [
        (vh + vb * k / q + k * k) / a0,
        2.0 * (k * k - vh) / a0,
        (vh - vb * k / q + k * k) / a0,
        1.0,
        2.0 * (k * k - 1.0) / a0,
        (1.0 - k / q + k * k) / a0,
    ]
    f0, q = 38.13547087613982, 0.5003270373253953
    k = math.tan(math.pi * f0 / sample_rate)
    a0 = 1.0 + k / q + k * k
    highpass = [
        1.0,
        -2.0,
        1.0,
        1.0,
        2.0 * (k * k - 1.0) / a0,
        (1.0 - k / q + k * k) / a0,
    ]
    return np.array([shelf, highpass])


def integrated_loudness(buffer: AudioBuffer) -> LoudnessLufs:
    """Gated integrated loudness of a buffer in LUFS."""
    if buffer.sample_rate < 8000:
        raise ValueError(f"loudness needs sample_rate >= 8 kHz, got {buffer.sample_rate}")
    block = int(round(_BLOCK_SECONDS * buffer.sample_rate))
    hop = int(round(_HOP_SECONDS * buffer.sample_rate))
    if buffer.n_frames < block:
        return LoudnessLufs(None)

    weighted = sosfilt(_k_weighting_sos(buffer.sample_rate), buffer.samples, axis=1)
    energy = np.concatenate(
        [np.zeros((buffer.channels, 1)), np.cumsum(weighted * weighted, axis=1)], axis=1
    )
    starts = np.arange(0, buffer.n_frames - block + 1, hop)
    block_power = (energy[:, starts + block] - energy[:, starts]).sum(axis=0) / block
    block_lufs = _LOUDNESS_OFFSET + 10.0 * np.log10(np.maximum(block_power, 1e-30))

    kept = block_lufs > _ABSOLUTE_GATE_LUFS
    if not np.any(kept):
        return LoudnessLufs(None)
    relative_gate = (
        _LOUDNESS_OFFSET + 10.0 * np.log10(np.mean(block_power[kept])) - _RELATIVE_GATE_LU
    )
    kept &= block_lufs > relative_gate
    if not np.any(kept):
        return LoudnessLufs(None)
    return LoudnessLufs(_LOUDNESS_OFFSET + 10.0 * np.log10(np.mean(block_power[kept])))


def normalize_to_loudness(buffer: AudioBuffer, target_lufs: float) -> AudioBuffer:
    """Scale a buffer by one scalar so its loudness matches the target.

    Gating can shift once the signal is rescaled, so the scalar is refined
    once if the first measurement after scaling is off by more than 0.01 LU.
    """
    measured = integrated_loudness(buffer)
    if not measured.is_defined:
        raise UndefinedLoudnessError("cannot normalize: input loudness is undefined")
    gain = 10.0 ** ((target_lufs - measured.value) / 20.0)
    check = integrated_loudness(buffer.with_samples(buffer.samples * gain))
    if check.is_defined and abs(check.value - target_lufs) > 0.01:
        gain *= 10.0 ** ((target_lufs - check.value) / 20.0)
    return buffer.with_samples(buffer.samples * gain)


def count_clipped(buffer: AudioBuffer) -> ClipReport:
    """Count samples at or beyond full scale (|x| >= 1) per channel."""
    counts = tuple(int(np.count_nonzero(np.abs(ch) >= 1.0)) for ch in buffer.samples)
    return ClipReport(per_channel=counts)


def should_compress(report: ClipReport) -> bool:
    """True when any channel's clip count reaches the trigger threshold."""
    return max(report.per_channel) >= report.trigger_threshold


def _peak_hold(level: np.ndarray, release_alpha: float) -> np.ndarray:
    """Peak detector: rises instantly, decays at the release rate.

    Holding through waveform troughs keeps the gain computer on the crest
    level, so a sustained tone settles onto the static curve instead of
    pumping within each cycle.
    """
    envelope = np.empty_like(level)
    state = 0.0
    for i, value in enumerate(level.tolist()):
        state = value if value > state else release_alpha * state
        envelope[i] = state
    return envelope


def _smooth_gain_db(target_db: np.ndarray, attack_alpha: float, release_alpha: float) -> np.ndarray:
    """One-pole smoothing of the gain trajectory, switching attack/release."""
    smoothed = np.empty_like(target_db)
    state = 0.0
    for i, value in enumerate(target_db.tolist()):
        alpha = attack_alpha if value < state else release_alpha
        state = alpha * state + (1.0 - alpha) * value
        smoothed[i] = state
    return smoothed


def compress(buffer: AudioBuffer, params: CompressorParams | None = None) -> AudioBuffer:
    """Stereo-linked feed-forward peak compressor with a hard ±1 safety clip.

    The per-frame level is the peak across channels, tracked by a
    release-decay peak detector; the hard-knee gain computer reduces level
    above the threshold by the ratio; the gain (in dB) is smoothed by a
    one-pole attack/release and applied identically to every channel,
    followed by makeup gain and the safety clip.
    """
    if params is None:
        params = CompressorParams()
    attack_alpha = math.exp(-1.0 / (buffer.sample_rate * params.attack_ms / 1000.0))
    release_alpha = math.exp(-1.0 / (buffer.sample_rate * params.release_ms / 1000.0))

    level = np.max(np.abs(buffer.samples), axis=0)
    envelope = _peak_hold(level, release_alpha)
    envelope_db = 20.0 * np.log10(np.maximum(envelope, 1e-12))
    over_db = envelope_db - params.threshold_db
    target_db = np.where(over_db > 0.0, (1.0 / params.ratio - 1.0) * over_db, 0.0)
    gain_db = _smooth_gain_db(target_db, attack_alpha, release_alpha)

    gain = 10.0 ** ((gain_db + params.makeup_db) / 20.0)
    return buffer.with_samples(np.clip(buffer.samples * gain, -1.0, 1.0))
