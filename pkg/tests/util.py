"""Shared test constructions.

Most "exact equality" contracts ride on dyadic sample values: snapping
samples to a 2^-20 grid keeps sums, differences, and halving exact in
float64, so mixture arithmetic identities hold bitwise.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from hearmix import (
    AudioBuffer,
    Audiogram,
    Listener,
    StemSet,
    write_wav,
)

QUANTUM = 2.0**-20
TRACK_TONES = {"vocals": 440.0, "drums": 180.0, "bass": 80.0, "other": 1200.0}


def quantize(x: np.ndarray) -> np.ndarray:
    return np.round(np.asarray(x, dtype=np.float64) / QUANTUM) * QUANTUM


def make_buffer(samples, rate: int = 44100) -> AudioBuffer:
    return AudioBuffer(np.asarray(samples, dtype=np.float64), rate)


def sine_buffer(
    freq_hz: float,
    seconds: float,
    rate: int = 44100,
    amplitude: float = 1.0,
    channels: int = 2,
) -> AudioBuffer:
    t = np.arange(int(round(seconds * rate))) / rate
    tone = amplitude * np.sin(2 * np.pi * freq_hz * t)
    return AudioBuffer(np.tile(tone, (channels, 1)), rate)


def synth_stems(
    rng: np.random.Generator,
    seconds: float = 1.0,
    rate: int = 44100,
    channels: int = 2,
    peak: float = 0.2,
) -> StemSet:
    """Music-like dyadic stems: one tone per track plus a little noise."""
    n = int(round(seconds * rate))
    t = np.arange(n) / rate
    stems = {}
    for name, freq in TRACK_TONES.items():
        track = np.empty((channels, n))
        for ch in range(channels):
            phase = rng.uniform(0, 2 * np.pi)
            tone = np.sin(2 * np.pi * freq * t + phase)
            noise = rng.normal(0.0, 0.25, n)
            envelope = 0.6 + 0.4 * np.sin(2 * np.pi * 0.7 * t + phase)
            track[ch] = peak * envelope * (0.7 * tone + 0.3 * noise)
        stems[name] = AudioBuffer(quantize(track), rate)
    return StemSet(**stems)


def exact_mix(stems: StemSet) -> AudioBuffer:
    """Mixture summed in VDBO order, matching the remix accumulation."""
    samples = (
        (stems.vocals.samples + stems.drums.samples) + stems.bass.samples
    ) + stems.other.samples
    return AudioBuffer(samples, stems.sample_rate)


def flat_listener(level_db_hl: float, listener_id: str = "test") -> Listener:
    freqs = (250.0, 500.0, 1000.0, 2000.0, 4000.0, 6000.0)
    audiogram = Audiogram(freqs, (level_db_hl,) * 6)
    return Listener(listener_id, audiogram, audiogram)


ZERO_LISTENER = flat_listener(0.0, "normal-hearing")


def write_stems_dir(stems: StemSet, directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    for name in ("vocals", "drums", "bass", "other"):
        write_wav(stems.track(name), directory / f"{name}.wav")
    return directory


def write_gains_file(path: Path, **gains) -> Path:
    doc = {"vocals": 0.0, "drums": 0.0, "bass": 0.0, "other": 0.0}
    doc.update(gains)
    path.write_text(json.dumps(doc))
    return path


def write_listener_file(path: Path, listener: Listener) -> Path:
    path.write_text(
        json.dumps(
            {
                "id": listener.id,
                "frequencies": list(listener.left.frequencies),
                "left_db_hl": list(listener.left.levels_db_hl),
                "right_db_hl": list(listener.right.levels_db_hl),
            }
        )
    )
    return path


def response_db(taps: np.ndarray, freqs_hz, sample_rate: int) -> np.ndarray:
    """Direct DTFT magnitude of an FIR filter, independent of scipy.freqz."""
    freqs = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
    k = np.arange(taps.size)
    phases = np.exp(-2j * np.pi * np.outer(freqs / sample_rate, k))
    return 20.0 * np.log10(np.abs(phases @ taps))
