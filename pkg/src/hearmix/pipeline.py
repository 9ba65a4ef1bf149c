"""End-to-end enhancement: ensemble the stems, repair "other" with the
mixture residual, remix to the listener's gains, normalize loudness to the
input, apply NAL-R amplification, and compress only when enough samples
clip. Also builds ground-truth references and runs manifest batches.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .audio import (
    FLOAT_32,
    AudioBuffer,
    WavFormat,
    db_to_linear,
    ensure_aligned,
    read_wav,
    write_wav,
)
from .hearing import DEFAULT_NALR_TAPS, Listener, load_listener, nalr_process
from .levels import (
    CompressorParams,
    UndefinedLoudnessError,
    compress,
    count_clipped,
    integrated_loudness,
    normalize_to_loudness,
    should_compress,
)
from .metrics import EnhanceReport
from .stems import (
    TRACK_NAMES,
    StemSet,
    blend_other,
    compute_residual,
    ensemble_average,
    provider_from_spec,
)

# canonical stage order; configurations may skip stages but never reorder them
STAGE_ORDER = (
    "ensemble",
    "residual",
    "remix",
    "normalize",
    "nalr",
    "clip_check",
    "compress",
)

MUTE = float("-inf")


@dataclass(frozen=True)
class GainSpec:
    """Listener-requested per-track remix gains in dB; -inf mutes a track."""

    vocals: float
    drums: float
    bass: float
    other: float

    def __post_init__(self):
        for name in TRACK_NAMES:
            value = float(getattr(self, name))
            if np.isnan(value) or value == float("inf"):
                raise ValueError(f"{name} gain must be finite or -inf (mute), got {value}")
            object.__setattr__(self, name, value)

    def gain(self, track: str) -> float:
        if track not in TRACK_NAMES:
            raise ValueError(f"unknown track {track!r}")
        return getattr(self, track)

    def as_dict(self) -> dict[str, float | str]:
        return {
            name: ("mute" if getattr(self, name) == MUTE else getattr(self, name))
            for name in TRACK_NAMES
        }


def load_gains(path) -> GainSpec:
    """Load a gains JSON file: {"vocals": dB|"mute", "drums": ..., ...}."""
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: gains file must hold a JSON object")
    missing = [name for name in TRACK_NAMES if name not in doc]
    if missing:
        raise ValueError(f"{path}: gains file missing tracks {missing}")
    values = {}
    for name in TRACK_NAMES:
        raw = doc[name]
        if raw == "mute":
            values[name] = MUTE
        elif isinstance(raw, (int, float)) and not isinstance(raw, bool):
            values[name] = float(raw)
        else:
            raise ValueError(f"{path}: gain for {name} must be a number or \"mute\"")
    return GainSpec(**values)


@dataclass(frozen=True)
class EnhanceOptions:
    """Switches and parameters for one enhancement run."""

    use_residual: bool = True
    use_compressor_heuristic: bool = True
    ensemble_weights: tuple[float, ...] | None = None
    blend_weight: float = 0.5
    n_taps: int = DEFAULT_NALR_TAPS
    compressor: CompressorParams = field(default_factory=CompressorParams)
    output_format: str = FLOAT_32

    def __post_init__(self):
        if not 0.0 <= self.blend_weight <= 1.0:
            raise ValueError(f"blend_weight must be in [0, 1], got {self.blend_weight}")
        if self.ensemble_weights is not None:
            object.__setattr__(self, "ensemble_weights", tuple(self.ensemble_weights))

    def as_dict(self) -> dict[str, Any]:
        return {
            "use_residual": self.use_residual,
            "use_compressor_heuristic": self.use_compressor_heuristic,
            "ensemble_weights": (
                list(self.ensemble_weights) if self.ensemble_weights is not None else None
            ),
            "blend_weight": self.blend_weight,
            "n_taps": self.n_taps,
            "compressor": {
                "threshold_db": self.compressor.threshold_db,
                "ratio": self.compressor.ratio,
                "attack_ms": self.compressor.attack_ms,
                "release_ms": self.compressor.release_ms,
                "makeup_db": self.compressor.makeup_db,
            },
            "output_format": self.output_format,
        }


def remix(stems: StemSet, gains: GainSpec) -> AudioBuffer:
    """Sum the tracks scaled to the requested gains; muted tracks add zero."""
    acc = None
    for name in TRACK_NAMES:
        scaled = db_to_linear(gains.gain(name)) * stems.track(name).samples
        acc = scaled if acc is None else acc + scaled
    return stems.vocals.with_samples(acc)


def enhance(
    mix: AudioBuffer,
    stem_sets: Sequence[StemSet],
    gains: GainSpec,
    listener: Listener,
    options: EnhanceOptions | None = None,
    song_id: str = "",
) -> tuple[AudioBuffer, EnhanceReport]:
    """Run the full enhancement chain on one song.

    Stages run in a fixed order: ensemble averaging, residual repair of the
    "other" track, gain remix, loudness normalization to the input mixture,
    NAL-R amplification, clip counting, and (only when the heuristic fires)
    dynamic-range compression.
    """
    if options is None:
        options = EnhanceOptions()
    if len(stem_sets) == 0:
        raise ValueError("enhance needs at least one stem set")
    ensure_aligned(mix, stem_sets[0].vocals, what="mix and stems")

    report = EnhanceReport(song_id=song_id, options=options.as_dict())

    stems = ensemble_average(stem_sets, options.ensemble_weights)
    report.stages.append("ensemble")

    if options.use_residual:
        residual = compute_residual(mix, stems)
        stems = stems.with_track(
            "other", blend_other(stems.other, residual, options.blend_weight)
        )
        report.stages.append("residual")

    remixed = remix(stems, gains)
    report.stages.append("remix")

    input_loudness = integrated_loudness(mix)
    if not input_loudness.is_defined:
        raise UndefinedLoudnessError(
            "input mixture loudness is undefined; cannot set a target"
        )
    report.input_loudness_lufs = input_loudness.value
    normalized = normalize_to_loudness(remixed, input_loudness.value)
    report.stages.append("normalize")

    amplified = nalr_process(normalized, listener, options.n_taps)
    report.stages.append("nalr")

    clip_report = count_clipped(amplified)
    report.clipped_samples = clip_report.per_channel
    report.clip_trigger_threshold = clip_report.trigger_threshold
    report.stages.append("clip_check")

    output = amplified
    if options.use_compressor_heuristic and should_compress(clip_report):
        output = compress(amplified, options.compressor)
        report.compressor_applied = True
        report.stages.append("compress")

    return output, report


def build_reference(
    true_stems: StemSet,
    gains: GainSpec,
    listener: Listener,
    options: EnhanceOptions | None = None,
) -> AudioBuffer:
    """Ground-truth enhanced signal from the true stems.

    Remix at the requested gains, normalize to the true mixture's loudness,
    and apply NAL-R. The reference chain never compresses.
    """
    if options is None:
        options = EnhanceOptions()
    unit_gains = GainSpec(0.0, 0.0, 0.0, 0.0)
    mixture = remix(true_stems, unit_gains)
    target = integrated_loudness(mixture)
    if not target.is_defined:
        raise UndefinedLoudnessError(
            "silent program: true mixture loudness is undefined"
        )
    remixed = remix(true_stems, gains)
    normalized = normalize_to_loudness(remixed, target.value)
    return nalr_process(normalized, listener, options.n_taps)


@dataclass(frozen=True)
class BatchJob:
    """One manifest entry; paths are resolved against the manifest's folder."""

    song_id: str
    mix_path: Path
    stem_specs: tuple[Any, ...]
    gains_path: Path
    listener_path: Path
    output_path: Path


@dataclass(frozen=True)
class BatchManifest:
    jobs: tuple[BatchJob, ...]
    base_dir: Path


def load_manifest(path) -> BatchManifest:
    """Parse a batch manifest; malformed manifests are fatal."""
    path = Path(path)
    doc = json.loads(path.read_text())
    if not isinstance(doc, dict) or not isinstance(doc.get("jobs"), list):
        raise ValueError(f"{path}: manifest must be an object with a \"jobs\" array")
    base = path.parent
    jobs = []
    seen = set()
    for i, entry in enumerate(doc["jobs"]):
        try:
            song_id = str(entry["song_id"])
            stem_specs = entry["stems"]
            if not isinstance(stem_specs, list) or len(stem_specs) == 0:
                raise ValueError("\"stems\" must be a non-empty array")
            job = BatchJob(
                song_id=song_id,
                mix_path=base / entry["mix"],
                stem_specs=tuple(stem_specs),
                gains_path=base / entry["gains"],
                listener_path=base / entry["listener"],
                output_path=base / entry["out"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: bad job entry #{i}: {exc}") from exc
        if song_id in seen:
            raise ValueError(f"{path}: duplicate song id {song_id!r}")
        seen.add(song_id)
        jobs.append(job)
    return BatchManifest(jobs=tuple(jobs), base_dir=base)


def _run_job(job: BatchJob, base_dir: Path, options: EnhanceOptions) -> EnhanceReport:
    try:
        mix = read_wav(job.mix_path)
        stem_sets = [
            provider_from_spec(spec, base_dir).stems() for spec in job.stem_specs
        ]
        gains = load_gains(job.gains_path)
        listener = load_listener(job.listener_path)
        output, report = enhance(
            mix, stem_sets, gains, listener, options, song_id=job.song_id
        )
        job.output_path.parent.mkdir(parents=True, exist_ok=True)
        write_wav(
            output,
            job.output_path,
            WavFormat(options.output_format, output.sample_rate, output.channels),
        )
        return report
    except Exception as exc:
        return EnhanceReport(
            song_id=job.song_id,
            options=options.as_dict(),
            error=f"{type(exc).__name__}: {exc}",
        )


def run_batch(
    manifest: BatchManifest,
    options: EnhanceOptions | None = None,
    workers: int = 1,
) -> list[EnhanceReport]:
    """Run every manifest job, isolating per-job failures.

    Failed jobs yield a report with the ``error`` field set instead of
    aborting the batch; reports come back in manifest order.
    """
    if options is None:
        options = EnhanceOptions()
    if workers <= 1 or len(manifest.jobs) <= 1:
        return [_run_job(job, manifest.base_dir, options) for job in manifest.jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_run_job, job, manifest.base_dir, options)
            for job in manifest.jobs
        ]
        return [f.result() for f in futures]
