#!/usr/bin/env python3
"""Measure how per-track SDR grows with ensemble size.

Monte Carlo over noisy-oracle stem sets: each ensemble member is the ground
truth plus independent white noise at a fixed SNR, so averaging K members
should buy about 10*log10(K) dB of SDR per track. Prints the measured gain
table against that prediction.
"""

from __future__ import annotations

import argparse

import numpy as np

from hearmix import (
    AudioBuffer,
    NoisyOracleStemProvider,
    StemSet,
    ensemble_average,
    sdr,
)

TRACKS = ("vocals", "drums", "bass", "other")
TONES = {"vocals": 392.0, "drums": 140.0, "bass": 65.0, "other": 988.0}


def synth_stems(rng, seconds, rate):
    n = int(seconds * rate)
    t = np.arange(n) / rate
    stems = {}
    for name in TRACKS:
        track = np.stack(
            [
                0.2
                * (
                    0.7 * np.sin(2 * np.pi * TONES[name] * t + rng.uniform(0, 6.28))
                    + 0.3 * rng.normal(0, 1, n)
                )
                for _ in range(2)
            ]
        )
        stems[name] = AudioBuffer(track, rate)
    return StemSet(**stems)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--snr-db", type=float, default=10.0)
    parser.add_argument("--seconds", type=float, default=0.5)
    parser.add_argument("--max-k", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rate = 44100
    gains = {k: {name: [] for name in TRACKS} for k in range(1, args.max_k + 1)}
    for trial in range(args.trials):
        rng = np.random.default_rng(args.seed + trial)
        truth = synth_stems(rng, args.seconds, rate)
        members = [
            NoisyOracleStemProvider(
                truth, args.snr_db, seed=args.seed + 1000 * trial + k
            ).stems()
            for k in range(args.max_k)
        ]
        base = {
            name: np.mean([sdr(truth.track(name), m.track(name)).value for m in members])
            for name in TRACKS
        }
        for k in range(1, args.max_k + 1):
            averaged = ensemble_average(members[:k])
            for name in TRACKS:
                combined = sdr(truth.track(name), averaged.track(name)).value
                gains[k][name].append(combined - base[name])

    header = f"{'K':>3} {'predicted':>10} " + " ".join(f"{name:>8}" for name in TRACKS)
    print(header)
    print("-" * len(header))
    for k in range(1, args.max_k + 1):
        predicted = 10 * np.log10(k)
        row = " ".join(f"{np.mean(gains[k][name]):8.2f}" for name in TRACKS)
        print(f"{k:>3} {predicted:>10.2f} {row}")


if __name__ == "__main__":
    main()
