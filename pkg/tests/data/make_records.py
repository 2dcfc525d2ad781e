"""Regenerate the synthetic strong-motion fixtures in this directory.

Real accelerograms cannot be redistributed here, so the test suite uses
deterministic stand-ins with comparable character: band-limited filtered
noise under an amplitude envelope, plus a moderate near-fault style pulse.
Running this script rewrites the CSVs bit-identically.
"""

import pathlib

import numpy as np
from scipy import signal

from shearctl.excitation import GroundMotionRecord, save_record

HERE = pathlib.Path(__file__).parent


def banded(name, seed, duration, pga, band, rise, flat, decay, dt=0.02):
    rng = np.random.default_rng(seed)
    n = int(duration / dt) + 1
    t = np.arange(n) * dt
    b, a = signal.butter(2, list(band), btype="band", fs=1.0 / dt)
    shaped = signal.lfilter(b, a, rng.normal(0.0, 1.0, n))
    env = np.where(
        t < rise, (t / rise) ** 2, np.where(t < flat, 1.0, np.exp(-decay * (t - flat)))
    )
    acc = shaped * env
    acc *= pga / np.max(np.abs(acc))
    return GroundMotionRecord(name=name, dt=dt, samples=acc)


def pulse(name, period, amp, duration=15.0, dt=0.01, center=5.0):
    n = int(duration / dt) + 1
    t = np.arange(n) * dt
    acc = amp * np.exp(-(((t - center) / period) ** 2)) * np.sin(
        2.0 * np.pi * (t - center) / period
    )
    return GroundMotionRecord(name=name, dt=dt, samples=acc)


RECORDS = [
    banded("synth-broadband", seed=42, duration=25.0, pga=3.5, band=(0.5, 6.0),
           rise=4.0, flat=12.0, decay=0.35),
    banded("synth-lowband", seed=7, duration=35.0, pga=2.5, band=(0.2, 3.0),
           rise=4.0, flat=18.0, decay=0.35),
    pulse("synth-pulse", period=2.5, amp=3.0),
]


if __name__ == "__main__":
    for record in RECORDS:
        out = HERE / f"{record.name}.csv"
        save_record(record, out)
        print(f"wrote {out} ({record.samples.shape[0]} samples, dt={record.dt})")
