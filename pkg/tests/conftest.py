"""Shared fixtures and independent oracles used across the suite."""

from __future__ import annotations

import math
import random

import pytest

from hrvcam.hrv import RrSample


def make_stream(rrs, t0=0, seq0=1, t_step=None):
    """Build a sample stream from rr values; beat times accumulate the rrs
    unless a fixed t_step is given."""
    samples = []
    t = t0
    for i, rr in enumerate(rrs):
        t = t + (t_step if t_step is not None else rr)
        samples.append(RrSample(t=int(round(t)), rr=float(rr), seq=seq0 + i))
    return samples


def random_stream(rng: random.Random, n: int, lo=300.0, hi=2000.0):
    return make_stream([lo + rng.random() * (hi - lo) for _ in range(n)])


def brute_force_reading(samples, window_end, window_ms=25_000, min_beats=10):
    """Direct evaluation of the windowed RMSSD definition, kept independent
    of the implementation under test: filter samples with t in
    (window_end - window_ms, window_end], take differences between rr values
    of consecutive-seq neighbors, rmssd = sqrt(mean of squared diffs)."""
    in_win = [s for s in samples if window_end - window_ms < s.t <= window_end]
    if len(in_win) < min_beats:
        return None
    diffs = [b.rr - a.rr for a, b in zip(in_win, in_win[1:]) if b.seq == a.seq + 1]
    if not diffs:
        return None
    rmssd = math.sqrt(math.fsum(d * d for d in diffs) / len(diffs))
    mean_hr = 60_000.0 / (math.fsum(s.rr for s in in_win) / len(in_win))
    return rmssd, len(in_win), len(diffs), mean_hr


@pytest.fixture
def rng():
    return random.Random(0xBEEF)
