"""Synthetic RR-interval streams.

A mean-reverting random walk stands in for real beat-to-beat intervals:
the engine only consumes RR statistics, so fidelity beyond RMSSD behavior
would be wasted effort. Inside a stress episode the walk's target interval
shrinks by hr_increase_pct and the step scale by jitter_suppression_pct,
which is exactly what drags windowed RMSSD below a calm-period baseline.

Only Random.random() is drawn from, so a seed reproduces the same stream
across interpreter versions.
"""

from __future__ import annotations

import random

from hrvcam.hrv import RrSample
from hrvcam.sim.scenario import Episode, Scenario

RR_FLOOR_MS = 300.0
RR_CEIL_MS = 2000.0
MEAN_REVERSION = 0.15


def _episode_at(episodes: tuple[Episode, ...], t_s: float) -> Episode | None:
    for ep in episodes:
        if ep.start_s <= t_s < ep.end_s:
            return ep
    return None


def generate_rr(scenario: Scenario) -> list[RrSample]:
    """Produce the full beat stream for a scenario, reproducible from its seed."""
    rng = random.Random(scenario.seed)
    duration_ms = scenario.duration_ms
    samples: list[RrSample] = []
    t = 0.0
    seq = 0
    rr = scenario.rr_mean
    while True:
        ep = _episode_at(scenario.episodes, t / 1000.0)
        if ep is None:
            target = scenario.rr_mean
            jitter = scenario.rr_jitter
        else:
            target = scenario.rr_mean * (1.0 - ep.hr_increase_pct / 100.0)
            jitter = scenario.rr_jitter * (1.0 - ep.jitter_suppression_pct / 100.0)
        step = (2.0 * rng.random() - 1.0) * jitter
        rr = rr + MEAN_REVERSION * (target - rr) + step
        rr = min(RR_CEIL_MS, max(RR_FLOOR_MS, rr))
        t += rr
        if t > duration_ms:
            break
        seq += 1
        samples.append(RrSample(t=int(round(t)), rr=rr, seq=seq))
    return samples
