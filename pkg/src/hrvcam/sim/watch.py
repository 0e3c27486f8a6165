"""Simulated wrist device: streams a pre-generated beat sequence over its link."""

from __future__ import annotations

from hrvcam.hrv import RrSample
from hrvcam.sim.clock import VirtualClock
from hrvcam.sim.link import SimLink
from hrvcam.sim.protocol import rr_frame


class WatchSim:
    """Sends one RR_SAMPLE frame at each beat's arrival time."""

    def __init__(self, clock: VirtualClock, uplink: SimLink, samples: list[RrSample]):
        self.clock = clock
        self.uplink = uplink
        self.samples = samples
        self._i = 0

    def start(self) -> None:
        self._schedule_next()

    def _schedule_next(self) -> None:
        if self._i >= len(self.samples):
            return
        sample = self.samples[self._i]
        self.clock.schedule(sample.t, self._fire)

    def _fire(self) -> None:
        sample = self.samples[self._i]
        self._i += 1
        self.uplink.send(rr_frame(sample.t, sample.rr, sample.seq))
        self._schedule_next()
