"""Unidirectional simulated link with injectable faults.

A link delivers frames through the shared scheduler: base transit latency
plus any active latency fault, FIFO order always preserved. Disconnect
windows drop every frame sent while active; drop windows drop each frame
independently with the configured probability. Loss is modeled behavior,
not an error, so send() just reports whether delivery was scheduled.
"""

from __future__ import annotations

import random
from typing import Callable, Iterable

from hrvcam.sim.clock import VirtualClock
from hrvcam.sim.protocol import Frame
from hrvcam.sim.scenario import FaultWindow


class FaultSchedule:
    """The fault windows affecting one logical (bidirectional) link."""

    def __init__(self, windows: Iterable[FaultWindow] = ()):
        self.windows = tuple(windows)

    def connected(self, t_ms: float) -> bool:
        return not any(w.kind == "disconnect" and w.active(t_ms) for w in self.windows)

    def drop_pct(self, t_ms: float) -> float:
        for w in self.windows:
            if w.kind == "drop_pct" and w.active(t_ms):
                return w.pct
        return 0.0

    def extra_latency_ms(self, t_ms: float, rng: random.Random) -> float:
        for w in self.windows:
            if w.kind == "latency" and w.active(t_ms):
                return rng.random() * w.delay_ms
        return 0.0


class FrameSink:
    """Mutable delivery target, so a link can be wired before its consumer exists."""

    def __init__(self):
        self.handler: Callable[[Frame], None] = lambda frame: None

    def __call__(self, frame: Frame) -> None:
        self.handler(frame)


class SimLink:
    """One direction of a device link."""

    def __init__(
        self,
        name: str,
        clock: VirtualClock,
        deliver: Callable[[Frame], None],
        rng: random.Random,
        faults: FaultSchedule | None = None,
        latency_ms: int = 2,
    ):
        self.name = name
        self.clock = clock
        self.deliver = deliver
        self.rng = rng
        self.faults = faults or FaultSchedule()
        self.latency_ms = latency_ms
        self.sent = 0
        self.dropped = 0
        self._next_seq = 0
        self._last_delivery_ms = 0

    def is_connected(self) -> bool:
        return self.faults.connected(self.clock.now())

    def send(self, frame: Frame) -> bool:
        """Queue one frame for delivery. False means the link ate it."""
        now = self.clock.now()
        self.sent += 1
        frame = frame.with_seq(self._next_seq)
        self._next_seq += 1
        if not self.faults.connected(now):
            self.dropped += 1
            return False
        pct = self.faults.drop_pct(now)
        if pct > 0.0 and self.rng.random() * 100.0 < pct:
            self.dropped += 1
            return False
        delay = self.latency_ms + self.faults.extra_latency_ms(now, self.rng)
        deliver_at = max(now + int(round(delay)), self._last_delivery_ms)
        self._last_delivery_ms = deliver_at
        self.clock.schedule(deliver_at, lambda f=frame: self.deliver(f))
        return True
