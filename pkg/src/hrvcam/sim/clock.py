"""Deterministic virtual time.

One scheduler owns every timed event in a simulation. Events fire in
(timestamp, insertion order) order, so identical schedules replay
identically. Scheduling in the past is an error; time never runs backward.
"""

from __future__ import annotations

import heapq
import itertools
import time
from typing import Callable


class VirtualClock:
    """Event-driven clock; time moves only via advance()/run_until()."""

    def __init__(self, start_ms: int = 0):
        self._now = start_ms
        self._heap: list[tuple[int, int, Callable[[], None]]] = []
        self._counter = itertools.count()
        self._cancelled: set[int] = set()

    def now(self) -> int:
        return self._now

    def schedule(self, at_ms: int, callback: Callable[[], None]) -> int:
        """Register callback to fire at ``at_ms``. Returns a cancellable handle."""
        if at_ms < self._now:
            raise ValueError(f"cannot schedule at {at_ms}, clock already at {self._now}")
        handle = next(self._counter)
        heapq.heappush(self._heap, (at_ms, handle, callback))
        return handle

    def schedule_in(self, delay_ms: int, callback: Callable[[], None]) -> int:
        return self.schedule(self._now + delay_ms, callback)

    def cancel(self, handle: int) -> None:
        self._cancelled.add(handle)

    def advance(self, to_ms: int) -> int:
        """Fire every event with time <= to_ms in order; returns events fired."""
        if to_ms < self._now:
            raise ValueError(f"cannot advance to {to_ms}, clock already at {self._now}")
        fired = 0
        while self._heap and self._heap[0][0] <= to_ms:
            at, handle, callback = heapq.heappop(self._heap)
            if handle in self._cancelled:
                self._cancelled.discard(handle)
                continue
            self._now = at
            callback()
            fired += 1
        self._now = to_ms
        return fired

    def advance_by(self, delta_ms: int) -> int:
        return self.advance(self._now + delta_ms)

    def run_next(self) -> bool:
        """Fire the single next pending event, if any. Used to drain stragglers."""
        while self._heap:
            at, handle, callback = heapq.heappop(self._heap)
            if handle in self._cancelled:
                self._cancelled.discard(handle)
                continue
            self._now = at
            callback()
            return True
        return False

    def pending(self) -> int:
        return sum(1 for _, h, _ in self._heap if h not in self._cancelled)


class WallClock:
    """Real-time stand-in with the read-only part of the clock interface."""

    def now(self) -> int:
        return int(time.time() * 1000)
