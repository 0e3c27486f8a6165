"""Service core behind the HTTP API.

All writes (clock advances, tap injection, annotations, template adds,
exports) funnel through one lock, so request handlers may run concurrently
while the engine and store see a single ordered command stream. The stream
bus fans engine-log events out to any number of subscribers; only the
event kinds the live console consumes are published.
"""

from __future__ import annotations

import queue
import threading
import time
from pathlib import Path

from hrvcam.runner import SimulationRunner
from hrvcam.sim.clock import WallClock
from hrvcam.sim.protocol import TAP_DOUBLE
from hrvcam.store import EventStore

STREAM_KINDS = (
    "reading",
    "state_change",
    "capture_started",
    "capture_complete",
    "capture_failed",
    "reveal",
)


class StreamBus:
    def __init__(self):
        self._lock = threading.Lock()
        self._subs: list[queue.Queue] = []
        self._next_id = 0

    def publish(self, t_ms: int, kind: str, details: dict) -> None:
        if kind not in STREAM_KINDS:
            return
        with self._lock:
            self._next_id += 1
            item = {"id": self._next_id, "event": kind, "data": {"t": t_ms, **details}}
            for q in self._subs:
                q.put(item)

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._subs.append(q)
        return q

    def unsubscribe(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._subs:
                self._subs.remove(q)

    @property
    def subscriber_count(self) -> int:
        with self._lock:
            return len(self._subs)


class GatewayService:
    """One store, optionally one live simulation, one write lock."""

    def __init__(self, store: EventStore, runner: SimulationRunner | None = None):
        self.store = store
        self.runner = runner
        self.bus = StreamBus()
        self.lock = threading.RLock()
        self._wall = WallClock()
        if runner is not None:
            runner.log.observers.append(self.bus.publish)

    @property
    def sim_mode(self) -> bool:
        return self.runner is not None

    def now(self) -> int:
        if self.runner is not None:
            return self.runner.clock.now()
        return self._wall.now()

    def start_sim(self) -> None:
        if self.runner is None:
            return
        with self.lock:
            self.runner.engine.start()
            self.runner.glasses.start()
            self.runner.watch.start()

    def advance(self, ms: int) -> int:
        if self.runner is None:
            raise RuntimeError("advance is only available in simulation mode")
        if ms < 0:
            raise ValueError("ms must be >= 0")
        with self.lock:
            return self.runner.clock.advance_by(ms)

    def pause_toggle(self) -> str:
        if self.runner is None:
            raise RuntimeError("pause-toggle is only available in simulation mode")
        with self.lock:
            self.runner.engine.on_tap_event(self.now(), TAP_DOUBLE)
            return self.runner.engine.mode.value

    def status(self) -> dict:
        with self.lock:
            total, failed = self.store.counters()
            if self.runner is not None:
                engine = self.runner.engine
                reading = engine.last_reading
                return {
                    "mode": engine.mode.value,
                    "baseline": engine.baseline.to_dict() if engine.baseline else None,
                    "current_rmssd": reading.rmssd if reading else None,
                    "current_hr": reading.mean_hr if reading else None,
                    "sim_time": self.now(),
                    "captures_total": total,
                    "failures_total": failed,
                }
            return {
                "mode": "idle",
                "baseline": None,
                "current_rmssd": None,
                "current_hr": None,
                "sim_time": self.now(),
                "captures_total": total,
                "failures_total": failed,
            }

    def export(
        self,
        out: str | None,
        from_ms: int | None,
        to_ms: int | None,
        include_unrevealed: bool,
        include_failed: bool,
    ) -> tuple[Path, int]:
        with self.lock:
            if out is None:
                export_dir = self.store.root / "exports"
                export_dir.mkdir(exist_ok=True)
                n = len(list(export_dir.glob("export-*.zip"))) + 1
                out = str(export_dir / f"export-{n:03d}.zip")
            return self.store.export(
                out,
                now=self.now(),
                from_ms=from_ms,
                to_ms=to_ms,
                include_unrevealed=include_unrevealed,
                include_failed=include_failed,
            )


class SimDriver(threading.Thread):
    """Advances the virtual clock against wall time for live demos.

    ``speed`` is virtual milliseconds per wall millisecond. The loop keeps
    going after the scenario's scripted end so reveal countdowns keep
    moving; stop() shuts it down.
    """

    def __init__(self, service: GatewayService, speed: float = 60.0, tick_s: float = 0.05):
        super().__init__(daemon=True)
        self.service = service
        self.speed = speed
        self.tick_s = tick_s
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.wait(self.tick_s):
            self.service.advance(max(1, int(self.tick_s * 1000 * self.speed)))

    def stop(self) -> None:
        self._stop.set()
