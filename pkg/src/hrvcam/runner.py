"""End-to-end scenario execution: watch + glasses + links + engine + store,
all on one virtual clock. (scenario, seed) fully determines the resulting
store contents, byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from hrvcam.engine import EngineConfig, EventLog, MonitoringEngine
from hrvcam.sim.clock import VirtualClock
from hrvcam.sim.glasses import GlassesSim
from hrvcam.sim.link import FaultSchedule, SimLink
from hrvcam.sim.rrgen import generate_rr
from hrvcam.sim.scenario import Scenario
from hrvcam.sim.watch import WatchSim
from hrvcam.store import EventStore


@dataclass(frozen=True)
class RunSummary:
    duration_ms: int
    samples: int
    rejected: int
    captures_total: int
    complete: int
    failed: int
    baseline: dict | None

    def to_dict(self) -> dict:
        return {
            "duration_ms": self.duration_ms,
            "samples": self.samples,
            "rejected": self.rejected,
            "captures_total": self.captures_total,
            "complete": self.complete,
            "failed": self.failed,
            "baseline": self.baseline,
        }


class SimulationRunner:
    def __init__(
        self,
        scenario: Scenario,
        store_dir: str | Path,
        engine_config: EngineConfig | None = None,
        reveal_delay_ms: int = 86_400_000,
        write_log_file: bool = True,
    ):
        self.scenario = scenario
        self.clock = VirtualClock()
        self.store = EventStore(store_dir, reveal_delay_ms=reveal_delay_ms)
        self.log = EventLog()
        self.config = engine_config or EngineConfig()
        self._log_fh = None
        if write_log_file:
            self._log_fh = open(
                Path(store_dir) / "engine.log", "a", encoding="utf-8", newline="\n"
            )
            self.log.observers.append(
                lambda t, kind, details: self._log_fh.write(
                    EventLog.format_line(t, kind, details) + "\n"
                )
            )

        glasses_faults = FaultSchedule(
            [f for f in scenario.faults if f.link == "glasses"]
        )
        watch_faults = FaultSchedule([f for f in scenario.faults if f.link == "watch"])

        self.engine = MonitoringEngine(
            clock=self.clock,
            store=self.store,
            log=self.log,
            config=self.config,
            send_to_glasses=lambda frame: self.engine_to_glasses.send(frame),
            glasses_connected=lambda: self.engine_to_glasses.is_connected(),
        )
        self.glasses_to_engine = SimLink(
            "glasses->engine",
            self.clock,
            self.engine.on_frame,
            random.Random(scenario.seed + 1),
            glasses_faults,
        )
        self.engine_to_glasses = SimLink(
            "engine->glasses",
            self.clock,
            lambda frame: self.glasses.on_frame(frame),
            random.Random(scenario.seed + 2),
            glasses_faults,
        )
        self.watch_to_engine = SimLink(
            "watch->engine",
            self.clock,
            self.engine.on_frame,
            random.Random(scenario.seed + 3),
            watch_faults,
        )
        self.glasses = GlassesSim(
            clock=self.clock, uplink=self.glasses_to_engine, taps_s=scenario.taps
        )
        self.watch = WatchSim(self.clock, self.watch_to_engine, generate_rr(scenario))

    def run(self) -> RunSummary:
        self.engine.start()
        self.glasses.start()
        self.watch.start()
        self.clock.advance(self.scenario.duration_ms)
        # A transfer still in flight at scenario end runs to its own
        # conclusion so no capture request is left without an outcome.
        while self.engine.in_flight is not None and self.clock.run_next():
            pass
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None
        total, failed = self.store.counters()
        return RunSummary(
            duration_ms=self.scenario.duration_ms,
            samples=self.engine.analyzer.accepted_count,
            rejected=self.engine.analyzer.rejected_count,
            captures_total=total,
            complete=total - failed,
            failed=failed,
            baseline=self.engine.baseline.to_dict() if self.engine.baseline else None,
        )

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None
        self.store.close()


def run_scenario(
    scenario: Scenario,
    store_dir: str | Path,
    engine_config: EngineConfig | None = None,
    reveal_delay_ms: int = 86_400_000,
) -> RunSummary:
    runner = SimulationRunner(scenario, store_dir, engine_config, reveal_delay_ms)
    try:
        return runner.run()
    finally:
        runner.close()
