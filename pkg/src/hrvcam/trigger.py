"""Capture trigger policy: debounce, rate limit, pause, single in-flight capture.

The decision core is two pure functions over an immutable EngineState so the
rate-limit and pause properties can be checked exhaustively. The live engine
wraps them; see hrvcam.engine.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from hrvcam.hrv import HrvReading, StressState


class EngineMode(Enum):
    IDLE = "idle"
    CALIBRATING = "calibrating"
    MONITORING = "monitoring"
    PAUSED = "paused"


class FailureReason(Enum):
    DISCONNECTED = "disconnected"
    TIMEOUT = "timeout"
    CHECKSUM_MISMATCH = "checksum_mismatch"


@dataclass(frozen=True, slots=True)
class TriggerConfig:
    """Capture policy knobs.

    min_capture_interval_ms: refractory period between emitted captures.
    debounce_count: consecutive stressed readings required to fire.
    transfer_timeout_ms: inactivity timeout for one transfer attempt.
    retrigger_while_stressed: level trigger (repeat captures during
        sustained stress, spaced by the refractory period) vs edge trigger
        (at most one capture per stressed run, fired exactly at the
        debounce crossing).
    """

    min_capture_interval_ms: int = 60_000
    debounce_count: int = 1
    transfer_timeout_ms: int = 10_000
    retrigger_while_stressed: bool = True

    def __post_init__(self):
        if self.min_capture_interval_ms <= 0:
            raise ValueError("min_capture_interval_ms must be > 0")
        if self.debounce_count < 1:
            raise ValueError("debounce_count must be >= 1")


@dataclass(frozen=True, slots=True)
class EngineState:
    mode: EngineMode = EngineMode.IDLE
    last_capture_at: int | None = None
    consecutive_stressed: int = 0
    in_flight: int | None = None


@dataclass(frozen=True, slots=True)
class CaptureRequest:
    """One capture command, with physiological metadata frozen at trigger time."""

    capture_id: int
    requested_at: int
    hr_bpm: float
    rmssd_ms: float


@dataclass(frozen=True, slots=True)
class TapEvent:
    t: int
    kind: str = "double_tap"


def on_reading(
    state: EngineState,
    reading: HrvReading | None,
    classification: StressState,
    now: int,
    config: TriggerConfig,
    next_capture_id: int = 1,
) -> tuple[EngineState, CaptureRequest | None]:
    """Advance the trigger state for one classified reading.

    Emits a CaptureRequest only when all of: mode is Monitoring, the
    stressed run has reached debounce_count, the refractory period since
    the last emission has elapsed, and no capture is in flight. In edge
    mode the opportunity exists only at the exact debounce crossing; a
    crossing blocked by the rate limit or an in-flight transfer forfeits
    that run.
    """
    if state.mode not in (EngineMode.MONITORING, EngineMode.PAUSED):
        raise ValueError(f"on_reading requires Monitoring or Paused, got {state.mode}")

    if classification is StressState.STRESSED:
        run = state.consecutive_stressed + 1
    else:
        run = 0
    state = replace(state, consecutive_stressed=run)

    if classification is not StressState.STRESSED or state.mode is EngineMode.PAUSED:
        return state, None
    if run < config.debounce_count:
        return state, None
    if not config.retrigger_while_stressed and run != config.debounce_count:
        return state, None
    if state.in_flight is not None:
        return state, None
    if (
        state.last_capture_at is not None
        and now - state.last_capture_at < config.min_capture_interval_ms
    ):
        return state, None

    request = CaptureRequest(
        capture_id=next_capture_id,
        requested_at=now,
        hr_bpm=reading.mean_hr if reading is not None else 0.0,
        rmssd_ms=reading.rmssd if reading is not None else 0.0,
    )
    state = replace(state, last_capture_at=now, in_flight=request.capture_id)
    return state, request


def on_tap(state: EngineState, tap: TapEvent) -> tuple[EngineState, bool]:
    """Toggle Monitoring <-> Paused on a double tap.

    Returns (state, toggled). Taps while Idle or Calibrating are ignored
    (nothing to pause); captures already in flight are left to finish.
    """
    if tap.kind != "double_tap":
        return state, False
    if state.mode is EngineMode.MONITORING:
        return replace(state, mode=EngineMode.PAUSED), True
    if state.mode is EngineMode.PAUSED:
        return replace(state, mode=EngineMode.MONITORING), True
    return state, False


def clear_in_flight(state: EngineState) -> EngineState:
    return replace(state, in_flight=None)
