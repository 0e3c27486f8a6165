"""The phone-side engine: one actor consuming the totally ordered event
stream (RR samples, taps, transfer frames, timers) and producing readings,
state changes, and capture events.

Every transition is appended to the EventLog as one structured line,
``<t_ms> <event_kind> <details-json>``; the gateway's live stream and the
test suite both consume that log, so what the UI shows is exactly what
happened.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from hrvcam.capture import CaptureOutcome, CaptureSession
from hrvcam.hrv import (
    Baseline,
    HrvReading,
    NotEnoughDataError,
    RrSample,
    StreamingHrvAnalyzer,
    StressState,
    ValidationRange,
    calibrate,
    classify,
)
from hrvcam.sim.protocol import (
    TAP_DOUBLE,
    Frame,
    FrameKind,
    decode_rr,
    decode_tap,
)
from hrvcam.store import EventStore
from hrvcam.trigger import (
    CaptureRequest,
    EngineMode,
    EngineState,
    TapEvent,
    TriggerConfig,
    clear_in_flight,
    on_reading,
    on_tap,
)


class EventLog:
    """Append-only transition log with plug-in observers (stream, file sink)."""

    def __init__(self):
        self.records: list[tuple[int, str, dict]] = []
        self.observers: list[Callable[[int, str, dict], None]] = []

    def append(self, t_ms: int, kind: str, **details) -> None:
        self.records.append((t_ms, kind, details))
        for observer in self.observers:
            observer(t_ms, kind, details)

    @staticmethod
    def format_line(t_ms: int, kind: str, details: dict) -> str:
        return f"{t_ms} {kind} {json.dumps(details, sort_keys=True, separators=(',', ':'))}"

    def lines(self) -> list[str]:
        return [self.format_line(*record) for record in self.records]

    def count(self, kind: str) -> int:
        return sum(1 for _, k, _ in self.records if k == kind)


@dataclass
class EngineConfig:
    validation: ValidationRange = field(default_factory=ValidationRange)
    window_ms: int = 25_000
    min_beats: int = 10
    calibration_period_ms: int = 7 * 86_400_000
    min_calibration_samples: int = 100
    k: float = 1.5
    trigger: TriggerConfig = field(default_factory=TriggerConfig)


class MonitoringEngine:
    """Calibrates, classifies, triggers, and records captures.

    Single logical event loop: frames and timers arrive strictly in clock
    order; at most one capture transfer is serviced at a time.
    """

    def __init__(
        self,
        clock,
        store: EventStore,
        log: EventLog,
        config: EngineConfig,
        send_to_glasses: Callable[[Frame], bool],
        glasses_connected: Callable[[], bool],
        schedule_reveals: bool = True,
    ):
        self.clock = clock
        self.store = store
        self.log = log
        self.config = config
        self.send_to_glasses = send_to_glasses
        self.glasses_connected = glasses_connected
        self.schedule_reveals = schedule_reveals
        self.state = EngineState()
        self.analyzer = StreamingHrvAnalyzer(
            window_ms=config.window_ms,
            min_beats=config.min_beats,
            validation=config.validation,
        )
        self.baseline: Baseline | None = None
        self.last_reading: HrvReading | None = None
        self._calibration_readings: list[HrvReading] = []
        self._calibration_deadline: int | None = None
        self._session: CaptureSession | None = None
        self._next_capture_id = 1

    # -- lifecycle ----------------------------------------------------

    def start(self, baseline: Baseline | None = None) -> None:
        now = self.clock.now()
        if baseline is not None:
            self.baseline = baseline
            self._set_mode(EngineMode.MONITORING, "baseline_loaded", now)
            return
        self._calibration_deadline = now + self.config.calibration_period_ms
        self._set_mode(EngineMode.CALIBRATING, "started", now)
        if hasattr(self.clock, "schedule"):
            self.clock.schedule(self._calibration_deadline, self._maybe_finish_calibration)

    def _set_mode(self, mode: EngineMode, reason: str, now: int) -> None:
        old = self.state.mode
        self.state = EngineState(
            mode=mode,
            last_capture_at=self.state.last_capture_at,
            consecutive_stressed=self.state.consecutive_stressed,
            in_flight=self.state.in_flight,
        )
        self.log.append(now, "state_change", frm=old.value, to=mode.value, reason=reason)

    @property
    def mode(self) -> EngineMode:
        return self.state.mode

    @property
    def in_flight(self) -> int | None:
        return self.state.in_flight

    # -- frame dispatch -----------------------------------------------

    def on_frame(self, frame: Frame) -> None:
        if frame.kind is FrameKind.RR_SAMPLE:
            if not frame.crc_ok():
                self.log.append(self.clock.now(), "frame_corrupt", kind=frame.kind.value)
                return
            t, rr, seq = decode_rr(frame)
            self.on_sample(RrSample(t=t, rr=rr, seq=seq))
        elif frame.kind is FrameKind.TAP:
            if not frame.crc_ok():
                self.log.append(self.clock.now(), "frame_corrupt", kind=frame.kind.value)
                return
            t, tap_kind = decode_tap(frame)
            self.on_tap_event(t, tap_kind)
        else:
            # Capture transfer traffic; CRC is the session's concern.
            if self._session is not None:
                self._session.on_frame(frame)

    # -- RR path ------------------------------------------------------

    def on_sample(self, sample: RrSample) -> None:
        reason, reading = self.analyzer.offer(sample)
        if reason is not None:
            self.log.append(sample.t, "rr_rejected", seq=sample.seq, rr=sample.rr, reason=reason)
            return
        self.last_reading = reading or self.last_reading
        if self.state.mode is EngineMode.CALIBRATING:
            self._on_calibrating_reading(sample, reading)
        elif self.state.mode in (EngineMode.MONITORING, EngineMode.PAUSED):
            self._on_monitored_reading(sample, reading)

    def _log_reading(self, reading: HrvReading | None, window_end: int, label: str) -> None:
        if reading is None:
            self.log.append(window_end, "reading", state=label, n_beats=self.analyzer.window_size)
        else:
            self.log.append(
                window_end,
                "reading",
                state=label,
                rmssd=round(reading.rmssd, 6),
                n_beats=reading.n_beats,
                mean_hr=round(reading.mean_hr, 3),
            )

    def _on_calibrating_reading(self, sample: RrSample, reading: HrvReading | None) -> None:
        if reading is not None:
            self._calibration_readings.append(reading)
            self._log_reading(reading, sample.t, "unclassified")
        else:
            self._log_reading(None, sample.t, StressState.INSUFFICIENT_DATA.value)
        if self._calibration_deadline is not None and sample.t >= self._calibration_deadline:
            self._maybe_finish_calibration()

    def _maybe_finish_calibration(self) -> None:
        if self.state.mode is not EngineMode.CALIBRATING:
            return
        now = self.clock.now()
        if self._calibration_deadline is None or now < self._calibration_deadline:
            return
        try:
            self.baseline = calibrate(
                self._calibration_readings,
                min_samples=self.config.min_calibration_samples,
                k=self.config.k,
            )
        except NotEnoughDataError:
            return  # keep calibrating until enough readings arrive
        self.log.append(
            now,
            "baseline",
            mean=round(self.baseline.mean, 6),
            sd=round(self.baseline.sd, 6),
            n_samples=self.baseline.n_samples,
            threshold=round(self.baseline.threshold(), 6),
        )
        self._set_mode(EngineMode.MONITORING, "calibrated", now)

    def _on_monitored_reading(self, sample: RrSample, reading: HrvReading | None) -> None:
        classification = classify(reading, self.baseline)
        self._log_reading(reading, sample.t, classification.value)
        was_blockable = (
            classification is StressState.STRESSED
            and self.state.mode is EngineMode.MONITORING
            and self.state.in_flight is not None
        )
        self.state, request = on_reading(
            self.state,
            reading,
            classification,
            now=sample.t,
            config=self.config.trigger,
            next_capture_id=self._next_capture_id,
        )
        if request is not None:
            self._next_capture_id += 1
            self._start_capture(request)
        elif was_blockable and self.state.consecutive_stressed >= self.config.trigger.debounce_count:
            self.log.append(sample.t, "capture_skipped", reason="in_flight")

    # -- taps ---------------------------------------------------------

    def on_tap_event(self, t: int, tap_kind: int) -> None:
        if tap_kind != TAP_DOUBLE:
            self.log.append(t, "tap_ignored", reason="not_double_tap")
            return
        old = self.state.mode
        self.state, toggled = on_tap(self.state, TapEvent(t=t))
        if toggled:
            self.log.append(t, "state_change", frm=old.value, to=self.state.mode.value, reason="double_tap")
            self.store.append_pause_toggle(t, self.state.mode.value)
        else:
            self.log.append(t, "tap_ignored", reason=f"mode_{old.value}")

    # -- capture path -------------------------------------------------

    def _start_capture(self, request: CaptureRequest) -> None:
        self.log.append(
            request.requested_at,
            "capture_started",
            id=request.capture_id,
            hr_bpm=round(request.hr_bpm, 3),
            rmssd_ms=round(request.rmssd_ms, 6),
        )
        self._session = CaptureSession(
            request=request,
            clock=self.clock,
            send=self.send_to_glasses,
            is_connected=self.glasses_connected,
            config=self.config.trigger,
            on_done=self._capture_done,
        )
        self._session.start()

    def _capture_done(self, outcome: CaptureOutcome) -> None:
        self._session = None
        self.state = clear_in_flight(self.state)
        request = outcome.request
        baseline = self.baseline
        snapshot = {
            "mean": baseline.mean if baseline else 0.0,
            "sd": baseline.sd if baseline else 0.0,
            "k": baseline.k if baseline else self.config.k,
        }
        now = self.clock.now()
        if outcome.status == "complete":
            record = self.store.append_capture(
                capture_id=request.capture_id,
                captured_at=request.requested_at,
                hr_bpm=request.hr_bpm,
                rmssd_ms=request.rmssd_ms,
                baseline=snapshot,
                status="complete",
                image=outcome.image,
                audio=outcome.audio,
            )
            self.log.append(
                now,
                "capture_complete",
                id=request.capture_id,
                image_ref=record["image_ref"],
                audio_ref=record["audio_ref"],
                attempts=outcome.attempts,
            )
            if self.schedule_reveals and hasattr(self.clock, "schedule"):
                reveal_at = record["reveal_at"]
                self.clock.schedule(
                    reveal_at,
                    lambda rid=request.capture_id, at=reveal_at: self.log.append(at, "reveal", id=rid),
                )
        else:
            self.store.append_capture(
                capture_id=request.capture_id,
                captured_at=request.requested_at,
                hr_bpm=request.hr_bpm,
                rmssd_ms=request.rmssd_ms,
                baseline=snapshot,
                status="failed",
                failure_reason=outcome.failure_reason.value,
            )
            self.log.append(
                now,
                "capture_failed",
                id=request.capture_id,
                reason=outcome.failure_reason.value,
                attempts=outcome.attempts,
            )
