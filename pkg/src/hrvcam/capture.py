"""One capture's transfer lifecycle, from command to Complete/Failed.

A session sends the capture command, collects the chunked response, and
resolves to exactly one outcome. Stalls are detected by an inactivity
timeout; a stalled or incomplete attempt gets one command retry before the
capture is declared failed. A link that is down when a command would go
out fails as ``disconnected``; a frame that arrives with a bad CRC fails
the capture as ``checksum_mismatch`` (no retry, the corruption is made
visible instead). Failures are recorded, never silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from hrvcam.sim.clock import VirtualClock
from hrvcam.sim.link import FrameSink
from hrvcam.sim.protocol import (
    CHUNK_BYTES,
    Frame,
    FrameKind,
    NACK_CHECKSUM,
    capture_cmd_frame,
    decode_capture_meta,
    nack_frame,
)
from hrvcam.trigger import CaptureRequest, FailureReason, TriggerConfig

MAX_ATTEMPTS = 2

CAPTURE_FRAME_KINDS = (
    FrameKind.CAPTURE_META,
    FrameKind.CHUNK,
    FrameKind.CAPTURE_END,
)


@dataclass(frozen=True, slots=True)
class CaptureOutcome:
    request: CaptureRequest
    status: str
    failure_reason: FailureReason | None = None
    image: bytes | None = None
    audio: bytes | None = None
    glasses_t_ms: int | None = None
    attempts: int = 1


class CaptureSession:
    def __init__(
        self,
        request: CaptureRequest,
        clock: VirtualClock,
        send: Callable[[Frame], bool],
        is_connected: Callable[[], bool],
        config: TriggerConfig,
        on_done: Callable[[CaptureOutcome], None],
    ):
        self.request = request
        self.clock = clock
        self.send = send
        self.is_connected = is_connected
        self.config = config
        self.on_done = on_done
        self.resolved = False
        self.attempt = 0
        self._reset_attempt_state()

    def _reset_attempt_state(self) -> None:
        self._meta: tuple[int, int, int] | None = None
        self._chunks: list[bytes] = []
        self._broken = False
        self._last_activity = self.clock.now()

    def start(self) -> None:
        self._begin_attempt()

    def _begin_attempt(self) -> None:
        if not self.is_connected():
            self._fail(FailureReason.DISCONNECTED)
            return
        self.attempt += 1
        self._reset_attempt_state()
        self.send(capture_cmd_frame(self.request.capture_id, self.attempt, self.clock.now()))
        self._arm_timer()

    def _arm_timer(self) -> None:
        self.clock.schedule(
            self._last_activity + self.config.transfer_timeout_ms, self._on_timer
        )

    def _on_timer(self) -> None:
        if self.resolved:
            return
        idle = self.clock.now() - self._last_activity
        if idle < self.config.transfer_timeout_ms:
            self._arm_timer()
            return
        if not self.is_connected():
            self._fail(FailureReason.DISCONNECTED)
        elif self.attempt < MAX_ATTEMPTS:
            self._begin_attempt()
        else:
            self._fail(FailureReason.TIMEOUT)

    def on_frame(self, frame: Frame) -> None:
        if self.resolved or frame.kind not in CAPTURE_FRAME_KINDS:
            return
        if frame.capture_id != self.request.capture_id or frame.attempt != self.attempt:
            return
        if not frame.crc_ok():
            self.send(nack_frame(self.request.capture_id, self.attempt, NACK_CHECKSUM))
            self._fail(FailureReason.CHECKSUM_MISMATCH)
            return
        self._last_activity = self.clock.now()
        if self._broken:
            return
        if frame.kind is FrameKind.CAPTURE_META:
            self._meta = decode_capture_meta(frame)
        elif frame.kind is FrameKind.CHUNK:
            if frame.chunk_index != len(self._chunks):
                self._broken = True
                return
            self._chunks.append(frame.payload)
        elif frame.kind is FrameKind.CAPTURE_END:
            self._finish()

    def _finish(self) -> None:
        if self._meta is None:
            self._broken = True
            return
        glasses_t, image_size, audio_size = self._meta
        n_image = -(-image_size // CHUNK_BYTES)
        image = b"".join(self._chunks[:n_image])
        audio = b"".join(self._chunks[n_image:])
        if len(image) != image_size or len(audio) != audio_size:
            self._broken = True
            return
        self.resolved = True
        self.on_done(
            CaptureOutcome(
                request=self.request,
                status="complete",
                image=image,
                audio=audio,
                glasses_t_ms=glasses_t,
                attempts=self.attempt,
            )
        )

    def _fail(self, reason: FailureReason) -> None:
        self.resolved = True
        self.on_done(
            CaptureOutcome(
                request=self.request,
                status="failed",
                failure_reason=reason,
                attempts=max(self.attempt, 1),
            )
        )


def run_capture(
    request: CaptureRequest,
    clock: VirtualClock,
    send: Callable[[Frame], bool],
    is_connected: Callable[[], bool],
    config: TriggerConfig | None = None,
    receive: "FrameSink | None" = None,
) -> CaptureOutcome:
    """Drive one capture to completion on an otherwise idle scheduler.

    The responder (glasses plus links) must share ``clock``; this pumps
    scheduled events until the session resolves. Pass the glasses uplink's
    FrameSink as ``receive`` so deliveries reach the session. The live
    engine routes frames into a session directly instead.
    """
    config = config or TriggerConfig()
    box: list[CaptureOutcome] = []
    session = CaptureSession(request, clock, send, is_connected, config, box.append)
    if receive is not None:
        receive.handler = session.on_frame
    session.start()
    while not box and clock.run_next():
        pass
    if not box:
        raise RuntimeError("capture session never resolved")
    return box[0]
