"""Simulated AR glasses: capture responder and tap source.

On a capture command the glasses synthesize the image and audio payloads
for that capture id, then stream CAPTURE_META, the chunk sequence, and
CAPTURE_END over their uplink, one frame per pacing interval. Scripted
double taps go out as TAP frames at their scenario times.
"""

from __future__ import annotations

from hrvcam.sim.clock import VirtualClock
from hrvcam.sim.link import SimLink
from hrvcam.sim.payloads import synth_payloads
from hrvcam.sim.protocol import (
    Frame,
    FrameKind,
    capture_end_frame,
    capture_meta_frame,
    chunk_frames,
    decode_capture_cmd,
    tap_frame,
)

CHUNK_INTERVAL_MS_DEFAULT = 5
SHUTTER_DELAY_MS_DEFAULT = 50


def build_capture_frames(capture_id: int, attempt: int, captured_t_ms: int) -> list[Frame]:
    """The full response sequence for one capture command, unpaced.

    META declares the payload byte counts; image chunks come first, audio
    chunks after, chunk indices contiguous from 0 across both sections.
    """
    image, audio = synth_payloads(capture_id, captured_t_ms)
    frames = [capture_meta_frame(capture_id, attempt, captured_t_ms, len(image), len(audio))]
    image_chunks = chunk_frames(image, capture_id, attempt, start_index=0)
    frames.extend(image_chunks)
    frames.extend(chunk_frames(audio, capture_id, attempt, start_index=len(image_chunks)))
    n_chunks = len(frames) - 1
    frames.append(capture_end_frame(capture_id, attempt, n_chunks))
    return frames


class GlassesSim:
    def __init__(
        self,
        clock: VirtualClock,
        uplink: SimLink,
        taps_s: tuple[float, ...] = (),
        chunk_interval_ms: int = CHUNK_INTERVAL_MS_DEFAULT,
        shutter_delay_ms: int = SHUTTER_DELAY_MS_DEFAULT,
    ):
        self.clock = clock
        self.uplink = uplink
        self.taps_s = taps_s
        self.chunk_interval_ms = chunk_interval_ms
        self.shutter_delay_ms = shutter_delay_ms
        self.captures_served = 0
        self.nacks_seen = 0

    def start(self) -> None:
        for tap_s in self.taps_s:
            at = int(round(tap_s * 1000))
            self.clock.schedule(at, lambda t=at: self.uplink.send(tap_frame(t)))

    def on_frame(self, frame: Frame) -> None:
        if not frame.crc_ok():
            return
        if frame.kind is FrameKind.CAPTURE_CMD:
            self._respond(frame)
        elif frame.kind is FrameKind.NACK:
            self.nacks_seen += 1

    def _respond(self, cmd: Frame) -> None:
        decode_capture_cmd(cmd)
        captured_t = self.clock.now() + self.shutter_delay_ms
        frames = build_capture_frames(cmd.capture_id, cmd.attempt, captured_t)
        self.captures_served += 1
        for i, f in enumerate(frames):
            at = captured_t + i * self.chunk_interval_ms
            self.clock.schedule(at, lambda fr=f: self.uplink.send(fr))
