"""BLE-shaped wire protocol between the simulated devices and the engine.

Frames carry at most 240 payload bytes (practical BLE MTU minus headers)
plus a CRC-32 the receiver must verify. Capture transfers are chunked:
CAPTURE_META declares the image and audio byte counts, CHUNK frames carry
contiguous 240-byte slices (indices start at 0, image slices first, audio
slices after), CAPTURE_END closes the sequence. An attempt counter on
capture frames keeps a retried command's frames distinct from stale ones
still in flight.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, replace
from enum import Enum

MAX_PAYLOAD = 240
CHUNK_BYTES = 240


class FrameKind(Enum):
    RR_SAMPLE = "rr_sample"
    TAP = "tap"
    CAPTURE_CMD = "capture_cmd"
    CAPTURE_META = "capture_meta"
    CHUNK = "chunk"
    CAPTURE_END = "capture_end"
    NACK = "nack"


TAP_DOUBLE = 2

NACK_CHECKSUM = 1
NACK_GAP = 2

_RR = struct.Struct("<QdI")
_TAP = struct.Struct("<QB")
_CMD = struct.Struct("<Q")
_META = struct.Struct("<QII")
_END = struct.Struct("<I")
_NACK = struct.Struct("<B")


@dataclass(frozen=True, slots=True)
class Frame:
    kind: FrameKind
    seq: int
    payload: bytes
    crc: int
    capture_id: int | None = None
    attempt: int | None = None
    chunk_index: int | None = None

    def crc_ok(self) -> bool:
        return zlib.crc32(self.payload) == self.crc

    def with_seq(self, seq: int) -> "Frame":
        return replace(self, seq=seq)


def make_frame(
    kind: FrameKind,
    payload: bytes = b"",
    capture_id: int | None = None,
    attempt: int | None = None,
    chunk_index: int | None = None,
) -> Frame:
    if len(payload) > MAX_PAYLOAD:
        raise ValueError(f"payload {len(payload)} exceeds {MAX_PAYLOAD} bytes")
    return Frame(
        kind=kind,
        seq=0,
        payload=payload,
        crc=zlib.crc32(payload),
        capture_id=capture_id,
        attempt=attempt,
        chunk_index=chunk_index,
    )


def rr_frame(t_ms: int, rr_ms: float, sample_seq: int) -> Frame:
    return make_frame(FrameKind.RR_SAMPLE, _RR.pack(t_ms, rr_ms, sample_seq))


def decode_rr(frame: Frame) -> tuple[int, float, int]:
    t, rr, seq = _RR.unpack(frame.payload)
    return t, rr, seq


def tap_frame(t_ms: int, tap_kind: int = TAP_DOUBLE) -> Frame:
    return make_frame(FrameKind.TAP, _TAP.pack(t_ms, tap_kind))


def decode_tap(frame: Frame) -> tuple[int, int]:
    t, kind = _TAP.unpack(frame.payload)
    return t, kind


def capture_cmd_frame(capture_id: int, attempt: int, t_ms: int) -> Frame:
    return make_frame(
        FrameKind.CAPTURE_CMD, _CMD.pack(t_ms), capture_id=capture_id, attempt=attempt
    )


def decode_capture_cmd(frame: Frame) -> int:
    return _CMD.unpack(frame.payload)[0]


def capture_meta_frame(
    capture_id: int, attempt: int, captured_t_ms: int, image_size: int, audio_size: int
) -> Frame:
    return make_frame(
        FrameKind.CAPTURE_META,
        _META.pack(captured_t_ms, image_size, audio_size),
        capture_id=capture_id,
        attempt=attempt,
    )


def decode_capture_meta(frame: Frame) -> tuple[int, int, int]:
    return _META.unpack(frame.payload)


def capture_end_frame(capture_id: int, attempt: int, n_chunks: int) -> Frame:
    return make_frame(
        FrameKind.CAPTURE_END, _END.pack(n_chunks), capture_id=capture_id, attempt=attempt
    )


def decode_capture_end(frame: Frame) -> int:
    return _END.unpack(frame.payload)[0]


def nack_frame(capture_id: int, attempt: int, code: int) -> Frame:
    return make_frame(FrameKind.NACK, _NACK.pack(code), capture_id=capture_id, attempt=attempt)


def chunk_frames(data: bytes, capture_id: int, attempt: int, start_index: int = 0) -> list[Frame]:
    """Slice one payload section into CHUNK frames of CHUNK_BYTES each.

    Indices continue from ``start_index`` so image and audio sections share
    one contiguous index space per capture.
    """
    frames = []
    for i in range(0, len(data), CHUNK_BYTES):
        frames.append(
            make_frame(
                FrameKind.CHUNK,
                data[i : i + CHUNK_BYTES],
                capture_id=capture_id,
                attempt=attempt,
                chunk_index=start_index + i // CHUNK_BYTES,
            )
        )
    return frames


def corrupt_payload(frame: Frame, bit: int) -> Frame:
    """Flip one payload bit without fixing the CRC. Test helper for fault drills."""
    data = bytearray(frame.payload)
    data[bit // 8] ^= 1 << (bit % 8)
    return replace(frame, payload=bytes(data))
