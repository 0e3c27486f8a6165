"""Deterministic capture payload synthesis.

The simulated glasses produce a 1280x720 grayscale PGM raster and a 3.0 s
8 kHz 16-bit mono WAV. Both are pure functions of (capture_id, timestamp):
the raster is 16 horizontal bands of 45 rows encoding the big-endian bytes
of capture_id and timestamp, the audio is a sine at 200 + (capture_id mod
800) Hz. Identical inputs give byte-identical files, which is what makes
end-to-end transfer checks and store determinism assertable.
"""

from __future__ import annotations

import io
import wave

import numpy as np

IMAGE_WIDTH = 1280
IMAGE_HEIGHT = 720
PGM_MAXVAL = 255

AUDIO_RATE_HZ = 8000
AUDIO_SECONDS = 3.0
AUDIO_SAMPLES = int(AUDIO_RATE_HZ * AUDIO_SECONDS)
AUDIO_BASE_HZ = 200
AUDIO_SPAN_HZ = 800
AUDIO_AMPLITUDE = 16000

_BAND_ROWS = IMAGE_HEIGHT // 16


def synth_image(capture_id: int, timestamp_ms: int) -> bytes:
    """Render the banded PGM (P5) raster for one capture."""
    id_bytes = int(capture_id).to_bytes(8, "big")
    t_bytes = int(timestamp_ms).to_bytes(8, "big", signed=False)
    band_values = np.frombuffer(id_bytes + t_bytes, dtype=np.uint8)
    rows = np.repeat(band_values, _BAND_ROWS)
    raster = np.broadcast_to(rows[:, None], (IMAGE_HEIGHT, IMAGE_WIDTH))
    header = f"P5\n{IMAGE_WIDTH} {IMAGE_HEIGHT}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + raster.tobytes()


def parse_pgm(data: bytes) -> tuple[int, int, int, bytes]:
    """Return (width, height, maxval, raster) of a binary PGM."""
    if not data.startswith(b"P5"):
        raise ValueError("not a binary PGM")
    parts = data.split(b"\n", 3)
    if len(parts) < 4:
        raise ValueError("truncated PGM header")
    width, height = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    return width, height, maxval, parts[3]


def image_band_values(raster: bytes) -> tuple[int, int]:
    """Recover (capture_id, timestamp_ms) from a synthesized raster."""
    values = bytes(raster[band * _BAND_ROWS * IMAGE_WIDTH] for band in range(16))
    return int.from_bytes(values[:8], "big"), int.from_bytes(values[8:], "big")


def synth_audio(capture_id: int) -> bytes:
    """Render the 3 s sine WAV for one capture."""
    freq = AUDIO_BASE_HZ + (int(capture_id) % AUDIO_SPAN_HZ)
    n = np.arange(AUDIO_SAMPLES)
    samples = np.round(AUDIO_AMPLITUDE * np.sin(2.0 * np.pi * freq * n / AUDIO_RATE_HZ))
    pcm = samples.astype("<i2").tobytes()
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(AUDIO_RATE_HZ)
        wav.writeframes(pcm)
    return buf.getvalue()


def wav_info(data: bytes) -> tuple[int, int, int, int]:
    """Return (channels, sample_width, rate, n_frames) of a WAV blob."""
    with wave.open(io.BytesIO(data), "rb") as wav:
        return wav.getnchannels(), wav.getsampwidth(), wav.getframerate(), wav.getnframes()


def synth_payloads(capture_id: int, timestamp_ms: int) -> tuple[bytes, bytes]:
    return synth_image(capture_id, timestamp_ms), synth_audio(capture_id)
