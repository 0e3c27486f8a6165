"""RR-interval stream analysis: validation, windowed RMSSD, baseline, classification.

The pipeline is: raw RR samples -> physiological-range validation ->
25-second sliding-window RMSSD readings -> personalized baseline
(mean / sample SD of calm-period readings) -> binary stress call when a
reading drops strictly below mean - k*sd.

Everything here is pure except :class:`StreamingHrvAnalyzer`, which is the
single-writer accumulator used by the live engine. Readings it emits are
plain immutable values.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

WINDOW_MS_DEFAULT = 25_000
MIN_BEATS_DEFAULT = 10
BASELINE_K_DEFAULT = 1.5
MIN_CALIBRATION_SAMPLES_DEFAULT = 100

REASON_OUT_OF_RANGE = "out_of_range"


class StressState(Enum):
    CALM = "calm"
    STRESSED = "stressed"
    INSUFFICIENT_DATA = "insufficient_data"


@dataclass(frozen=True, slots=True)
class RrSample:
    """One beat-to-beat interval.

    t: arrival timestamp, ms since session epoch (non-decreasing in a stream).
    rr: interval length in ms (> 0).
    seq: device-assigned sequence number, strictly increasing in a stream.
    """

    t: int
    rr: float
    seq: int


@dataclass(frozen=True, slots=True)
class HrvReading:
    """Windowed RMSSD value at ``window_end``.

    n_diffs counts the adjacent-seq pairs that contributed successive
    differences; it is at most n_beats - 1.
    """

    window_end: int
    rmssd: float
    n_beats: int
    n_diffs: int
    mean_hr: float


@dataclass(frozen=True, slots=True)
class Baseline:
    """Calibration statistics defining the personal stress threshold."""

    mean: float
    sd: float
    n_samples: int
    period_start: int
    period_end: int
    k: float = BASELINE_K_DEFAULT

    def threshold(self) -> float:
        return self.mean - self.k * self.sd

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "sd": self.sd,
            "n_samples": self.n_samples,
            "period_start": self.period_start,
            "period_end": self.period_end,
            "k": self.k,
            "threshold": self.threshold(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Baseline":
        return cls(
            mean=float(d["mean"]),
            sd=float(d["sd"]),
            n_samples=int(d["n_samples"]),
            period_start=int(d.get("period_start", 0)),
            period_end=int(d.get("period_end", 0)),
            k=float(d.get("k", BASELINE_K_DEFAULT)),
        )


@dataclass(frozen=True, slots=True)
class ValidationRange:
    """Accepted physiological RR range, inclusive on both ends."""

    min_rr: float = 300.0
    max_rr: float = 2000.0


class NotEnoughDataError(Exception):
    """Raised by calibrate() when fewer readings than required arrived."""

    def __init__(self, count: int, required: int):
        self.count = count
        self.required = required
        super().__init__(f"calibration needs {required} readings, got {count}")


class DataFormatError(Exception):
    """Malformed replay file; message names the offending line and field."""


def validate_rr(sample: RrSample, rng: ValidationRange = ValidationRange()) -> str | None:
    """Return None if the sample is physiologically plausible, else a reason code.

    A rejected sample never enters a window, and it breaks pair-adjacency:
    the samples on either side of it are not seq-adjacent, so the pair
    straddling the reject contributes no successive difference.
    """
    if sample.rr < rng.min_rr or sample.rr > rng.max_rr:
        return REASON_OUT_OF_RANGE
    return None


def _reading_from_window(
    window: Sequence[RrSample], window_end: int, min_beats: int
) -> HrvReading | None:
    """Compute one reading from the samples inside a window.

    ``window`` must hold accepted samples ordered by (t, seq). Successive
    differences are taken only between samples whose seq numbers are
    adjacent; gaps from rejected or dropped beats contribute nothing.
    Returns None (insufficient data) below ``min_beats`` or when no
    adjacent pair exists.
    """
    n = len(window)
    if n < min_beats:
        return None
    sum_rr = 0.0
    sum_sq = 0.0
    m = 0
    prev = None
    for s in window:
        sum_rr += s.rr
        if prev is not None and s.seq == prev.seq + 1:
            d = s.rr - prev.rr
            sum_sq += d * d
            m += 1
        prev = s
    if m == 0:
        return None
    return HrvReading(
        window_end=window_end,
        rmssd=math.sqrt(sum_sq / m),
        n_beats=n,
        n_diffs=m,
        mean_hr=60_000.0 / (sum_rr / n),
    )


def window_rmssd(
    samples: Sequence[RrSample],
    window_end: int,
    window_ms: int = WINDOW_MS_DEFAULT,
    min_beats: int = MIN_BEATS_DEFAULT,
) -> HrvReading | None:
    """Batch evaluation of the window at ``window_end``.

    The window contains accepted samples with t in
    (window_end - window_ms, window_end]. Returns None when the window
    holds fewer than ``min_beats`` samples or no adjacent-seq pair.
    """
    lo = window_end - window_ms
    window = [s for s in samples if lo < s.t <= window_end]
    return _reading_from_window(window, window_end, min_beats)


def calibrate(
    readings: Sequence[HrvReading],
    min_samples: int = MIN_CALIBRATION_SAMPLES_DEFAULT,
    k: float = BASELINE_K_DEFAULT,
) -> Baseline:
    """Build the personal baseline from calm-period readings.

    Mean and sample standard deviation (n-1 denominator) of the rmssd
    values. Raises NotEnoughDataError below ``min_samples``.
    """
    n = len(readings)
    if n < min_samples:
        raise NotEnoughDataError(n, min_samples)
    values = [r.rmssd for r in readings]
    mean = math.fsum(values) / n
    if n > 1:
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
    else:
        sd = 0.0
    return Baseline(
        mean=mean,
        sd=sd,
        n_samples=n,
        period_start=readings[0].window_end,
        period_end=readings[-1].window_end,
        k=k,
    )


def classify(reading: HrvReading | None, baseline: Baseline) -> StressState:
    """Stressed iff rmssd drops strictly below mean - k*sd; None passes through."""
    if reading is None:
        return StressState.INSUFFICIENT_DATA
    if reading.rmssd < baseline.threshold():
        return StressState.STRESSED
    return StressState.CALM


@dataclass
class StreamingHrvAnalyzer:
    """Single-writer sliding-window accumulator.

    Feed accepted samples in stream order via :meth:`push`; each push emits
    the reading for the window ending at that sample's timestamp (or None
    when the window is too thin). Equivalent to calling
    :func:`window_rmssd` on the full accepted stream at every sample time.

    Rejected samples must go through :meth:`note_rejected` so the validator
    counters stay truthful; they never touch the window.
    """

    window_ms: int = WINDOW_MS_DEFAULT
    min_beats: int = MIN_BEATS_DEFAULT
    validation: ValidationRange = field(default_factory=ValidationRange)
    accepted_count: int = 0
    rejected_count: int = 0
    _window: deque = field(default_factory=deque)
    _last_seq: int | None = None
    _last_t: int | None = None

    def push(self, sample: RrSample) -> HrvReading | None:
        """Accepts an already-validated sample; returns the new reading."""
        self._check_order(sample)
        self.accepted_count += 1
        self._window.append(sample)
        lo = sample.t - self.window_ms
        w = self._window
        while w and w[0].t <= lo:
            w.popleft()
        return _reading_from_window(w, sample.t, self.min_beats)

    def offer(self, sample: RrSample) -> tuple[str | None, HrvReading | None]:
        """Validate then push. Returns (rejection_reason, reading)."""
        reason = validate_rr(sample, self.validation)
        if reason is not None:
            self.note_rejected(sample)
            return reason, None
        return None, self.push(sample)

    def note_rejected(self, sample: RrSample) -> None:
        self._check_order(sample)
        self.rejected_count += 1

    @property
    def window_size(self) -> int:
        return len(self._window)

    def _check_order(self, sample: RrSample) -> None:
        if self._last_seq is not None and sample.seq <= self._last_seq:
            raise ValueError(
                f"seq must strictly increase: got {sample.seq} after {self._last_seq}"
            )
        if self._last_t is not None and sample.t < self._last_t:
            raise ValueError(f"t must be non-decreasing: got {sample.t} after {self._last_t}")
        self._last_seq = sample.seq
        self._last_t = sample.t


RR_CSV_HEADER = ["t_ms", "rr_ms", "seq"]
ANALYSIS_CSV_HEADER = ["window_end_ms", "rmssd_ms", "n_beats", "mean_hr", "state"]


def read_rr_csv(path) -> Iterator[RrSample]:
    """Parse a replay file (header ``t_ms,rr_ms,seq``), yielding samples in order."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != RR_CSV_HEADER:
            raise DataFormatError(f"{path}: line 1: expected header {','.join(RR_CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise DataFormatError(f"{path}: line {lineno}: expected 3 fields, got {len(row)}")
            try:
                t = int(row[0])
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: field t_ms: not an integer")
            try:
                rr = float(row[1])
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: field rr_ms: not a number")
            try:
                seq = int(row[2])
            except ValueError:
                raise DataFormatError(f"{path}: line {lineno}: field seq: not an integer")
            yield RrSample(t=t, rr=rr, seq=seq)


def analyze_stream(
    samples: Iterable[RrSample],
    baseline: Baseline | None = None,
    window_ms: int = WINDOW_MS_DEFAULT,
    min_beats: int = MIN_BEATS_DEFAULT,
    validation: ValidationRange | None = None,
) -> Iterator[tuple[HrvReading | None, int, str]]:
    """Run the streaming analyzer over samples.

    Yields (reading, window_end, state_label) per accepted sample. The label
    is calm/stressed when a baseline is given, ``unclassified`` otherwise,
    and ``insufficient_data`` for thin windows either way.
    """
    analyzer = StreamingHrvAnalyzer(
        window_ms=window_ms,
        min_beats=min_beats,
        validation=validation or ValidationRange(),
    )
    for sample in samples:
        reason, reading = analyzer.offer(sample)
        if reason is not None:
            continue
        if reading is None:
            label = StressState.INSUFFICIENT_DATA.value
        elif baseline is None:
            label = "unclassified"
        else:
            label = classify(reading, baseline).value
        yield reading, sample.t, label


def format_analysis_row(reading: HrvReading | None, window_end: int, label: str) -> list[str]:
    if reading is None:
        return [str(window_end), "", "", "", label]
    return [
        str(window_end),
        f"{reading.rmssd:.6f}",
        str(reading.n_beats),
        f"{reading.mean_hr:.3f}",
        label,
    ]
