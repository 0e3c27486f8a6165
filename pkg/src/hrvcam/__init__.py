"""HRV-triggered wearable capture simulator.

Detects elevated stress from streamed RR intervals (windowed RMSSD against
a personalized baseline), triggers rate-limited contextual captures from a
simulated glasses device over a fault-injectable chunked link, and stores
the resulting image-audio events behind a delayed-reveal, annotatable,
exportable record.
"""

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
    validate_rr,
    window_rmssd,
)
from hrvcam.trigger import EngineMode, EngineState, TriggerConfig, on_reading, on_tap

__version__ = "0.1.0"

__all__ = [
    "Baseline",
    "EngineMode",
    "EngineState",
    "HrvReading",
    "NotEnoughDataError",
    "RrSample",
    "StreamingHrvAnalyzer",
    "StressState",
    "TriggerConfig",
    "ValidationRange",
    "calibrate",
    "classify",
    "on_reading",
    "on_tap",
    "validate_rr",
    "window_rmssd",
]
