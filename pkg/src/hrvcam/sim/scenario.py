"""Scenario documents: scripted physiology, taps, and link faults for one run.

The on-disk form is JSON validated against data/scenario.schema.json; field
names mirror the dataclasses here. Times are seconds from scenario start,
RR values are milliseconds, and the seed fully determines every generated
stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

FAULT_KINDS = ("disconnect", "latency", "drop_pct")
FAULT_LINKS = ("glasses", "watch")


class ScenarioError(Exception):
    """Malformed scenario document; message names the offending field."""


@dataclass(frozen=True, slots=True)
class Episode:
    start_s: float
    duration_s: float
    hr_increase_pct: float
    jitter_suppression_pct: float

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


@dataclass(frozen=True, slots=True)
class FaultWindow:
    start_s: float
    duration_s: float
    kind: str
    pct: float = 100.0
    delay_ms: float = 2000.0
    link: str = "glasses"

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s

    def active(self, t_ms: float) -> bool:
        return self.start_s * 1000.0 <= t_ms < self.end_s * 1000.0


@dataclass(frozen=True, slots=True)
class Scenario:
    duration: float
    rr_mean: float
    rr_jitter: float
    seed: int
    episodes: tuple[Episode, ...] = ()
    taps: tuple[float, ...] = ()
    faults: tuple[FaultWindow, ...] = ()

    @property
    def duration_ms(self) -> int:
        return int(round(self.duration * 1000))


def _schema() -> dict:
    text = resources.files("hrvcam.data").joinpath("scenario.schema.json").read_text("utf-8")
    return json.loads(text)


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "(document root)"
        raise ScenarioError(f"field {path}: {e.message}") from e

    episodes = tuple(
        Episode(
            start_s=float(ep["start_s"]),
            duration_s=float(ep["duration_s"]),
            hr_increase_pct=float(ep["hr_increase_pct"]),
            jitter_suppression_pct=float(ep["jitter_suppression_pct"]),
        )
        for ep in doc.get("episodes", [])
    )
    faults = tuple(
        FaultWindow(
            start_s=float(f["start_s"]),
            duration_s=float(f["duration_s"]),
            kind=f["kind"],
            pct=float(f.get("pct", 100.0)),
            delay_ms=float(f.get("delay_ms", 2000.0)),
            link=f.get("link", "glasses"),
        )
        for f in doc.get("faults", [])
    )
    scenario = Scenario(
        duration=float(doc["duration"]),
        rr_mean=float(doc["rr_mean"]),
        rr_jitter=float(doc["rr_jitter"]),
        seed=int(doc["seed"]),
        episodes=episodes,
        taps=tuple(float(t) for t in doc.get("taps", [])),
        faults=faults,
    )

    for i, ep in enumerate(scenario.episodes):
        if ep.end_s > scenario.duration:
            raise ScenarioError(f"field episodes/{i}: extends past duration")
    for i, f in enumerate(scenario.faults):
        if f.end_s > scenario.duration:
            raise ScenarioError(f"field faults/{i}: extends past duration")
    for i, t in enumerate(scenario.taps):
        if not 0 <= t <= scenario.duration:
            raise ScenarioError(f"field taps/{i}: outside [0, duration]")
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: line {e.lineno}: invalid JSON: {e.msg}") from e
    try:
        return scenario_from_dict(doc)
    except ScenarioError as e:
        raise ScenarioError(f"{path}: {e}") from e


def bundled_scenario_path(name: str) -> Path:
    """Resolve a scenario shipped in hrvcam.data (e.g. ``two_episode``)."""
    candidate = resources.files("hrvcam.data").joinpath(f"{name}.json")
    if not candidate.is_file():
        raise ScenarioError(f"no bundled scenario named {name!r}")
    return Path(str(candidate))
