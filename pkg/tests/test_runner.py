"""End-to-end simulation runs: determinism, fault soundness, payload integrity."""

import filecmp
import json
from pathlib import Path

import pytest

from hrvcam.engine import EngineConfig
from hrvcam.runner import run_scenario
from hrvcam.sim.payloads import parse_pgm, synth_audio, synth_image, wav_info
from hrvcam.sim.scenario import Episode, FaultWindow, Scenario
from hrvcam.store import EventStore
from hrvcam.trigger import TriggerConfig

CFG = EngineConfig(calibration_period_ms=300_000)

ONE_EPISODE = Scenario(
    duration=600, rr_mean=800, rr_jitter=40, seed=7,
    episodes=(Episode(360, 90, 15, 85),),
)


def store_fingerprint(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def records(root: Path) -> list[dict]:
    return [json.loads(line) for line in (root / "events.jsonl").open()]


class TestEndToEnd:
    def test_episode_produces_complete_captures(self, tmp_path):
        summary = run_scenario(ONE_EPISODE, tmp_path / "s", CFG)
        assert summary.captures_total > 0
        assert summary.failed == 0
        assert summary.baseline is not None

    def test_identical_runs_identical_stores(self, tmp_path):
        run_scenario(ONE_EPISODE, tmp_path / "a", CFG)
        run_scenario(ONE_EPISODE, tmp_path / "b", CFG)
        assert store_fingerprint(tmp_path / "a") == store_fingerprint(tmp_path / "b")

    def test_different_seed_different_store(self, tmp_path):
        other = Scenario(
            duration=600, rr_mean=800, rr_jitter=40, seed=8,
            episodes=(Episode(360, 90, 15, 85),),
        )
        run_scenario(ONE_EPISODE, tmp_path / "a", CFG)
        run_scenario(other, tmp_path / "b", CFG)
        assert (
            (tmp_path / "a" / "events.jsonl").read_bytes()
            != (tmp_path / "b" / "events.jsonl").read_bytes()
        )

    def test_stored_payloads_match_synthesizer(self, tmp_path):
        run_scenario(ONE_EPISODE, tmp_path / "s", CFG)
        store = EventStore(tmp_path / "s")
        for eid in store.event_ids():
            record = next(r for r in records(tmp_path / "s") if r.get("id") == eid)
            image = store.blob_path(record["image_ref"]).read_bytes()
            audio = store.blob_path(record["audio_ref"]).read_bytes()
            width, height, maxval, raster = parse_pgm(image)
            assert (width, height, maxval) == (1280, 720, 255)
            channels, sampwidth, rate, frames = wav_info(audio)
            assert (channels, sampwidth, rate, frames) == (1, 2, 8000, 24_000)
            assert audio == synth_audio(eid)
        store.close()

    def test_image_bytes_equal_synth_for_glasses_timestamp(self, tmp_path):
        run_scenario(ONE_EPISODE, tmp_path / "s", CFG)
        store = EventStore(tmp_path / "s")
        for record in records(tmp_path / "s"):
            if record["kind"] != "capture":
                continue
            image = store.blob_path(record["image_ref"]).read_bytes()
            _, _, _, raster = parse_pgm(image)
            from hrvcam.sim.payloads import image_band_values

            cid, glasses_t = image_band_values(raster)
            assert cid == record["id"]
            assert image == synth_image(cid, glasses_t)
        store.close()


class TestFaults:
    def test_disconnect_over_trigger_yields_failed_event(self, tmp_path):
        # Seed 30's rest segments never dip below threshold, so the episode
        # produces the only stressed run and the disconnect covers it.
        scenario = Scenario(
            duration=600, rr_mean=800, rr_jitter=40, seed=30,
            episodes=(Episode(360, 90, 15, 85),),
            faults=(FaultWindow(350, 200, "disconnect"),),
        )
        config = EngineConfig(
            calibration_period_ms=300_000,
            trigger=TriggerConfig(retrigger_while_stressed=False),
        )
        summary = run_scenario(scenario, tmp_path / "s", config)
        assert summary.failed == 1
        assert summary.complete == 0
        failed = [r for r in records(tmp_path / "s") if r["kind"] == "capture"]
        assert len(failed) == 1
        assert failed[0]["failure_reason"] in ("disconnected", "timeout")
        assert failed[0]["hr_bpm"] > 0 and failed[0]["rmssd_ms"] > 0  # metadata kept
        assert "image_ref" not in failed[0]

    def test_zero_faults_zero_failures_multiple_seeds(self, tmp_path):
        for seed in (3, 7, 21):
            scenario = Scenario(
                duration=600, rr_mean=800, rr_jitter=40, seed=seed,
                episodes=(Episode(360, 90, 15, 85),),
            )
            summary = run_scenario(scenario, tmp_path / f"s{seed}", CFG)
            assert summary.failed == 0


class TestEngineLog:
    def test_log_mirrors_store(self, tmp_path):
        run_scenario(ONE_EPISODE, tmp_path / "s", CFG)
        log_lines = (tmp_path / "s" / "engine.log").read_text().splitlines()
        kinds = [line.split(" ", 2)[1] for line in log_lines]
        captures = [r for r in records(tmp_path / "s") if r["kind"] == "capture"]
        assert kinds.count("capture_started") == len(captures)
        assert kinds.count("capture_complete") == sum(
            1 for r in captures if r["status"] == "complete"
        )
        assert kinds.count("capture_failed") == sum(
            1 for r in captures if r["status"] == "failed"
        )
        # every started capture resolves exactly once
        assert kinds.count("capture_started") == (
            kinds.count("capture_complete") + kinds.count("capture_failed")
        )

    def test_calibration_transition_logged(self, tmp_path):
        run_scenario(ONE_EPISODE, tmp_path / "s", CFG)
        lines = (tmp_path / "s" / "engine.log").read_text().splitlines()
        changes = [l for l in lines if " state_change " in l]
        assert any('"to":"calibrating"' in l for l in changes)
        assert any('"to":"monitoring"' in l and '"reason":"calibrated"' in l for l in changes)


class TestTapsInSim:
    def test_pause_window_suppresses_captures(self, tmp_path):
        # Taps bracket the episode, so the whole stressed stretch is paused.
        scenario = Scenario(
            duration=600, rr_mean=800, rr_jitter=40, seed=30,
            episodes=(Episode(360, 90, 15, 85),),
            taps=(340.0, 560.0),
        )
        summary = run_scenario(scenario, tmp_path / "s", CFG)
        assert summary.captures_total == 0
        recs = records(tmp_path / "s")
        toggles = [r for r in recs if r["kind"] == "pause_toggle"]
        assert [t["mode"] for t in toggles] == ["paused", "monitoring"]
