"""Event store: durability, reveal gating, annotations, tombstones, export."""

import json
import zipfile

import pytest

from hrvcam.sim.payloads import synth_audio, synth_image
from hrvcam.store import (
    DuplicateEventError,
    DuplicateTemplateError,
    EventStore,
    StoreError,
    TemplateValidationError,
    UnknownEventError,
    UnknownTemplateError,
    validate_template,
)

DAY_MS = 86_400_000
BASELINE = {"mean": 24.0, "sd": 2.0, "k": 1.5}


@pytest.fixture
def store(tmp_path):
    s = EventStore(tmp_path / "store")
    yield s
    s.close()


def add_complete(store, capture_id=1, captured_at=1000):
    return store.append_capture(
        capture_id=capture_id,
        captured_at=captured_at,
        hr_bpm=78.5,
        rmssd_ms=11.25,
        baseline=BASELINE,
        status="complete",
        image=synth_image(capture_id, captured_at),
        audio=synth_audio(capture_id),
    )


def add_failed(store, capture_id=2, captured_at=2000, reason="disconnected"):
    return store.append_capture(
        capture_id=capture_id,
        captured_at=captured_at,
        hr_bpm=80.0,
        rmssd_ms=10.0,
        baseline=BASELINE,
        status="failed",
        failure_reason=reason,
    )


class TestAppend:
    def test_complete_round_trip(self, store):
        add_complete(store)
        view = store.view_event(1, now=1000 + DAY_MS)
        assert view["status"] == "complete"
        assert view["image_ref"].startswith("blobs/")
        assert store.blob_path(view["image_ref"]).read_bytes() == synth_image(1, 1000)
        assert store.blob_path(view["audio_ref"]).read_bytes() == synth_audio(1)

    def test_failed_round_trip_no_blobs(self, store):
        add_failed(store)
        view = store.view_event(2, now=2000 + DAY_MS)
        assert view["status"] == "failed"
        assert view["failure_reason"] == "disconnected"
        assert "image_ref" not in view and "audio_ref" not in view

    def test_duplicate_id_rejected(self, store):
        add_complete(store)
        with pytest.raises(DuplicateEventError):
            add_complete(store)

    def test_failed_with_payload_rejected(self, store):
        with pytest.raises(StoreError):
            store.append_capture(
                capture_id=9, captured_at=0, hr_bpm=70, rmssd_ms=10,
                baseline=BASELINE, status="failed", failure_reason="timeout",
                image=b"x", audio=None,
            )

    def test_unknown_id_not_found(self, store):
        with pytest.raises(UnknownEventError):
            store.view_event(404, now=0)

    def test_blobs_content_addressed(self, store, tmp_path):
        add_complete(store, capture_id=1, captured_at=1000)
        n_before = len(list(store.blob_dir.iterdir()))
        # identical payload bytes land in the same files
        store.append_capture(
            capture_id=5, captured_at=1000, hr_bpm=70, rmssd_ms=9,
            baseline=BASELINE, status="complete",
            image=synth_image(1, 1000), audio=synth_audio(1),
        )
        assert len(list(store.blob_dir.iterdir())) == n_before


class TestReveal:
    def test_metadata_only_before_reveal(self, store):
        add_complete(store, captured_at=0)
        view = store.view_event(1, now=23 * 3_600_000)  # +23 h
        assert view["revealed"] is False
        assert "image_ref" not in view and "audio_ref" not in view
        assert view["hr_bpm"] == 78.5  # metadata still present

    def test_revealed_at_and_after_boundary(self, store):
        add_complete(store, captured_at=0)
        assert store.view_event(1, now=DAY_MS)["revealed"] is True        # +24 h exactly
        assert store.view_event(1, now=25 * 3_600_000)["revealed"] is True  # +25 h

    def test_reveal_monotone(self, store, rng):
        add_complete(store, captured_at=0)
        revealed_seen = False
        for t in sorted(rng.randrange(0, 3 * DAY_MS) for _ in range(500)):
            revealed = store.view_event(1, now=t)["revealed"]
            if revealed_seen:
                assert revealed
            revealed_seen = revealed or revealed_seen

    def test_blob_access_gated(self, store):
        add_complete(store, captured_at=0)
        assert store.blob_for_event(1, "image", now=DAY_MS - 1) is None
        assert store.blob_for_event(1, "image", now=DAY_MS) is not None

    def test_custom_reveal_delay(self, tmp_path):
        store = EventStore(tmp_path / "s", reveal_delay_ms=1000)
        add_complete(store, captured_at=0)
        assert store.view_event(1, now=999)["revealed"] is False
        assert store.view_event(1, now=1000)["revealed"] is True
        store.close()


TEMPLATE = {
    "template_id": "coping-v1",
    "title": "Stress coping check-in",
    "fields": [
        {"field_id": "situation", "prompt": "What was happening?", "input": "text", "required": True},
        {"field_id": "intensity", "prompt": "How intense was it?", "input": "scale_1_to_5", "required": True},
        {"field_id": "strategy", "prompt": "What did you try?", "input": "choice",
         "options": ["breathing", "walking", "talking", "other"], "required": False},
    ],
}


class TestAnnotations:
    def test_free_text_on_unrevealed_event(self, store):
        add_complete(store, captured_at=0)
        store.annotate(1, kind="free_text", now=60_000, text="crowded elevator")
        view = store.view_event(1, now=60_001)  # still unrevealed
        assert view["revealed"] is False
        assert view["annotation_count"] == 1
        assert view["annotations"][0]["text"] == "crowded elevator"

    def test_append_only_order_kept(self, store):
        add_complete(store, captured_at=0)
        store.annotate(1, kind="free_text", now=10, text="first")
        store.annotate(1, kind="free_text", now=20, text="second")
        texts = [a["text"] for a in store.view_event(1, now=30)["annotations"]]
        assert texts == ["first", "second"]

    def test_template_annotation_valid(self, store):
        add_complete(store)
        store.add_template(TEMPLATE)
        store.annotate(
            1, kind="template", now=5000, template_id="coping-v1",
            responses={"situation": "meeting", "intensity": 4},
        )
        note = store.view_event(1, now=5001)["annotations"][0]
        assert note["template_id"] == "coping-v1"
        assert note["responses"]["intensity"] == 4

    def test_missing_required_field_names_it(self, store):
        add_complete(store)
        store.add_template(TEMPLATE)
        with pytest.raises(TemplateValidationError) as err:
            store.annotate(1, kind="template", now=0, template_id="coping-v1",
                           responses={"situation": "meeting"})
        assert err.value.field_id == "intensity"

    def test_scale_range_enforced(self, store):
        add_complete(store)
        store.add_template(TEMPLATE)
        with pytest.raises(TemplateValidationError):
            store.annotate(1, kind="template", now=0, template_id="coping-v1",
                           responses={"situation": "x", "intensity": 6})

    def test_choice_must_be_option(self, store):
        add_complete(store)
        store.add_template(TEMPLATE)
        with pytest.raises(TemplateValidationError):
            store.annotate(1, kind="template", now=0, template_id="coping-v1",
                           responses={"situation": "x", "intensity": 3, "strategy": "yelling"})

    def test_unknown_template(self, store):
        add_complete(store)
        with pytest.raises(UnknownTemplateError):
            store.annotate(1, kind="template", now=0, template_id="nope", responses={})

    def test_unknown_event(self, store):
        with pytest.raises(UnknownEventError):
            store.annotate(99, kind="free_text", now=0, text="x")


class TestTemplates:
    def test_add_and_list(self, store):
        store.add_template(TEMPLATE)
        assert [t["template_id"] for t in store.templates()] == ["coping-v1"]

    def test_duplicate_rejected(self, store):
        store.add_template(TEMPLATE)
        with pytest.raises(DuplicateTemplateError):
            store.add_template(TEMPLATE)

    def test_duplicate_field_ids_rejected(self):
        bad = {
            "template_id": "t", "title": "T",
            "fields": [
                {"field_id": "a", "prompt": "p", "input": "text", "required": True},
                {"field_id": "a", "prompt": "q", "input": "text", "required": False},
            ],
        }
        with pytest.raises(TemplateValidationError):
            validate_template(bad)

    def test_choice_needs_options(self):
        bad = {
            "template_id": "t", "title": "T",
            "fields": [{"field_id": "a", "prompt": "p", "input": "choice", "required": True}],
        }
        with pytest.raises(TemplateValidationError):
            validate_template(bad)


class TestPauseContext:
    def test_toggle_within_minute_flags_event(self, store):
        store.append_pause_toggle(t=100_000, mode="paused")
        add_complete(store, captured_at=130_000)  # 30 s after the toggle
        assert store.view_event(1, now=130_000)["pause_context"] is True

    def test_far_toggle_does_not_flag(self, store):
        store.append_pause_toggle(t=0, mode="paused")
        add_complete(store, captured_at=300_000)
        assert store.view_event(1, now=300_000)["pause_context"] is False

    def test_toggle_after_capture_counts(self, store):
        add_complete(store, captured_at=100_000)
        store.append_pause_toggle(t=150_000, mode="paused")  # 50 s later
        assert store.view_event(1, now=200_000)["pause_context"] is True


class TestReplay:
    def test_reopen_reconstructs_state(self, tmp_path):
        root = tmp_path / "store"
        store = EventStore(root)
        add_complete(store, capture_id=1, captured_at=1000)
        add_failed(store, capture_id=2, captured_at=2000)
        store.add_template(TEMPLATE)
        store.annotate(1, kind="free_text", now=3000, text="note")
        store.append_pause_toggle(t=4000, mode="paused")
        store.withdraw(2, now=5000)
        store.close()

        reopened = EventStore(root)
        assert reopened.event_ids() == [1, 2]
        assert reopened.view_event(1, now=9000) == store.view_event(1, now=9000)
        assert reopened.templates() == store.templates()
        assert reopened.pause_toggles() == [4000]
        _, count = reopened.export(tmp_path / "x.zip", now=9000, include_unrevealed=True)
        assert count == 1  # tombstoned event 2 stays out
        reopened.close()


class TestExport:
    def _loaded(self, path):
        with zipfile.ZipFile(path) as zf:
            names = sorted(zf.namelist())
            manifest = json.loads(zf.read("manifest.json"))
            summary = zf.read("summary.csv").decode().strip().splitlines()
        return names, manifest, summary

    def test_revealed_events_with_blobs(self, store, tmp_path):
        for i in (1, 2, 3):
            add_complete(store, capture_id=i, captured_at=i * 1000)
        path, count = store.export(tmp_path / "a.zip", now=DAY_MS + 10_000)
        names, manifest, summary = self._loaded(path)
        assert count == 3 and len(manifest) == 3
        blob_names = [n for n in names if n.startswith("blobs/")]
        assert len([n for n in blob_names if n.endswith(".pgm")]) == 3
        assert len([n for n in blob_names if n.endswith(".wav")]) == 3

    def test_failed_event_record_without_blobs(self, store, tmp_path):
        add_failed(store, capture_id=1, captured_at=1000)
        path, count = store.export(tmp_path / "a.zip", now=DAY_MS * 2, include_failed=True)
        names, manifest, _ = self._loaded(path)
        assert count == 1
        assert manifest[0]["failure_reason"] == "disconnected"
        assert not any(n.startswith("blobs/") for n in names)

    def test_exclude_failed(self, store, tmp_path):
        add_complete(store, capture_id=1)
        add_failed(store, capture_id=2)
        _, count = store.export(tmp_path / "a.zip", now=DAY_MS * 2, include_failed=False)
        assert count == 1

    def test_unrevealed_excluded_by_default(self, store, tmp_path):
        add_complete(store, capture_id=1, captured_at=0)
        _, count = store.export(tmp_path / "a.zip", now=DAY_MS - 1)
        assert count == 0

    def test_unrevealed_included_as_metadata_only(self, store, tmp_path):
        add_complete(store, capture_id=1, captured_at=0)
        path, count = store.export(tmp_path / "a.zip", now=DAY_MS - 1, include_unrevealed=True)
        names, manifest, _ = self._loaded(path)
        assert count == 1
        assert manifest[0]["revealed"] is False
        assert "image_ref" not in manifest[0]
        assert not any(n.startswith("blobs/") for n in names)

    def test_empty_store_valid_archive(self, store, tmp_path):
        path, count = store.export(tmp_path / "a.zip", now=0)
        names, manifest, summary = self._loaded(path)
        assert count == 0 and manifest == []
        assert summary == ["captured_at,hr_bpm,rmssd_ms,status,annotation_count"]

    def test_time_filter(self, store, tmp_path):
        for i in (1, 2, 3):
            add_complete(store, capture_id=i, captured_at=i * 10_000)
        _, count = store.export(
            tmp_path / "a.zip", now=DAY_MS * 2, from_ms=15_000, to_ms=25_000
        )
        assert count == 1

    def test_idempotent_byte_identical(self, store, tmp_path):
        add_complete(store, capture_id=1, captured_at=1000)
        add_failed(store, capture_id=2, captured_at=2000)
        store.annotate(1, kind="free_text", now=3000, text="note")
        a, _ = store.export(tmp_path / "a.zip", now=DAY_MS * 2)
        b, _ = store.export(tmp_path / "b.zip", now=DAY_MS * 2)
        assert a.read_bytes() == b.read_bytes()

    def test_summary_matches_manifest(self, store, tmp_path):
        add_complete(store, capture_id=1, captured_at=1000)
        add_failed(store, capture_id=2, captured_at=2000)
        store.annotate(1, kind="free_text", now=3000, text="note")
        path, _ = store.export(tmp_path / "a.zip", now=DAY_MS * 2)
        _, manifest, summary = self._loaded(path)
        assert len(summary) == len(manifest) + 1
        for row, record in zip(summary[1:], manifest):
            captured_at, hr, rmssd, status, n_annotations = row.split(",")
            assert int(captured_at) == record["captured_at"]
            assert float(hr) == record["hr_bpm"]
            assert float(rmssd) == record["rmssd_ms"]
            assert status == record["status"]
            assert int(n_annotations) == record["annotation_count"]

    def test_tombstoned_event_absent(self, store, tmp_path):
        add_complete(store, capture_id=1, captured_at=1000)
        add_complete(store, capture_id=2, captured_at=2000)
        store.withdraw(1, now=3000)
        path, count = store.export(tmp_path / "a.zip", now=DAY_MS * 2)
        _, manifest, _ = self._loaded(path)
        assert count == 1
        assert [r["id"] for r in manifest] == [2]
