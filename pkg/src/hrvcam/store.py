"""Capture event store: append-only record log, content-addressed blobs,
delayed reveal, annotations, and batch export.

Layout under the store root:

    events.jsonl   one JSON record per line (schema-versioned, append-only)
    blobs/         payload files named by content hash (.pgm / .wav)
    engine.log     transition log written by the simulation runner
    exports/       default location for export archives

Record kinds in the log: capture, annotation, template, pause_toggle,
tombstone. Opening a store replays the log from the top, so current state
is always exactly what a replay reconstructs. Blob references never leave
the store before an event's reveal time; until then views carry metadata
and annotations only, marked ``revealed: false``. Annotations are welcome
in both phases (the metadata phase is when contextual notes are freshest).

Single-writer, multi-reader: every mutation funnels through one lock and
readers see a consistent prefix of the log.
"""

from __future__ import annotations

import hashlib
import json
import threading
import zipfile
from pathlib import Path
from typing import Any

REVEAL_DELAY_MS_DEFAULT = 86_400_000
PAUSE_CONTEXT_WINDOW_MS = 60_000
RECORD_VERSION = 1

FIELD_INPUTS = ("text", "scale_1_to_5", "choice")


class StoreError(Exception):
    pass


class DuplicateEventError(StoreError):
    pass


class UnknownEventError(StoreError):
    pass


class DuplicateTemplateError(StoreError):
    pass


class UnknownTemplateError(StoreError):
    pass


class TemplateValidationError(StoreError):
    """Annotation or template rejected; carries the offending field id."""

    def __init__(self, message: str, field_id: str | None = None):
        super().__init__(message)
        self.field_id = field_id


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def validate_template(template: dict) -> None:
    if not isinstance(template.get("template_id"), str) or not template["template_id"]:
        raise TemplateValidationError("template_id must be a non-empty string")
    if not isinstance(template.get("title"), str) or not template["title"]:
        raise TemplateValidationError("title must be a non-empty string")
    fields = template.get("fields")
    if not isinstance(fields, list) or not fields:
        raise TemplateValidationError("fields must be a non-empty list")
    seen: set[str] = set()
    for f in fields:
        fid = f.get("field_id")
        if not isinstance(fid, str) or not fid:
            raise TemplateValidationError("every field needs a field_id")
        if fid in seen:
            raise TemplateValidationError(f"duplicate field_id {fid!r}", field_id=fid)
        seen.add(fid)
        if not isinstance(f.get("prompt"), str) or not f["prompt"]:
            raise TemplateValidationError(f"field {fid!r}: prompt required", field_id=fid)
        if f.get("input") not in FIELD_INPUTS:
            raise TemplateValidationError(
                f"field {fid!r}: input must be one of {FIELD_INPUTS}", field_id=fid
            )
        if f["input"] == "choice":
            options = f.get("options")
            if not isinstance(options, list) or not options:
                raise TemplateValidationError(
                    f"field {fid!r}: choice input needs options", field_id=fid
                )
        if not isinstance(f.get("required"), bool):
            raise TemplateValidationError(f"field {fid!r}: required must be boolean", field_id=fid)


def _validate_responses(template: dict, responses: dict) -> None:
    fields = {f["field_id"]: f for f in template["fields"]}
    for fid in responses:
        if fid not in fields:
            raise TemplateValidationError(f"unknown field {fid!r}", field_id=fid)
    for fid, f in fields.items():
        value = responses.get(fid)
        answered = value is not None and value != ""
        if not answered:
            if f["required"]:
                raise TemplateValidationError(f"required field {fid!r} unanswered", field_id=fid)
            continue
        if f["input"] == "scale_1_to_5":
            if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
                raise TemplateValidationError(
                    f"field {fid!r}: expected integer 1..5", field_id=fid
                )
        elif f["input"] == "choice":
            if value not in f["options"]:
                raise TemplateValidationError(
                    f"field {fid!r}: {value!r} not in options", field_id=fid
                )
        elif not isinstance(value, str):
            raise TemplateValidationError(f"field {fid!r}: expected text", field_id=fid)


class EventStore:
    def __init__(self, root: str | Path, reveal_delay_ms: int = REVEAL_DELAY_MS_DEFAULT):
        self.root = Path(root)
        self.reveal_delay_ms = reveal_delay_ms
        self.blob_dir = self.root / "blobs"
        self.log_path = self.root / "events.jsonl"
        self.root.mkdir(parents=True, exist_ok=True)
        self.blob_dir.mkdir(exist_ok=True)
        self._lock = threading.RLock()
        self._events: dict[int, dict] = {}
        self._annotations: dict[int, list[dict]] = {}
        self._templates: dict[str, dict] = {}
        self._tombstoned: set[int] = set()
        self._pause_toggles: list[int] = []
        self._replay()
        self._fh = open(self.log_path, "a", encoding="utf-8", newline="\n")

    # -- log machinery ------------------------------------------------

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _apply(self, record: dict) -> None:
        kind = record["kind"]
        if kind == "capture":
            self._events[record["id"]] = record
        elif kind == "annotation":
            self._annotations.setdefault(record["event_id"], []).append(record["annotation"])
        elif kind == "template":
            self._templates[record["template"]["template_id"]] = record["template"]
        elif kind == "pause_toggle":
            self._pause_toggles.append(record["t"])
        elif kind == "tombstone":
            self._tombstoned.add(record["event_id"])

    def _append(self, record: dict) -> None:
        record = {"v": RECORD_VERSION, **record}
        self._fh.write(_dumps(record) + "\n")
        self._fh.flush()
        self._apply(record)

    def close(self) -> None:
        with self._lock:
            self._fh.close()

    # -- writes -------------------------------------------------------

    def append_capture(
        self,
        capture_id: int,
        captured_at: int,
        hr_bpm: float,
        rmssd_ms: float,
        baseline: dict,
        status: str,
        failure_reason: str | None = None,
        image: bytes | None = None,
        audio: bytes | None = None,
    ) -> dict:
        """Persist one capture event; blobs are written content-addressed first."""
        if status not in ("complete", "failed"):
            raise StoreError(f"bad status {status!r}")
        if status == "failed" and (image is not None or audio is not None):
            raise StoreError("failed captures carry no payloads")
        if status == "complete" and (image is None or audio is None):
            raise StoreError("complete captures need both payloads")
        with self._lock:
            if capture_id in self._events:
                raise DuplicateEventError(f"event id {capture_id} already stored")
            record: dict[str, Any] = {
                "kind": "capture",
                "id": capture_id,
                "captured_at": captured_at,
                "hr_bpm": hr_bpm,
                "rmssd_ms": rmssd_ms,
                "baseline": baseline,
                "status": status,
                "reveal_at": captured_at + self.reveal_delay_ms,
            }
            if status == "failed":
                record["failure_reason"] = failure_reason or "unknown"
            else:
                record["image_ref"] = self._write_blob(image, "pgm")
                record["audio_ref"] = self._write_blob(audio, "wav")
            self._append(record)
            return record

    def _write_blob(self, data: bytes, ext: str) -> str:
        digest = hashlib.sha256(data).hexdigest()
        ref = f"blobs/{digest}.{ext}"
        path = self.root / ref
        if not path.exists():
            path.write_bytes(data)
        return ref

    def append_pause_toggle(self, t: int, mode: str) -> None:
        with self._lock:
            self._append({"kind": "pause_toggle", "t": t, "mode": mode})

    def add_template(self, template: dict) -> dict:
        validate_template(template)
        with self._lock:
            if template["template_id"] in self._templates:
                raise DuplicateTemplateError(f"template {template['template_id']!r} exists")
            self._append({"kind": "template", "template": template})
            return template

    def annotate(
        self,
        event_id: int,
        kind: str,
        now: int,
        text: str = "",
        template_id: str | None = None,
        responses: dict | None = None,
    ) -> dict:
        """Append one annotation; allowed before and after reveal."""
        if kind not in ("free_text", "template"):
            raise StoreError(f"bad annotation kind {kind!r}")
        with self._lock:
            if event_id not in self._events:
                raise UnknownEventError(f"no event {event_id}")
            annotation: dict[str, Any] = {"created_at": now, "kind": kind, "text": text}
            if kind == "template":
                if template_id is None:
                    raise TemplateValidationError("template annotation needs template_id")
                template = self._templates.get(template_id)
                if template is None:
                    raise UnknownTemplateError(f"no template {template_id!r}")
                _validate_responses(template, responses or {})
                annotation["template_id"] = template_id
                annotation["responses"] = responses or {}
            self._append({"kind": "annotation", "event_id": event_id, "annotation": annotation})
            return annotation

    def withdraw(self, event_id: int, now: int) -> None:
        """Tombstone an event: excluded from future exports, log retained."""
        with self._lock:
            if event_id not in self._events:
                raise UnknownEventError(f"no event {event_id}")
            self._append({"kind": "tombstone", "event_id": event_id, "t": now})

    # -- reads --------------------------------------------------------

    def event_ids(self) -> list[int]:
        with self._lock:
            return sorted(self._events)

    def templates(self) -> list[dict]:
        with self._lock:
            return [self._templates[k] for k in sorted(self._templates)]

    def counters(self) -> tuple[int, int]:
        """(captures_total, failures_total)."""
        with self._lock:
            total = len(self._events)
            failed = sum(1 for e in self._events.values() if e["status"] == "failed")
            return total, failed

    def pause_toggles(self) -> list[int]:
        with self._lock:
            return list(self._pause_toggles)

    def _pause_context(self, captured_at: int) -> bool:
        return any(
            abs(t - captured_at) <= PAUSE_CONTEXT_WINDOW_MS for t in self._pause_toggles
        )

    def view_event(self, event_id: int, now: int, role: str = "client") -> dict:
        """Reveal-gated view: metadata and annotations always, blob refs only
        once ``now`` has reached the event's reveal time. The export role sees
        exactly the same redaction as the client role."""
        with self._lock:
            record = self._events.get(event_id)
            if record is None:
                raise UnknownEventError(f"no event {event_id}")
            return self._view(record, now)

    def _view(self, record: dict, now: int) -> dict:
        revealed = now >= record["reveal_at"]
        annotations = list(self._annotations.get(record["id"], ()))
        view = {
            "id": record["id"],
            "captured_at": record["captured_at"],
            "hr_bpm": record["hr_bpm"],
            "rmssd_ms": record["rmssd_ms"],
            "baseline": record["baseline"],
            "status": record["status"],
            "reveal_at": record["reveal_at"],
            "revealed": revealed,
            "pause_context": self._pause_context(record["captured_at"]),
            "annotations": annotations,
            "annotation_count": len(annotations),
        }
        if record["status"] == "failed":
            view["failure_reason"] = record["failure_reason"]
        elif revealed:
            view["image_ref"] = record["image_ref"]
            view["audio_ref"] = record["audio_ref"]
        return view

    def list_events(
        self,
        now: int,
        from_ms: int | None = None,
        to_ms: int | None = None,
        status: str | None = None,
        include_tombstoned: bool = True,
    ) -> list[dict]:
        with self._lock:
            views = []
            for eid in sorted(self._events, key=lambda i: (self._events[i]["captured_at"], i)):
                record = self._events[eid]
                if not include_tombstoned and eid in self._tombstoned:
                    continue
                if from_ms is not None and record["captured_at"] < from_ms:
                    continue
                if to_ms is not None and record["captured_at"] > to_ms:
                    continue
                if status is not None and record["status"] != status:
                    continue
                views.append(self._view(record, now))
            return views

    def blob_path(self, ref: str) -> Path:
        path = (self.root / ref).resolve()
        if not str(path).startswith(str(self.blob_dir.resolve())):
            raise StoreError(f"ref {ref!r} escapes the blob directory")
        if not path.exists():
            raise StoreError(f"missing blob {ref!r}")
        return path

    def blob_for_event(self, event_id: int, which: str, now: int) -> Path | None:
        """Path to a revealed event's blob, None while unrevealed or absent."""
        view = self.view_event(event_id, now)
        ref = view.get(f"{which}_ref")
        return self.blob_path(ref) if ref else None

    # -- export -------------------------------------------------------

    def export(
        self,
        out_path: str | Path,
        now: int,
        from_ms: int | None = None,
        to_ms: int | None = None,
        include_unrevealed: bool = False,
        include_failed: bool = True,
    ) -> tuple[Path, int]:
        """Write the review archive; returns (path, manifest record count).

        The archive holds manifest.json (one record per event, metadata plus
        annotations), summary.csv, and blob files for revealed complete
        events. Unrevealed events appear metadata-only and only when asked
        for; their blob bytes are never included. Tombstoned events are
        excluded entirely. Same filter and clock in, byte-identical zip out.
        """
        with self._lock:
            views = self.list_events(now, from_ms, to_ms, include_tombstoned=False)
            manifest = []
            for view in views:
                if view["status"] == "failed" and not include_failed:
                    continue
                if not view["revealed"] and not include_unrevealed:
                    continue
                manifest.append(view)

            summary_rows = ["captured_at,hr_bpm,rmssd_ms,status,annotation_count"]
            for view in manifest:
                summary_rows.append(
                    f"{view['captured_at']},{view['hr_bpm']!r},{view['rmssd_ms']!r},"
                    f"{view['status']},{view['annotation_count']}"
                )

            blob_refs = []
            for view in manifest:
                for which in ("image_ref", "audio_ref"):
                    if view.get(which):
                        blob_refs.append(view[which])

            out_path = Path(out_path)
            out_path.parent.mkdir(parents=True, exist_ok=True)
            with zipfile.ZipFile(out_path, "w") as zf:
                self._zip_entry(zf, "manifest.json", json.dumps(manifest, sort_keys=True, indent=2))
                self._zip_entry(zf, "summary.csv", "\n".join(summary_rows) + "\n")
                for ref in sorted(set(blob_refs)):
                    self._zip_entry(zf, ref, self.blob_path(ref).read_bytes())
            return out_path, len(manifest)

    @staticmethod
    def _zip_entry(zf: zipfile.ZipFile, name: str, data: str | bytes) -> None:
        # Fixed timestamp and attributes keep repeat exports byte-identical.
        info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
        info.external_attr = 0o644 << 16
        zf.writestr(info, data, compress_type=zipfile.ZIP_STORED)
