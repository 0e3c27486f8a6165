"""HTTP surface: status, reveal-gated event views, blobs, annotations,
templates, export, simulation controls, and the server-sent event stream.

The API exposes exactly what the store's views expose; there is no side
door to blob bytes before an event's reveal time.
"""

from __future__ import annotations

import json
import queue
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from hrvcam.gateway.service import GatewayService
from hrvcam.store import (
    DuplicateTemplateError,
    StoreError,
    TemplateValidationError,
    UnknownEventError,
    UnknownTemplateError,
)

STREAM_KEEPALIVE_S = 0.25


class AnnotationBody(BaseModel):
    kind: Literal["free_text", "template"]
    text: str = ""
    template_id: str | None = None
    responses: dict | None = None


class TemplateField(BaseModel):
    field_id: str
    prompt: str
    input: Literal["text", "scale_1_to_5", "choice"]
    options: list[str] | None = None
    required: bool = False


class TemplateBody(BaseModel):
    template_id: str
    title: str
    fields: list[TemplateField]


class ExportBody(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    from_ms: int | None = Field(None, alias="from")
    to_ms: int | None = Field(None, alias="to")
    include_unrevealed: bool = False
    include_failed: bool = True
    out: str | None = None


class AdvanceBody(BaseModel):
    ms: int = Field(ge=0)


def create_app(service: GatewayService, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="hrvcam gateway", docs_url=None, redoc_url=None)

    @app.get("/api/status")
    def status():
        return service.status()

    @app.get("/api/events")
    def list_events(
        from_ms: int | None = Query(None, alias="from"),
        to_ms: int | None = Query(None, alias="to"),
        status: Literal["complete", "failed"] | None = None,
    ):
        return service.store.list_events(
            now=service.now(), from_ms=from_ms, to_ms=to_ms, status=status
        )

    @app.get("/api/events/{event_id}")
    def get_event(event_id: int):
        try:
            return service.store.view_event(event_id, now=service.now())
        except UnknownEventError as e:
            raise HTTPException(404, str(e))

    def _blob(event_id: int, which: str, media_type: str):
        try:
            path = service.store.blob_for_event(event_id, which, now=service.now())
        except UnknownEventError as e:
            raise HTTPException(404, str(e))
        if path is None:
            raise HTTPException(404, f"{which} not available (unrevealed, failed, or absent)")
        return FileResponse(path, media_type=media_type)

    @app.get("/api/events/{event_id}/image")
    def get_image(event_id: int):
        return _blob(event_id, "image", "image/x-portable-graymap")

    @app.get("/api/events/{event_id}/audio")
    def get_audio(event_id: int):
        return _blob(event_id, "audio", "audio/wav")

    @app.post("/api/events/{event_id}/annotations", status_code=201)
    def post_annotation(event_id: int, body: AnnotationBody):
        try:
            with service.lock:
                service.store.annotate(
                    event_id,
                    kind=body.kind,
                    now=service.now(),
                    text=body.text,
                    template_id=body.template_id,
                    responses=body.responses,
                )
                return service.store.view_event(event_id, now=service.now())
        except UnknownEventError as e:
            raise HTTPException(404, str(e))
        except (UnknownTemplateError, TemplateValidationError) as e:
            detail = {"error": str(e)}
            if getattr(e, "field_id", None):
                detail["field_id"] = e.field_id
            raise HTTPException(400, detail)

    @app.get("/api/templates")
    def list_templates():
        return service.store.templates()

    @app.post("/api/templates", status_code=201)
    def post_template(body: TemplateBody):
        template = body.model_dump(exclude_none=True)
        try:
            with service.lock:
                return service.store.add_template(template)
        except DuplicateTemplateError as e:
            raise HTTPException(409, str(e))
        except TemplateValidationError as e:
            detail = {"error": str(e)}
            if e.field_id:
                detail["field_id"] = e.field_id
            raise HTTPException(400, detail)

    @app.post("/api/export")
    def post_export(body: ExportBody):
        try:
            path, count = service.export(
                out=body.out,
                from_ms=body.from_ms,
                to_ms=body.to_ms,
                include_unrevealed=body.include_unrevealed,
                include_failed=body.include_failed,
            )
        except StoreError as e:
            raise HTTPException(400, str(e))
        return {"archive_path": str(path), "event_count": count}

    @app.post("/api/sim/pause-toggle")
    def pause_toggle():
        try:
            return {"mode": service.pause_toggle()}
        except RuntimeError as e:
            raise HTTPException(409, str(e))

    @app.post("/api/sim/advance")
    def advance(body: AdvanceBody):
        try:
            fired = service.advance(body.ms)
        except RuntimeError as e:
            raise HTTPException(409, str(e))
        return {"sim_time": service.now(), "events_fired": fired}

    @app.get("/api/stream")
    def stream(limit: int | None = None):
        # ``limit`` closes the stream after that many events; browsers leave
        # it unset, tests and curl use it to get a terminating response.
        def gen():
            q = service.bus.subscribe()
            sent = 0
            try:
                yield ": connected\n\n"
                while limit is None or sent < limit:
                    try:
                        item = q.get(timeout=STREAM_KEEPALIVE_S)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    data = json.dumps(item["data"], sort_keys=True)
                    yield f"id: {item['id']}\nevent: {item['event']}\ndata: {data}\n\n"
                    sent += 1
            finally:
                service.bus.unsubscribe(q)

        return StreamingResponse(
            gen(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "Connection": "keep-alive"},
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
