// Typed gateway client. Every request (including media URLs handed to
// <img>/<audio>) can be recorded, which is how the reveal-safety test
// asserts that no blob endpoint is ever touched for an unrevealed event.

import type {
  Annotation,
  AnnotationSubmission,
  ApiStatus,
  EventView,
  Template,
} from "./types.js";

export interface RequestRecord {
  method: string;
  url: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: unknown,
  ) {
    super(`gateway returned ${status}`);
  }
}

export class ApiClient {
  private recorder: RequestRecord[] | null = null;

  constructor(private base: string = "") {}

  recordInto(records: RequestRecord[]): void {
    this.recorder = records;
  }

  private note(method: string, url: string): void {
    this.recorder?.push({ method, url });
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const method = init?.method ?? "GET";
    this.note(method, path);
    const res = await fetch(this.base + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    if (!res.ok) {
      let detail: unknown = null;
      try {
        detail = (await res.json()).detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  status(): Promise<ApiStatus> {
    return this.request("/api/status");
  }

  events(params: { from_ms?: number; to_ms?: number; status?: string } = {}): Promise<EventView[]> {
    const q = new URLSearchParams();
    if (params.from_ms !== undefined) q.set("from", String(params.from_ms));
    if (params.to_ms !== undefined) q.set("to", String(params.to_ms));
    if (params.status) q.set("status", params.status);
    const qs = q.toString();
    return this.request(`/api/events${qs ? `?${qs}` : ""}`);
  }

  event(id: number): Promise<EventView> {
    return this.request(`/api/events/${id}`);
  }

  annotate(id: number, body: AnnotationSubmission): Promise<EventView> {
    return this.request(`/api/events/${id}/annotations`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  templates(): Promise<Template[]> {
    return this.request("/api/templates");
  }

  addTemplate(template: Template): Promise<Template> {
    return this.request("/api/templates", {
      method: "POST",
      body: JSON.stringify(template),
    });
  }

  export(body: {
    from_ms?: number;
    to_ms?: number;
    include_unrevealed?: boolean;
    include_failed?: boolean;
  }): Promise<{ archive_path: string; event_count: number }> {
    return this.request("/api/export", { method: "POST", body: JSON.stringify(body) });
  }

  pauseToggle(): Promise<{ mode: string }> {
    return this.request("/api/sim/pause-toggle", { method: "POST" });
  }

  advance(ms: number): Promise<{ sim_time: number; events_fired: number }> {
    return this.request("/api/sim/advance", {
      method: "POST",
      body: JSON.stringify({ ms }),
    });
  }

  // Media URLs are recorded at the moment the UI decides to use one; the
  // timeline only calls these for revealed events.
  imageUrl(id: number): string {
    const url = `/api/events/${id}/image`;
    this.note("MEDIA", url);
    return this.base + url;
  }

  audioUrl(id: number): string {
    const url = `/api/events/${id}/audio`;
    this.note("MEDIA", url);
    return this.base + url;
  }
}

export function isBlobRequest(record: RequestRecord): boolean {
  return /\/api\/events\/\d+\/(image|audio)$/.test(record.url);
}

export function blobRequestEventId(record: RequestRecord): number | null {
  const match = record.url.match(/\/api\/events\/(\d+)\/(image|audio)$/);
  return match ? Number(match[1]) : null;
}
