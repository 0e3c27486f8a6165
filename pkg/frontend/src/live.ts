// Live monitoring panel: rolling RMSSD chart with the personal threshold
// line, current state badge, and one marker per finished capture. The
// model is kept separate from the canvas so tests can assert on it without
// a rendering surface.

import type { StreamEvent } from "./types.js";

export interface ReadingPoint {
  t: number;
  rmssd: number | null; // null for insufficient-data readings
  state: string;
}

export interface CaptureMarker {
  captureId: number;
  t: number;
  kind: "complete" | "failed";
}

export interface GapMark {
  t: number;
}

const DEFAULT_SPAN_MS = 5 * 60_000;

export class LivePanelModel {
  readings: ReadingPoint[] = [];
  markers: CaptureMarker[] = [];
  gaps: GapMark[] = [];
  mode = "unknown";
  threshold: number | null = null;
  pendingCaptures = new Set<number>();
  lastT = 0;

  constructor(private spanMs: number = DEFAULT_SPAN_MS) {}

  handle(ev: StreamEvent): void {
    const t = Number(ev.data["t"] ?? 0);
    this.lastT = Math.max(this.lastT, t);
    switch (ev.event) {
      case "reading": {
        const rmssd = ev.data["rmssd"];
        this.readings.push({
          t,
          rmssd: typeof rmssd === "number" ? rmssd : null,
          state: String(ev.data["state"] ?? ""),
        });
        this.trim();
        break;
      }
      case "state_change":
        this.mode = String(ev.data["to"] ?? this.mode);
        break;
      case "capture_started":
        this.pendingCaptures.add(Number(ev.data["id"]));
        break;
      case "capture_complete":
        this.addMarker(Number(ev.data["id"]), t, "complete");
        break;
      case "capture_failed":
        this.addMarker(Number(ev.data["id"]), t, "failed");
        break;
      default:
        break;
    }
  }

  noteGap(): void {
    this.gaps.push({ t: this.lastT });
  }

  setThreshold(threshold: number | null): void {
    this.threshold = threshold;
  }

  private addMarker(captureId: number, t: number, kind: "complete" | "failed"): void {
    // one marker per capture, even if the stream replays after a reconnect
    if (this.markers.some((m) => m.captureId === captureId)) return;
    this.pendingCaptures.delete(captureId);
    this.markers.push({ captureId, t, kind });
  }

  private trim(): void {
    const cutoff = this.lastT - this.spanMs;
    while (this.readings.length > 0 && this.readings[0].t < cutoff) this.readings.shift();
    this.markers = this.markers.filter((m) => m.t >= cutoff);
    this.gaps = this.gaps.filter((g) => g.t >= cutoff);
  }
}

export function drawLivePanel(canvas: HTMLCanvasElement, model: LivePanelModel): void {
  const ctx = canvas.getContext?.("2d");
  if (!ctx) return; // headless test environment
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);

  const points = model.readings.filter((r) => r.rmssd !== null) as {
    t: number;
    rmssd: number;
    state: string;
  }[];
  if (points.length === 0) return;

  const t1 = model.lastT;
  const t0 = Math.min(points[0].t, t1 - 60_000);
  const values = points.map((p) => p.rmssd);
  const yMax = Math.max(...values, model.threshold ?? 0) * 1.25 + 1;
  const x = (t: number) => ((t - t0) / Math.max(1, t1 - t0)) * (width - 10) + 5;
  const y = (v: number) => height - (v / yMax) * (height - 10) - 5;

  if (model.threshold !== null) {
    ctx.strokeStyle = "#cc5555";
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(0, y(model.threshold));
    ctx.lineTo(width, y(model.threshold));
    ctx.stroke();
    ctx.setLineDash([]);
  }

  ctx.strokeStyle = "#3a7bd5";
  ctx.beginPath();
  points.forEach((p, i) => {
    if (i === 0) ctx.moveTo(x(p.t), y(p.rmssd));
    else ctx.lineTo(x(p.t), y(p.rmssd));
  });
  ctx.stroke();

  for (const gap of model.gaps) {
    ctx.fillStyle = "#999999";
    ctx.fillRect(x(gap.t) - 1, 0, 2, height);
  }

  for (const marker of model.markers) {
    ctx.fillStyle = marker.kind === "complete" ? "#2d9d78" : "#c98a2d";
    ctx.beginPath();
    ctx.arc(x(marker.t), 12, 6, 0, Math.PI * 2);
    ctx.fill();
  }
}
