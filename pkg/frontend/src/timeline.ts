// Capture timeline: newest first, metadata always, media only after reveal.
// Failed captures get a neutral card (metadata, calm wording, no media
// slot); connection trouble is presented as a system hiccup, never as
// something the wearer did wrong.

import { ApiClient } from "./api.js";
import { fmtCountdown, fmtRmssd } from "./format.js";
import type { EventView } from "./types.js";

export interface TimelineFilters {
  status: "" | "complete" | "failed";
  onlyRevealed: boolean;
  from_ms?: number;
  to_ms?: number;
}

export function filterItems(items: EventView[], filters: TimelineFilters): EventView[] {
  return items.filter((item) => {
    if (filters.status && item.status !== filters.status) return false;
    if (filters.onlyRevealed && !item.revealed) return false;
    if (filters.from_ms !== undefined && item.captured_at < filters.from_ms) return false;
    if (filters.to_ms !== undefined && item.captured_at > filters.to_ms) return false;
    return true;
  });
}

export function sortNewestFirst(items: EventView[]): EventView[] {
  return [...items].sort((a, b) => b.captured_at - a.captured_at || b.id - a.id);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function metadataRow(item: EventView): HTMLElement {
  const row = el("div", "card-meta");
  row.append(
    el("span", "chip", `HR ${item.hr_bpm.toFixed(0)} bpm`),
    el("span", "chip", `RMSSD ${fmtRmssd(item.rmssd_ms)} ms`),
    el(
      "span",
      "chip chip-muted",
      `threshold ${(item.baseline.mean - item.baseline.k * item.baseline.sd).toFixed(1)} ms`,
    ),
  );
  if (item.pause_context) {
    row.append(el("span", "chip chip-muted", "pause toggled nearby"));
  }
  return row;
}

export function renderCard(item: EventView, api: ApiClient, now: number): HTMLElement {
  const card = el("article", `card card-${item.status}${item.revealed ? "" : " card-unrevealed"}`);
  card.dataset.eventId = String(item.id);

  const header = el("header", "card-header");
  header.append(
    el("span", "card-id", `#${item.id}`),
    el("time", "card-time", `t+${Math.round(item.captured_at / 1000)}s`),
  );
  card.append(header);

  if (item.status === "failed") {
    // No media slot at all: the capture never happened, and that is fine.
    card.append(el("p", "card-failed-note", "This capture couldn't complete (connection hiccup). The moment's readings are still here."));
    card.append(metadataRow(item));
  } else if (!item.revealed) {
    card.append(el("p", "card-countdown", fmtCountdown(item.reveal_at, now)));
    card.append(metadataRow(item));
  } else {
    const media = el("div", "card-media");
    const img = el("img", "card-image");
    img.src = api.imageUrl(item.id);
    img.alt = `capture ${item.id}`;
    const audio = el("audio", "card-audio");
    audio.controls = true;
    audio.src = api.audioUrl(item.id);
    media.append(img, audio);
    card.append(media);
    card.append(metadataRow(item));
  }

  const notes = el("div", "card-annotations");
  for (const annotation of item.annotations) {
    const line = el("p", "annotation");
    const label = annotation.kind === "template" ? `[${annotation.template_id}] ` : "";
    const responses = annotation.responses
      ? Object.entries(annotation.responses)
          .map(([key, value]) => `${key}: ${value}`)
          .join(", ")
      : "";
    line.textContent = `${label}${annotation.text}${annotation.text && responses ? " | " : ""}${responses}`;
    notes.append(line);
  }
  card.append(notes);
  return card;
}

export function renderTimeline(
  container: HTMLElement,
  items: EventView[],
  api: ApiClient,
  now: number,
  filters: TimelineFilters = { status: "", onlyRevealed: false },
): void {
  container.textContent = "";
  const visible = sortNewestFirst(filterItems(items, filters));
  if (visible.length === 0) {
    container.append(
      el("p", "empty-state", "No captures yet. They'll appear here when a stressed moment triggers one."),
    );
    return;
  }
  for (const item of visible) {
    container.append(renderCard(item, api, now));
  }
}
