// Console bootstrap: timeline + annotation forms + live panel, all fed by
// the gateway's REST API and event stream.

import { ApiClient } from "./api.js";
import { AnnotationForm } from "./annotate.js";
import { fmtBpm, fmtRmssd } from "./format.js";
import { drawLivePanel, LivePanelModel } from "./live.js";
import { EventStreamClient } from "./stream.js";
import { renderTimeline, TimelineFilters } from "./timeline.js";
import type { EventView } from "./types.js";

const api = new ApiClient();
const live = new LivePanelModel();
const state = {
  events: new Map<number, EventView>(),
  now: 0,
  filters: { status: "", onlyRevealed: false } as TimelineFilters,
};

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function refreshEvents(): Promise<void> {
  const events = await api.events();
  state.events.clear();
  for (const event of events) state.events.set(event.id, event);
  redrawTimeline();
}

function redrawTimeline(): void {
  const container = byId<HTMLElement>("timeline");
  renderTimeline(container, [...state.events.values()], api, state.now, state.filters);
  for (const card of container.querySelectorAll<HTMLElement>(".card")) {
    const id = Number(card.dataset.eventId);
    const event = state.events.get(id);
    if (!event) continue;
    const form = new AnnotationForm(api, event, templates, (view) => {
      state.events.set(view.id, view);
      redrawTimeline();
    });
    card.append(form.root);
  }
}

async function refreshStatus(): Promise<void> {
  const status = await api.status();
  state.now = status.sim_time;
  live.setThreshold(status.baseline ? status.baseline.mean - status.baseline.k * status.baseline.sd : null);
  byId<HTMLElement>("mode-badge").textContent = status.mode;
  byId<HTMLElement>("mode-badge").dataset.mode = status.mode;
  byId<HTMLElement>("hr-now").textContent = fmtBpm(status.current_hr);
  byId<HTMLElement>("rmssd-now").textContent = fmtRmssd(status.current_rmssd);
  byId<HTMLElement>("capture-count").textContent =
    `${status.captures_total} captures (${status.failures_total} failed)`;
}

let templates: Awaited<ReturnType<ApiClient["templates"]>> = [];

async function bootstrap(): Promise<void> {
  templates = await api.templates();
  await refreshStatus();
  await refreshEvents();

  const canvas = byId<HTMLCanvasElement>("live-chart");
  const stream = new EventStreamClient("/api/stream", {
    onEvent: (ev) => {
      live.handle(ev);
      if (ev.event === "state_change") {
        byId<HTMLElement>("mode-badge").textContent = String(ev.data["to"]);
      }
      if (
        ev.event === "capture_complete" ||
        ev.event === "capture_failed" ||
        ev.event === "reveal"
      ) {
        void refreshEvents();
        void refreshStatus();
      }
      if (ev.event === "reading") {
        state.now = Math.max(state.now, Number(ev.data["t"] ?? 0));
        byId<HTMLElement>("rmssd-now").textContent = fmtRmssd(
          typeof ev.data["rmssd"] === "number" ? ev.data["rmssd"] : null,
        );
        if (typeof ev.data["mean_hr"] === "number") {
          byId<HTMLElement>("hr-now").textContent = fmtBpm(ev.data["mean_hr"]);
        }
      }
      drawLivePanel(canvas, live);
    },
    onGap: () => {
      live.noteGap();
      drawLivePanel(canvas, live);
    },
    onStatusChange: (connected) => {
      byId<HTMLElement>("offline-banner").hidden = connected;
    },
  });
  stream.start();

  byId<HTMLButtonElement>("pause-button").addEventListener("click", () => {
    void api.pauseToggle().then(({ mode }) => {
      byId<HTMLElement>("mode-badge").textContent = mode;
    }).catch(() => { /* store-only gateway */ });
  });

  byId<HTMLButtonElement>("export-button").addEventListener("click", () => {
    void api
      .export({ include_failed: true })
      .then(({ archive_path, event_count }) => {
        byId<HTMLElement>("export-result").textContent =
          `${event_count} events -> ${archive_path}`;
      });
  });

  const statusFilter = byId<HTMLSelectElement>("filter-status");
  statusFilter.addEventListener("change", () => {
    state.filters.status = statusFilter.value as TimelineFilters["status"];
    redrawTimeline();
  });
  const revealedFilter = byId<HTMLInputElement>("filter-revealed");
  revealedFilter.addEventListener("change", () => {
    state.filters.onlyRevealed = revealedFilter.checked;
    redrawTimeline();
  });

  setInterval(() => {
    void refreshStatus().then(redrawTimeline);
  }, 5000);
}

void bootstrap().catch(() => {
  byId<HTMLElement>("offline-banner").hidden = false;
});
