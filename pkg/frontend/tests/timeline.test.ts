// @vitest-environment jsdom
// Timeline rendering rules: reveal gating, neutral failure cards, ordering.
import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, isBlobRequest, RequestRecord } from "../src/api.js";
import { filterItems, renderTimeline, sortNewestFirst } from "../src/timeline.js";
import type { EventView } from "../src/types.js";

const BASELINE = { mean: 24, sd: 2, k: 1.5 };

function view(partial: Partial<EventView> & { id: number }): EventView {
  return {
    captured_at: partial.id * 1000,
    hr_bpm: 80,
    rmssd_ms: 12,
    baseline: BASELINE,
    status: "complete",
    reveal_at: partial.id * 1000 + 86_400_000,
    revealed: false,
    pause_context: false,
    annotations: [],
    annotation_count: 0,
    ...partial,
  } as EventView;
}

describe("renderTimeline", () => {
  let container: HTMLElement;
  let api: ApiClient;
  let records: RequestRecord[];

  beforeEach(() => {
    document.body.innerHTML = "<main id='t'></main>";
    container = document.getElementById("t")!;
    api = new ApiClient("");
    records = [];
    api.recordInto(records);
  });

  it("renders three cards with one countdown for 2 revealed + 1 unrevealed", () => {
    const items = [
      view({ id: 1, revealed: true, image_ref: "blobs/a.pgm", audio_ref: "blobs/a.wav" }),
      view({ id: 2, revealed: true, image_ref: "blobs/b.pgm", audio_ref: "blobs/b.wav" }),
      view({ id: 3, revealed: false }),
    ];
    renderTimeline(container, items, api, 5000);
    expect(container.querySelectorAll(".card")).toHaveLength(3);
    expect(container.querySelectorAll(".card-countdown")).toHaveLength(1);
    expect(container.querySelectorAll("img")).toHaveLength(2);
    expect(container.querySelectorAll("audio")).toHaveLength(2);
  });

  it("never builds media urls for unrevealed events", () => {
    renderTimeline(container, [view({ id: 1 }), view({ id: 2 })], api, 0);
    expect(container.querySelector("img")).toBeNull();
    expect(container.querySelector("audio")).toBeNull();
    expect(records.filter(isBlobRequest)).toHaveLength(0);
  });

  it("failed card has neutral wording, metadata, and no media slot", () => {
    const failed = view({ id: 4, status: "failed", failure_reason: "disconnected" });
    renderTimeline(container, [failed], api, 0);
    const card = container.querySelector(".card-failed")!;
    expect(card.textContent).toContain("couldn't complete");
    expect(card.textContent).not.toMatch(/error|fail(ed)?!|shame/i);
    expect(card.querySelector("img")).toBeNull();
    expect(card.querySelector(".card-media")).toBeNull();
    expect(card.textContent).toContain("HR 80 bpm");
  });

  it("empty store shows the empty-state prompt", () => {
    renderTimeline(container, [], api, 0);
    expect(container.querySelector(".empty-state")).not.toBeNull();
  });

  it("orders newest first", () => {
    const items = [view({ id: 1 }), view({ id: 3 }), view({ id: 2 })];
    renderTimeline(container, items, api, 0);
    const ids = [...container.querySelectorAll<HTMLElement>(".card")].map(
      (c) => c.dataset.eventId,
    );
    expect(ids).toEqual(["3", "2", "1"]);
  });

  it("renders annotations chronologically", () => {
    const item = view({
      id: 1,
      annotations: [
        { created_at: 1, kind: "free_text", text: "first" },
        { created_at: 2, kind: "free_text", text: "second" },
      ],
      annotation_count: 2,
    });
    renderTimeline(container, [item], api, 0);
    const notes = [...container.querySelectorAll(".annotation")].map((n) => n.textContent);
    expect(notes).toEqual(["first", "second"]);
  });
});

describe("filters", () => {
  const items = [
    view({ id: 1, status: "complete", revealed: true }),
    view({ id: 2, status: "failed" }),
    view({ id: 3, status: "complete", revealed: false }),
  ];

  it("status filter", () => {
    expect(filterItems(items, { status: "failed", onlyRevealed: false })).toHaveLength(1);
    expect(filterItems(items, { status: "complete", onlyRevealed: false })).toHaveLength(2);
  });

  it("revealed filter", () => {
    expect(filterItems(items, { status: "", onlyRevealed: true }).map((i) => i.id)).toEqual([1]);
  });

  it("date range filter", () => {
    const got = filterItems(items, { status: "", onlyRevealed: false, from_ms: 1500, to_ms: 2500 });
    expect(got.map((i) => i.id)).toEqual([2]);
  });

  it("sort is stable for equal timestamps", () => {
    const same = [view({ id: 1, captured_at: 5 }), view({ id: 2, captured_at: 5 })];
    expect(sortNewestFirst(same).map((i) => i.id)).toEqual([2, 1]);
  });
});
