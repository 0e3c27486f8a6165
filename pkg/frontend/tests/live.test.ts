// Live panel model: marker fidelity, rolling window, gap marks.
import { describe, expect, it } from "vitest";

import { LivePanelModel } from "../src/live.js";
import type { StreamEvent } from "../src/types.js";

function ev(event: string, data: Record<string, unknown>, id = 0): StreamEvent {
  return { id, event, data };
}

describe("LivePanelModel", () => {
  it("collects readings and tracks mode", () => {
    const model = new LivePanelModel();
    model.handle(ev("reading", { t: 1000, rmssd: 22.1, state: "calm" }));
    model.handle(ev("reading", { t: 2000, state: "insufficient_data" }));
    model.handle(ev("state_change", { t: 2500, to: "paused" }));
    expect(model.readings).toHaveLength(2);
    expect(model.readings[1].rmssd).toBeNull();
    expect(model.mode).toBe("paused");
  });

  it("one marker per capture id, complete or failed", () => {
    const model = new LivePanelModel();
    model.handle(ev("capture_started", { t: 10, id: 1 }));
    model.handle(ev("capture_complete", { t: 20_000, id: 1 }));
    model.handle(ev("capture_failed", { t: 90_000, id: 2 }));
    expect(model.markers).toEqual([
      { captureId: 1, t: 20_000, kind: "complete" },
      { captureId: 2, t: 90_000, kind: "failed" },
    ]);
  });

  it("replayed capture events add no duplicate markers", () => {
    const model = new LivePanelModel();
    for (let i = 0; i < 3; i++) {
      model.handle(ev("capture_complete", { t: 20_000, id: 7 }));
    }
    expect(model.markers).toHaveLength(1);
  });

  it("trims readings and markers outside the span", () => {
    const model = new LivePanelModel(60_000);
    model.handle(ev("capture_complete", { t: 1000, id: 1 }));
    for (let t = 0; t <= 120_000; t += 1000) {
      model.handle(ev("reading", { t, rmssd: 20, state: "calm" }));
    }
    expect(model.readings[0].t).toBeGreaterThanOrEqual(60_000);
    expect(model.markers).toHaveLength(0);
  });

  it("gap marks land at the last seen time", () => {
    const model = new LivePanelModel();
    model.handle(ev("reading", { t: 5000, rmssd: 20, state: "calm" }));
    model.noteGap();
    expect(model.gaps).toEqual([{ t: 5000 }]);
  });

  it("threshold is settable from baseline updates", () => {
    const model = new LivePanelModel();
    model.setThreshold(21.5);
    expect(model.threshold).toBe(21.5);
  });
});
