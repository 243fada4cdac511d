import { describe, expect, it } from "vitest";

import { DEFAULT_STATE, decodeViewState, encodeViewState, ViewState } from "../src/viewstate.js";

describe("view state URL serialization", () => {
  it("round-trips exactly, including awkward floats", () => {
    const states: ViewState[] = [
      { kind: "bbox", thresholdKm2: 350, keywords: ["flood", "harvey"], cellDeg: 0.05 },
      { kind: "pbbox", thresholdKm2: 123.456789, keywords: [], cellDeg: 0.01 },
      { kind: "bbox", thresholdKm2: 0, keywords: ["a b", "c"], cellDeg: 1e-3 },
      { kind: "pbbox", thresholdKm2: 0.1 + 0.2, keywords: ["x"], cellDeg: 0.30000000000000004 },
    ];
    for (const state of states) {
      expect(decodeViewState(encodeViewState(state))).toEqual(state);
    }
  });

  it("tolerates a leading question mark", () => {
    const state = DEFAULT_STATE;
    expect(decodeViewState(`?${encodeViewState(state)}`)).toEqual(state);
  });

  it("falls back to defaults for missing or junk params", () => {
    expect(decodeViewState("")).toEqual(DEFAULT_STATE);
    const decoded = decodeViewState("kind=wat&threshold=junk&cell=-4");
    expect(decoded.kind).toBe("bbox");
    expect(decoded.thresholdKm2).toBe(DEFAULT_STATE.thresholdKm2);
    expect(decoded.cellDeg).toBe(DEFAULT_STATE.cellDeg);
  });

  it("keeps an explicitly empty keyword list empty", () => {
    const state: ViewState = { ...DEFAULT_STATE, keywords: [] };
    expect(decodeViewState(encodeViewState(state)).keywords).toEqual([]);
  });
});
