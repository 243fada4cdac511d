/** View state shared by every panel and mirrored into the URL. */

export type PlaceKind = "bbox" | "pbbox";

export interface ViewState {
  kind: PlaceKind;
  thresholdKm2: number;
  keywords: string[];
  cellDeg: number;
}

export const DEFAULT_STATE: ViewState = {
  kind: "bbox",
  thresholdKm2: 350,
  keywords: ["flood", "harvey"],
  cellDeg: 0.05,
};

/** Encode into a query string; Number -> String is lossless for doubles. */
export function encodeViewState(state: ViewState): string {
  const params = new URLSearchParams();
  params.set("kind", state.kind);
  params.set("threshold", String(state.thresholdKm2));
  params.set("keywords", state.keywords.join(","));
  params.set("cell", String(state.cellDeg));
  return params.toString();
}

export function decodeViewState(search: string): ViewState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const kind = params.get("kind");
  const threshold = params.get("threshold");
  const keywords = params.get("keywords");
  const cell = params.get("cell");
  return {
    kind: kind === "pbbox" ? "pbbox" : "bbox",
    thresholdKm2: threshold !== null && isFinite(Number(threshold))
      ? Number(threshold) : DEFAULT_STATE.thresholdKm2,
    keywords: keywords !== null
      ? keywords.split(",").filter((k) => k.length > 0)
      : [...DEFAULT_STATE.keywords],
    cellDeg: cell !== null && Number(cell) > 0 ? Number(cell) : DEFAULT_STATE.cellDeg,
  };
}
