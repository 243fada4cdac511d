/** Typed client for the read-only analysis API.
 *
 * The UI never computes statistics itself; everything displayed comes from
 * these responses.  Each logical view keeps at most one request in flight:
 * a newer call aborts the older one (latest wins).
 */

export interface ScatterRow {
  place_id: string;
  name: string;
  surface_km2: number;
  count: number;
}

export interface CorrelationReport {
  pearson_r: number;
  pearson_p: number;
  kendall_tau: number;
  kendall_p: number;
  n: number;
  zero_surface_excluded: number;
}

export interface WhatIf {
  retained_small_annotations: number;
  retained_places: number;
  usable_fraction: number;
}

export type Sunburst = Record<string, Record<string, number>>;

export interface DensityCellFeature {
  type: "Feature";
  geometry: { type: "Polygon"; coordinates: number[][][] };
  properties: { col: number; row: number; count: number };
}

export interface DensityGeoJson {
  type: "FeatureCollection";
  features: DensityCellFeature[];
  properties: {
    cell_deg: number;
    ncols: number;
    nrows: number;
    origin: [number, number];
    selected: number;
    dropped: number;
  };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  private inflight = new Map<string, AbortController>();

  constructor(
    private baseUrl: string,
    private fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  private async get<T>(view: string, path: string): Promise<T> {
    this.inflight.get(view)?.abort();
    const controller = new AbortController();
    this.inflight.set(view, controller);
    try {
      const resp = await this.fetchFn(`${this.baseUrl}${path}`, { signal: controller.signal });
      if (!resp.ok) {
        throw new ApiError(resp.status, await resp.text());
      }
      return (await resp.json()) as T;
    } finally {
      if (this.inflight.get(view) === controller) {
        this.inflight.delete(view);
      }
    }
  }

  scatter(kind: string): Promise<ScatterRow[]> {
    return this.get("scatter", `/scatter?kind=${encodeURIComponent(kind)}`);
  }

  correlation(kind: string): Promise<CorrelationReport> {
    return this.get("correlation", `/correlation?kind=${encodeURIComponent(kind)}`);
  }

  sunburst(thresholdKm2: number): Promise<Sunburst> {
    return this.get("sunburst", `/sunburst?threshold=${thresholdKm2}`);
  }

  whatif(thresholdKm2: number): Promise<WhatIf> {
    return this.get("whatif", `/whatif?threshold=${thresholdKm2}`);
  }

  density(cellDeg: number, keywords: string[], subtypes = "geotag,s_bbox"): Promise<DensityGeoJson> {
    const params = new URLSearchParams({ cell: String(cellDeg), subtypes });
    if (keywords.length > 0) {
      params.set("keywords", keywords.join(","));
    }
    return this.get("density", `/density?${params.toString()}`);
  }
}
