/** Analyst console: scatter + threshold slider + sunburst + density map.
 *
 * All numbers on screen come from API responses; the URL always encodes
 * the full view state, so any view can be shared or restored by link.
 * Slider moves are debounced 250 ms before hitting the read API.
 */
import { ApiClient, WhatIf } from "./api.js";
import { clear, debounce, htmlEl } from "./dom.js";
import { DensityMapView } from "./densitymap.js";
import { formatNumber } from "./scales.js";
import { ScatterView } from "./scatter.js";
import { SunburstView } from "./sunburst.js";
import { decodeViewState, encodeViewState, PlaceKind, ViewState } from "./viewstate.js";

const SLIDER_DEBOUNCE_MS = 250;

export class App {
  readonly state: ViewState;
  private api: ApiClient;
  private scatterView!: ScatterView;
  private sunburstView!: SunburstView;
  private densityView!: DensityMapView;
  private whatifEl!: HTMLElement;
  private correlationEl!: HTMLElement;
  private sliderEl!: HTMLInputElement;
  private sliderValueEl!: HTMLInputElement;
  private pushUrl: (state: ViewState) => void;

  constructor(
    private root: HTMLElement,
    apiBase: string,
    options: {
      initialSearch?: string;
      pushUrl?: (state: ViewState) => void;
      fetchFn?: typeof fetch;
    } = {},
  ) {
    this.api = new ApiClient(apiBase, options.fetchFn);
    this.state = decodeViewState(options.initialSearch ?? "");
    this.pushUrl = options.pushUrl ?? (() => undefined);
    this.buildSkeleton();
  }

  /** Initial full load; resolves when every panel has rendered. */
  async refresh(): Promise<void> {
    await Promise.all([
      this.refreshScatter(),
      this.refreshWhatIf(),
      this.refreshSunburst(),
      this.refreshDensity(),
    ]);
  }

  async setKind(kind: PlaceKind): Promise<void> {
    this.state.kind = kind;
    this.syncUrl();
    await this.refreshScatter();
  }

  /** Threshold changes drive the what-if readout, sunburst and scatter. */
  async setThreshold(thresholdKm2: number): Promise<void> {
    this.state.thresholdKm2 = thresholdKm2;
    this.sliderEl.value = String(thresholdKm2);
    this.sliderValueEl.value = String(thresholdKm2);
    this.syncUrl();
    await Promise.all([
      this.refreshScatter(),
      this.refreshWhatIf(),
      this.refreshSunburst(),
    ]);
  }

  async setKeywords(keywords: string[]): Promise<void> {
    this.state.keywords = keywords;
    this.syncUrl();
    await this.refreshDensity();
  }

  async setCell(cellDeg: number): Promise<void> {
    this.state.cellDeg = cellDeg;
    this.syncUrl();
    await this.refreshDensity();
  }

  private syncUrl(): void {
    this.pushUrl(this.state);
  }

  private buildSkeleton(): void {
    clear(this.root);
    const header = htmlEl("header", { class: "controls" });

    const kindSelect = htmlEl("select", { "data-role": "kind" });
    for (const kind of ["bbox", "pbbox"]) {
      const option = htmlEl("option", { value: kind }, kind);
      if (kind === this.state.kind) {
        option.setAttribute("selected", "selected");
      }
      kindSelect.appendChild(option);
    }
    kindSelect.addEventListener("change", () => {
      void this.setKind(kindSelect.value as PlaceKind);
    });
    header.appendChild(labeled("annotation kind", kindSelect));

    this.sliderEl = htmlEl("input", {
      type: "range", min: "0", max: "5000", step: "10",
      value: String(this.state.thresholdKm2), "data-role": "threshold-slider",
    });
    this.sliderValueEl = htmlEl("input", {
      type: "number", min: "0", value: String(this.state.thresholdKm2),
      "data-role": "threshold-value",
    });
    const debouncedThreshold = debounce((value: number) => {
      void this.setThreshold(value);
    }, SLIDER_DEBOUNCE_MS);
    this.sliderEl.addEventListener("input", () => {
      this.sliderValueEl.value = this.sliderEl.value;
      debouncedThreshold(Number(this.sliderEl.value));
    });
    this.sliderValueEl.addEventListener("change", () => {
      debouncedThreshold(Number(this.sliderValueEl.value));
    });
    header.appendChild(labeled("specificity threshold (km²)", this.sliderEl, this.sliderValueEl));

    const keywordsInput = htmlEl("input", {
      type: "text", value: this.state.keywords.join(","), "data-role": "keywords",
    });
    keywordsInput.addEventListener("change", () => {
      void this.setKeywords(keywordsInput.value.split(",").map((k) => k.trim()).filter(Boolean));
    });
    header.appendChild(labeled("density keywords", keywordsInput));

    const cellInput = htmlEl("input", {
      type: "number", step: "0.01", min: "0.001",
      value: String(this.state.cellDeg), "data-role": "cell",
    });
    cellInput.addEventListener("change", () => {
      const cell = Number(cellInput.value);
      if (cell > 0) {
        void this.setCell(cell);
      }
    });
    header.appendChild(labeled("cell size (°)", cellInput));

    this.root.appendChild(header);

    this.whatifEl = htmlEl("section", { class: "panel whatif", "data-role": "whatif" });
    this.correlationEl = htmlEl("div", { class: "correlation", "data-role": "correlation" });

    const scatterPanel = htmlEl("section", { class: "panel" });
    scatterPanel.appendChild(htmlEl("h2", {}, "place frequency vs surface"));
    const scatterRoot = htmlEl("div", { "data-role": "scatter" });
    scatterPanel.appendChild(scatterRoot);
    scatterPanel.appendChild(this.correlationEl);
    this.scatterView = new ScatterView(scatterRoot);

    const sunburstPanel = htmlEl("section", { class: "panel" });
    sunburstPanel.appendChild(htmlEl("h2", {}, "subtype × source"));
    const sunburstRoot = htmlEl("div", { "data-role": "sunburst" });
    sunburstPanel.appendChild(sunburstRoot);
    this.sunburstView = new SunburstView(sunburstRoot);

    const densityPanel = htmlEl("section", { class: "panel" });
    densityPanel.appendChild(htmlEl("h2", {}, "density map"));
    const densityRoot = htmlEl("div", { "data-role": "density" });
    densityPanel.appendChild(densityRoot);
    this.densityView = new DensityMapView(densityRoot);

    const main = htmlEl("main", { class: "layout" });
    main.appendChild(scatterPanel);
    main.appendChild(this.whatifEl);
    main.appendChild(sunburstPanel);
    main.appendChild(densityPanel);
    this.root.appendChild(main);
  }

  private async refreshScatter(): Promise<void> {
    const rows = await this.api.scatter(this.state.kind);
    this.scatterView.render(rows, this.state.thresholdKm2);
    try {
      const corr = await this.api.correlation(this.state.kind);
      this.correlationEl.textContent =
        `Pearson r = ${corr.pearson_r.toFixed(3)} (p = ${corr.pearson_p.toExponential(2)}), `
        + `Kendall τ = ${corr.kendall_tau.toFixed(3)} (p = ${corr.kendall_p.toExponential(2)}), `
        + `n = ${corr.n}`;
    } catch {
      this.correlationEl.textContent = "correlation undefined for this selection";
    }
  }

  private async refreshWhatIf(): Promise<void> {
    const result = await this.api.whatif(this.state.thresholdKm2);
    this.renderWhatIf(result);
  }

  private renderWhatIf(result: WhatIf): void {
    clear(this.whatifEl);
    this.whatifEl.appendChild(htmlEl("h2", {}, "at this threshold"));
    const rows: Array<[string, string, string]> = [
      ["retained small annotations", formatNumber(result.retained_small_annotations),
       "retained-small"],
      ["retained places", formatNumber(result.retained_places), "retained-places"],
      ["usable fraction", `${(result.usable_fraction * 100).toFixed(2)}%`, "usable-fraction"],
    ];
    const dl = htmlEl("dl");
    for (const [label, value, role] of rows) {
      dl.appendChild(htmlEl("dt", {}, label));
      const dd = htmlEl("dd", { "data-role": role }, value);
      dl.appendChild(dd);
    }
    // raw values for exact machine comparison in tests
    this.whatifEl.setAttribute("data-retained-small", String(result.retained_small_annotations));
    this.whatifEl.setAttribute("data-retained-places", String(result.retained_places));
    this.whatifEl.setAttribute("data-usable-fraction", String(result.usable_fraction));
    this.whatifEl.appendChild(dl);
  }

  private async refreshSunburst(): Promise<void> {
    if (this.state.thresholdKm2 <= 0) {
      clear(this.sunburstView["root"] as HTMLElement);
      return;
    }
    const data = await this.api.sunburst(this.state.thresholdKm2);
    this.sunburstView.render(data);
  }

  private async refreshDensity(): Promise<void> {
    const doc = await this.api.density(this.state.cellDeg, this.state.keywords);
    this.densityView.render(doc);
  }
}

function labeled(text: string, ...controls: HTMLElement[]): HTMLElement {
  const label = htmlEl("label", { class: "control" });
  label.appendChild(htmlEl("span", {}, text));
  for (const control of controls) {
    label.appendChild(control);
  }
  return label;
}

export function mount(root: HTMLElement, apiBase: string): App {
  const app = new App(root, apiBase, {
    initialSearch: window.location.search,
    pushUrl: (state) => {
      window.history.replaceState(null, "", `?${encodeViewState(state)}`);
    },
  });
  void app.refresh();
  return app;
}
