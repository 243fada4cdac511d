/** Heat layer over the density-grid GeoJSON: one rect per nonzero cell,
 * shaded by count on a log ramp.  Wheel zooms around the pointer and
 * dragging pans (viewBox manipulation; the region is small enough that a
 * plain lon/lat projection is fine for exploration).
 */
import { DensityGeoJson } from "./api.js";
import { clear, svgEl } from "./dom.js";
import { formatNumber } from "./scales.js";

const WIDTH = 560;
const HEIGHT = 420;

interface ViewBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export class DensityMapView {
  private viewBox: ViewBox = { x: 0, y: 0, w: WIDTH, h: HEIGHT };
  private svg: SVGSVGElement | null = null;
  private dragging: { px: number; py: number } | null = null;

  constructor(private root: HTMLElement) {}

  render(doc: DensityGeoJson): void {
    clear(this.root);
    this.viewBox = { x: 0, y: 0, w: WIDTH, h: HEIGHT };
    const svg = svgEl("svg", {
      viewBox: this.viewBoxAttr(), width: WIDTH, height: HEIGHT, class: "densitymap",
    });
    this.svg = svg;
    this.root.appendChild(svg);

    const features = doc.features;
    const summary = svgEl("text", { x: 8, y: 16, class: "map-summary" });
    summary.textContent =
      `${formatNumber(doc.properties.selected - doc.properties.dropped)} tweets on map`
      + (doc.properties.dropped ? ` (${formatNumber(doc.properties.dropped)} outside)` : "");
    if (features.length === 0) {
      svg.appendChild(summary);
      return;
    }

    const lons: number[] = [];
    const lats: number[] = [];
    for (const f of features) {
      for (const [lon, lat] of f.geometry.coordinates[0]) {
        lons.push(lon);
        lats.push(lat);
      }
    }
    const west = Math.min(...lons);
    const east = Math.max(...lons);
    const south = Math.min(...lats);
    const north = Math.max(...lats);
    const sx = WIDTH / (east - west || 1);
    const sy = HEIGHT / (north - south || 1);
    const maxCount = Math.max(...features.map((f) => f.properties.count));

    for (const f of features) {
      const ring = f.geometry.coordinates[0];
      const xs = ring.map((c) => (c[0] - west) * sx);
      const ys = ring.map((c) => (north - c[1]) * sy);
      const heat = Math.log1p(f.properties.count) / Math.log1p(maxCount);
      const rect = svgEl("rect", {
        x: Math.min(...xs),
        y: Math.min(...ys),
        width: Math.max(...xs) - Math.min(...xs),
        height: Math.max(...ys) - Math.min(...ys),
        fill: heatColor(heat),
        class: "cell",
        "data-count": f.properties.count,
      });
      const title = svgEl("title");
      title.textContent = `${formatNumber(f.properties.count)} tweets`;
      rect.appendChild(title);
      svg.appendChild(rect);
    }
    svg.appendChild(summary);

    svg.addEventListener("wheel", (event) => this.onWheel(event), { passive: false });
    svg.addEventListener("mousedown", (event) => {
      this.dragging = { px: event.clientX, py: event.clientY };
    });
    svg.addEventListener("mousemove", (event) => this.onDrag(event));
    svg.addEventListener("mouseup", () => (this.dragging = null));
    svg.addEventListener("mouseleave", () => (this.dragging = null));
  }

  zoom(factor: number, cx = WIDTH / 2, cy = HEIGHT / 2): void {
    const vb = this.viewBox;
    const px = vb.x + (cx / WIDTH) * vb.w;
    const py = vb.y + (cy / HEIGHT) * vb.h;
    vb.w /= factor;
    vb.h /= factor;
    vb.x = px - (cx / WIDTH) * vb.w;
    vb.y = py - (cy / HEIGHT) * vb.h;
    this.applyViewBox();
  }

  private onWheel(event: WheelEvent): void {
    event.preventDefault();
    this.zoom(event.deltaY < 0 ? 1.25 : 0.8, event.offsetX, event.offsetY);
  }

  private onDrag(event: MouseEvent): void {
    if (!this.dragging) {
      return;
    }
    const vb = this.viewBox;
    vb.x -= ((event.clientX - this.dragging.px) / WIDTH) * vb.w;
    vb.y -= ((event.clientY - this.dragging.py) / HEIGHT) * vb.h;
    this.dragging = { px: event.clientX, py: event.clientY };
    this.applyViewBox();
  }

  private viewBoxAttr(): string {
    const vb = this.viewBox;
    return `${vb.x} ${vb.y} ${vb.w} ${vb.h}`;
  }

  private applyViewBox(): void {
    this.svg?.setAttribute("viewBox", this.viewBoxAttr());
  }
}

export function heatColor(t: number): string {
  // white-yellow-red ramp, t in [0, 1]
  const clamped = Math.max(0, Math.min(1, t));
  const hue = 60 - 60 * clamped;
  const lightness = 92 - 42 * clamped;
  return `hsl(${hue.toFixed(0)}, 90%, ${lightness.toFixed(0)}%)`;
}
