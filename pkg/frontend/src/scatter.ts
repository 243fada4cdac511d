/** Log-log scatter of place frequency against surface.
 *
 * One glyph per API row; hovering reveals the place name, its surface and
 * its frequency.  The current specificity threshold shows as a vertical
 * line so the small/large cut can be read off the cloud directly.
 */
import { ScatterRow } from "./api.js";
import { clear, htmlEl, svgEl } from "./dom.js";
import { formatNumber, logScale } from "./scales.js";

const WIDTH = 560;
const HEIGHT = 380;
const MARGIN = { top: 12, right: 16, bottom: 36, left: 52 };

export class ScatterView {
  private tooltip: HTMLDivElement;

  constructor(private root: HTMLElement) {
    this.tooltip = htmlEl("div", { class: "tooltip", style: "display:none" });
    this.root.appendChild(this.tooltip);
  }

  render(rows: ScatterRow[], thresholdKm2: number): void {
    clear(this.root);
    this.root.appendChild(this.tooltip);
    const drawable = rows.filter((r) => r.surface_km2 > 0 && r.count > 0);
    const svg = svgEl("svg", {
      viewBox: `0 0 ${WIDTH} ${HEIGHT}`,
      width: WIDTH,
      height: HEIGHT,
      class: "scatter",
      role: "img",
    });
    this.root.appendChild(svg);
    if (drawable.length === 0) {
      svg.appendChild(svgEl("text", { x: WIDTH / 2, y: HEIGHT / 2, "text-anchor": "middle" }))
        .textContent = "no places";
      return;
    }

    const surfaces = drawable.map((r) => r.surface_km2);
    const counts = drawable.map((r) => r.count);
    const x = logScale(
      [Math.min(...surfaces), Math.max(...surfaces)],
      [MARGIN.left, WIDTH - MARGIN.right],
    );
    const y = logScale(
      [Math.min(...counts), Math.max(...counts)],
      [HEIGHT - MARGIN.bottom, MARGIN.top],
    );

    for (const tick of x.ticks()) {
      const px = x(tick);
      svg.appendChild(svgEl("line", {
        x1: px, x2: px, y1: MARGIN.top, y2: HEIGHT - MARGIN.bottom, class: "gridline",
      }));
      const label = svgEl("text", {
        x: px, y: HEIGHT - MARGIN.bottom + 16, "text-anchor": "middle", class: "ticklabel",
      });
      label.textContent = formatNumber(tick);
      svg.appendChild(label);
    }
    for (const tick of y.ticks()) {
      const py = y(tick);
      svg.appendChild(svgEl("line", {
        x1: MARGIN.left, x2: WIDTH - MARGIN.right, y1: py, y2: py, class: "gridline",
      }));
      const label = svgEl("text", {
        x: MARGIN.left - 6, y: py + 4, "text-anchor": "end", class: "ticklabel",
      });
      label.textContent = formatNumber(tick);
      svg.appendChild(label);
    }

    const xLabel = svgEl("text", {
      x: WIDTH / 2, y: HEIGHT - 4, "text-anchor": "middle", class: "axislabel",
    });
    xLabel.textContent = "place surface (km², log)";
    svg.appendChild(xLabel);

    if (thresholdKm2 >= Math.min(...surfaces) && thresholdKm2 <= Math.max(...surfaces)) {
      const px = x(thresholdKm2);
      svg.appendChild(svgEl("line", {
        x1: px, x2: px, y1: MARGIN.top, y2: HEIGHT - MARGIN.bottom,
        class: "threshold-line", "data-role": "threshold-line",
      }));
    }

    for (const row of drawable) {
      const circle = svgEl("circle", {
        cx: x(row.surface_km2),
        cy: y(row.count),
        r: 3,
        class: row.surface_km2 < thresholdKm2 ? "glyph small" : "glyph large",
        "data-place-id": row.place_id,
      });
      circle.addEventListener("mouseenter", (event) => this.showTooltip(event, row));
      circle.addEventListener("mouseleave", () => this.hideTooltip());
      svg.appendChild(circle);
    }
  }

  private showTooltip(event: MouseEvent, row: ScatterRow): void {
    this.tooltip.textContent =
      `${row.name} — ${formatNumber(row.surface_km2)} km², ${formatNumber(row.count)} tweets`;
    this.tooltip.style.display = "block";
    this.tooltip.style.left = `${event.pageX + 10}px`;
    this.tooltip.style.top = `${event.pageY - 10}px`;
  }

  private hideTooltip(): void {
    this.tooltip.style.display = "none";
  }
}
