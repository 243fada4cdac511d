/** Two-ring sunburst: inner ring = annotation subtype, outer ring = source
 * application within that subtype.  Clicking an inner segment focuses the
 * outer ring on that subtype; clicking it again clears the focus.
 */
import { Sunburst } from "./api.js";
import { clear, svgEl } from "./dom.js";
import { formatNumber } from "./scales.js";

const SIZE = 420;
const CX = SIZE / 2;
const CY = SIZE / 2;
const INNER = [52, 104] as const;
const OUTER = [108, 182] as const;

const SUBTYPE_COLORS: Record<string, string> = {
  geotag: "#2a9d8f",
  s_bbox: "#5fa8d3",
  l_bbox: "#1b4965",
  s_pbbox: "#e9c46a",
  l_pbbox: "#b5838d",
};

interface Segment {
  start: number;
  end: number;
  label: string;
  count: number;
}

function arcPath(start: number, end: number, r0: number, r1: number): string {
  // angles in radians from 12 o'clock, clockwise
  const point = (angle: number, radius: number) => [
    CX + radius * Math.sin(angle),
    CY - radius * Math.cos(angle),
  ];
  const largeArc = end - start > Math.PI ? 1 : 0;
  const [x0, y0] = point(start, r1);
  const [x1, y1] = point(end, r1);
  const [x2, y2] = point(end, r0);
  const [x3, y3] = point(start, r0);
  return [
    `M ${x0} ${y0}`,
    `A ${r1} ${r1} 0 ${largeArc} 1 ${x1} ${y1}`,
    `L ${x2} ${y2}`,
    `A ${r0} ${r0} 0 ${largeArc} 0 ${x3} ${y3}`,
    "Z",
  ].join(" ");
}

export function layoutRing(totals: Map<string, number>, grandTotal: number): Segment[] {
  const segments: Segment[] = [];
  let angle = 0;
  for (const [label, count] of totals) {
    const sweep = grandTotal > 0 ? (count / grandTotal) * 2 * Math.PI : 0;
    segments.push({ start: angle, end: angle + sweep, label, count });
    angle += sweep;
  }
  return segments;
}

export class SunburstView {
  private focusSubtype: string | null = null;
  private data: Sunburst = {};
  onFocusChange?: (subtype: string | null) => void;

  constructor(private root: HTMLElement) {}

  render(data: Sunburst): void {
    this.data = data;
    if (this.focusSubtype !== null && !(this.focusSubtype in data)) {
      this.focusSubtype = null;
    }
    this.draw();
  }

  private draw(): void {
    clear(this.root);
    const svg = svgEl("svg", {
      viewBox: `0 0 ${SIZE} ${SIZE}`, width: SIZE, height: SIZE, class: "sunburst",
    });
    this.root.appendChild(svg);

    const subtypeTotals = new Map<string, number>();
    for (const subtype of Object.keys(this.data).sort()) {
      const total = Object.values(this.data[subtype]).reduce((a, b) => a + b, 0);
      subtypeTotals.set(subtype, total);
    }
    const grandTotal = [...subtypeTotals.values()].reduce((a, b) => a + b, 0);

    const innerSegments = layoutRing(subtypeTotals, grandTotal);
    for (const segment of innerSegments) {
      const path = svgEl("path", {
        d: arcPath(segment.start, segment.end, INNER[0], INNER[1]),
        fill: SUBTYPE_COLORS[segment.label] ?? "#999",
        class: "ring inner"
          + (this.focusSubtype === segment.label ? " focused" : "")
          + (this.focusSubtype !== null && this.focusSubtype !== segment.label ? " dimmed" : ""),
        "data-subtype": segment.label,
      });
      const title = svgEl("title");
      title.textContent = `${segment.label}: ${formatNumber(segment.count)}`
        + (grandTotal > 0 ? ` (${((segment.count / grandTotal) * 100).toFixed(1)}%)` : "");
      path.appendChild(title);
      path.addEventListener("click", () => {
        this.focusSubtype = this.focusSubtype === segment.label ? null : segment.label;
        this.draw();
        this.onFocusChange?.(this.focusSubtype);
      });
      svg.appendChild(path);
    }

    // outer ring: sources, nested inside each (or only the focused) subtype
    for (const segment of innerSegments) {
      if (this.focusSubtype !== null && segment.label !== this.focusSubtype) {
        continue;
      }
      const sources = this.data[segment.label];
      const sourceTotals = new Map<string, number>(
        Object.keys(sources).sort().map((s) => [s, sources[s]]),
      );
      const subtypeSpan = segment.end - segment.start;
      const subtypeTotal = segment.count;
      let angle = this.focusSubtype === segment.label && this.focusSubtype !== null
        ? 0 : segment.start;
      const fullSweep = this.focusSubtype === segment.label ? 2 * Math.PI : subtypeSpan;
      for (const [source, count] of sourceTotals) {
        const sweep = subtypeTotal > 0 ? (count / subtypeTotal) * fullSweep : 0;
        const path = svgEl("path", {
          d: arcPath(angle, angle + sweep, OUTER[0], OUTER[1]),
          fill: SUBTYPE_COLORS[segment.label] ?? "#999",
          "fill-opacity": "0.55",
          class: "ring outer",
          "data-subtype": segment.label,
          "data-source": source,
        });
        const title = svgEl("title");
        title.textContent = `${segment.label} · ${source}: ${formatNumber(count)}`;
        path.appendChild(title);
        svg.appendChild(path);
        angle += sweep;
      }
    }

    const centerLabel = svgEl("text", {
      x: CX, y: CY + 4, "text-anchor": "middle", class: "center-label",
    });
    centerLabel.textContent = this.focusSubtype ?? "all types";
    svg.appendChild(centerLabel);
  }
}
