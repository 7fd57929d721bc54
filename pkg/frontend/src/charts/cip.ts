// Stacked cost chart. Same convention as the engine: the zero-cost baseline
// is a horizontal line, benefit (negative) components stack downward below
// it, cost (positive) components stack upward above it, always in the fixed
// order treatment_qol, treatment_hc, error_qol, error_hc. The silhouette of
// the stack is the net-effect line.

import type { CipCurvePayload } from "../api";

export const COMPONENT_ORDER = [
  "treatment_qol",
  "treatment_hc",
  "error_qol",
  "error_hc",
] as const;

export type ComponentName = (typeof COMPONENT_ORDER)[number];

export const COMPONENT_COLORS: Record<ComponentName, string> = {
  treatment_qol: "#2c7fb8",
  treatment_hc: "#7fcdbb",
  error_qol: "#de2d26",
  error_hc: "#fc9272",
};

export interface StackedBand {
  component: ComponentName;
  lower: number[];
  upper: number[];
}

/** Per-threshold stacking in value space: each component's band runs from
 * the running total before it to the running total after it, negatives
 * accumulating below zero and positives above. */
export function stackSeries(payload: CipCurvePayload): StackedBand[] {
  const n = payload.grid.length;
  const negBase = new Array<number>(n).fill(0);
  const posBase = new Array<number>(n).fill(0);
  const bands: StackedBand[] = [];
  for (const component of COMPONENT_ORDER) {
    const values = payload[component];
    const lower = new Array<number>(n);
    const upper = new Array<number>(n);
    for (let i = 0; i < n; i++) {
      const v = values[i];
      if (v >= 0) {
        lower[i] = posBase[i];
        upper[i] = posBase[i] + v;
        posBase[i] = upper[i];
      } else {
        upper[i] = negBase[i];
        lower[i] = negBase[i] + v;
        negBase[i] = lower[i];
      }
    }
    bands.push({ component, lower, upper });
  }
  return bands;
}

export interface CipChartOptions {
  width?: number;
  height?: number;
  threshold?: number | null;
  band?: { lo: number; hi: number } | null;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export function renderCipChart(
  payload: CipCurvePayload,
  options: CipChartOptions = {},
): SVGSVGElement {
  const width = options.width ?? 640;
  const height = options.height ?? 320;
  const margin = { top: 10, right: 10, bottom: 24, left: 42 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;

  const bands = stackSeries(payload);
  let lo = 0;
  let hi = 0;
  for (const band of bands) {
    for (const v of band.lower) lo = Math.min(lo, v);
    for (const v of band.upper) hi = Math.max(hi, v);
  }
  if (hi === lo) hi = lo + 1; // flat zero chart still needs a scale
  const pad = 0.08 * (hi - lo);
  hi += pad;
  lo -= pad;

  const t0 = payload.grid[0];
  const t1 = payload.grid[payload.grid.length - 1];
  const x = (t: number) => margin.left + ((t - t0) / (t1 - t0 || 1)) * innerW;
  const y = (v: number) => margin.top + ((hi - v) / (hi - lo)) * innerH;

  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    class: "cip-chart",
  });
  svg.dataset.zeroY = String(y(0));

  // yellow risk band behind everything
  if (options.band) {
    const bandLo = Math.max(t0, options.band.lo);
    const bandHi = Math.min(t1, options.band.hi);
    svg.appendChild(
      svgElement("rect", {
        x: String(x(bandLo)),
        y: String(margin.top),
        width: String(Math.max(0, x(bandHi) - x(bandLo))),
        height: String(innerH),
        fill: "#ffe066",
        opacity: "0.55",
        "data-role": "risk-band",
      }),
    );
  }

  for (const band of bands) {
    const forward = payload.grid.map((t, i) => `${x(t)},${y(band.upper[i])}`);
    const back = [...payload.grid.keys()]
      .reverse()
      .map((i) => `${x(payload.grid[i])},${y(band.lower[i])}`);
    const polygon = svgElement("polygon", {
      points: [...forward, ...back].join(" "),
      fill: COMPONENT_COLORS[band.component],
      opacity: "0.8",
      "data-component": band.component,
    });
    svg.appendChild(polygon);
  }

  // zero-cost baseline
  svg.appendChild(
    svgElement("line", {
      x1: String(margin.left),
      x2: String(margin.left + innerW),
      y1: String(y(0)),
      y2: String(y(0)),
      stroke: "#222",
      "stroke-width": "1.5",
      "data-role": "zero-line",
    }),
  );

  // net-effect silhouette
  svg.appendChild(
    svgElement("polyline", {
      points: payload.grid.map((t, i) => `${x(t)},${y(payload.net[i])}`).join(" "),
      fill: "none",
      stroke: "#111",
      "stroke-width": "2",
      "stroke-dasharray": "5,3",
      "data-series": "net",
    }),
  );

  if (options.threshold !== null && options.threshold !== undefined) {
    svg.appendChild(
      svgElement("line", {
        x1: String(x(options.threshold)),
        x2: String(x(options.threshold)),
        y1: String(margin.top),
        y2: String(margin.top + innerH),
        stroke: "#555",
        "stroke-width": "1",
        "stroke-dasharray": "3,3",
        "data-role": "threshold-marker",
      }),
    );
  }

  return svg;
}
