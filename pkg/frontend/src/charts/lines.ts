// Small SVG line/point charts for the ROC, PR and calibration panels.

import type { CalibrationBinPayload, CurvePointPayload } from "../api";

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

interface Frame {
  svg: SVGSVGElement;
  x: (v: number) => number;
  y: (v: number) => number;
}

function frame(size: number, series: string): Frame {
  const margin = 18;
  const inner = size - 2 * margin;
  const svg = svgElement("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: String(size),
    height: String(size),
    "data-chart": series,
  });
  svg.appendChild(
    svgElement("rect", {
      x: String(margin),
      y: String(margin),
      width: String(inner),
      height: String(inner),
      fill: "none",
      stroke: "#ccc",
    }),
  );
  return {
    svg,
    x: (v) => margin + v * inner,
    y: (v) => margin + (1 - v) * inner,
  };
}

export function renderUnitLineChart(
  points: CurvePointPayload[],
  series: "roc" | "pr",
  size = 220,
): SVGSVGElement {
  const { svg, x, y } = frame(size, series);
  if (series === "roc") {
    svg.appendChild(
      svgElement("line", {
        x1: String(x(0)),
        y1: String(y(0)),
        x2: String(x(1)),
        y2: String(y(1)),
        stroke: "#bbb",
        "stroke-dasharray": "4,4",
      }),
    );
  }
  svg.appendChild(
    svgElement("polyline", {
      points: points.map((p) => `${x(p.x)},${y(p.y)}`).join(" "),
      fill: "none",
      stroke: "#2c7fb8",
      "stroke-width": "2",
      "data-series": series,
    }),
  );
  return svg;
}

export function renderCalibrationChart(
  bins: CalibrationBinPayload[],
  size = 220,
): SVGSVGElement {
  const { svg, x, y } = frame(size, "calibration");
  svg.appendChild(
    svgElement("line", {
      x1: String(x(0)),
      y1: String(y(0)),
      x2: String(x(1)),
      y2: String(y(1)),
      stroke: "#bbb",
      "stroke-dasharray": "4,4",
    }),
  );
  for (const bin of bins) {
    if (bin.mean_score === null || bin.observed_rate === null) continue;
    svg.appendChild(
      svgElement("circle", {
        cx: String(x(bin.mean_score)),
        cy: String(y(bin.observed_rate)),
        r: "4",
        fill: "#de2d26",
        "data-bin-lo": String(bin.lo),
        "data-count": String(bin.count),
      }),
    );
  }
  return svg;
}
