// Stacking and sign conventions of the cost chart, checked against a
// rendered DOM fixture built from a recorded service payload.

import { describe, expect, it } from "vitest";

import type { CipCurvePayload } from "../src/api";
import { COMPONENT_ORDER, renderCipChart, stackSeries } from "../src/charts/cip";
import { fixture, polygonYs } from "./helpers";

const payload = fixture<CipCurvePayload>("cip_prev022.json");
const zeroPayload = fixture<CipCurvePayload>("cip_zero.json");

describe("stackSeries", () => {
  it("keeps the declared component order", () => {
    expect(stackSeries(payload).map((b) => b.component)).toEqual([
      ...COMPONENT_ORDER,
    ]);
  });

  it("stacks benefits below zero and costs above, cumulatively", () => {
    const bands = stackSeries(payload);
    const byName = Object.fromEntries(bands.map((b) => [b.component, b]));
    // at t=0 the home-care matrix makes both treatment components benefits
    // and both error components costs
    expect(byName.treatment_qol.upper[0]).toBe(0);
    expect(byName.treatment_qol.lower[0]).toBe(payload.treatment_qol[0]);
    expect(byName.treatment_hc.upper[0]).toBe(payload.treatment_qol[0]);
    expect(byName.treatment_hc.lower[0]).toBe(
      payload.treatment_qol[0] + payload.treatment_hc[0],
    );
    expect(byName.error_qol.lower[0]).toBe(0);
    expect(byName.error_qol.upper[0]).toBe(payload.error_qol[0]);
    expect(byName.error_hc.lower[0]).toBe(payload.error_qol[0]);
    expect(byName.error_hc.upper[0]).toBe(
      payload.error_qol[0] + payload.error_hc[0],
    );
  });
});

describe("renderCipChart", () => {
  it("draws benefits below and costs above the zero line", () => {
    const svg = renderCipChart(payload);
    const zeroY = Number(svg.dataset.zeroY);
    for (const name of ["treatment_qol", "treatment_hc"]) {
      const polygon = svg.querySelector(`[data-component="${name}"]`)!;
      for (const y of polygonYs(polygon)) {
        expect(y).toBeGreaterThanOrEqual(zeroY - 1e-9); // SVG y grows downward
      }
    }
    for (const name of ["error_qol", "error_hc"]) {
      const polygon = svg.querySelector(`[data-component="${name}"]`)!;
      for (const y of polygonYs(polygon)) {
        expect(y).toBeLessThanOrEqual(zeroY + 1e-9);
      }
    }
  });

  it("always draws the zero-cost baseline and the net silhouette", () => {
    const svg = renderCipChart(payload);
    const zero = svg.querySelector('[data-role="zero-line"]')!;
    expect(Number(zero.getAttribute("y1"))).toBeCloseTo(
      Number(svg.dataset.zeroY),
      9,
    );
    expect(svg.querySelector('[data-series="net"]')).not.toBeNull();
    expect(svg.querySelectorAll("polygon[data-component]")).toHaveLength(4);
  });

  it("renders the zero matrix as a flat chart on the baseline", () => {
    const svg = renderCipChart(zeroPayload);
    const zeroY = Number(svg.dataset.zeroY);
    for (const polygon of svg.querySelectorAll("polygon[data-component]")) {
      for (const y of polygonYs(polygon)) {
        expect(y).toBeCloseTo(zeroY, 9);
      }
    }
    for (const y of polygonYs(svg.querySelector('[data-series="net"]')!)) {
      expect(y).toBeCloseTo(zeroY, 9);
    }
  });

  it("draws the yellow risk band for the selected patient", () => {
    const svg = renderCipChart(payload, { band: { lo: 0.45, hi: 0.55 } });
    const band = svg.querySelector('[data-role="risk-band"]')!;
    expect(band.getAttribute("fill")).toBe("#ffe066");
    const width = Number(band.getAttribute("width"));
    expect(width).toBeGreaterThan(0);
    const none = renderCipChart(payload, { band: null });
    expect(none.querySelector('[data-role="risk-band"]')).toBeNull();
  });

  it("marks the active threshold", () => {
    const svg = renderCipChart(payload, { threshold: 0.25 });
    expect(svg.querySelector('[data-role="threshold-marker"]')).not.toBeNull();
  });
});
