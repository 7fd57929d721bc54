// Numeric readouts. Values are picked straight out of service payloads by
// grid/threshold index; nothing is recomputed in the browser.

import type { CipCurvePayload, ExpectedCostPayload, MetricsPayload } from "../api";
import { nearestIndex, setReadout } from "../format";

export interface ReadoutsHandle {
  root: HTMLElement;
  renderCurveAt(payload: CipCurvePayload, threshold: number): void;
  renderOperating(metrics: MetricsPayload, threshold: number): void;
  renderOverall(metrics: MetricsPayload): void;
  renderExpectedCost(payload: ExpectedCostPayload | null): void;
}

const CURVE_FIELDS = [
  ["net", "Net effect"],
  ["treatment_qol", "Treatment / QoL"],
  ["treatment_hc", "Treatment / healthcare"],
  ["error_qol", "Error / QoL"],
  ["error_hc", "Error / healthcare"],
] as const;

function row(label: string, id: string): HTMLElement {
  const div = document.createElement("div");
  div.className = "readout-row";
  const name = document.createElement("span");
  name.textContent = label;
  const value = document.createElement("span");
  value.className = "readout-value";
  value.id = id;
  div.append(name, value);
  return div;
}

export function createReadouts(container: HTMLElement): ReadoutsHandle {
  const root = document.createElement("div");
  root.className = "readouts";

  const curveSection = document.createElement("div");
  curveSection.innerHTML = "<h3>Costs at threshold</h3>";
  for (const [field, label] of CURVE_FIELDS) {
    curveSection.appendChild(row(label, `readout-${field}`));
  }

  const operatingSection = document.createElement("div");
  operatingSection.innerHTML = "<h3>Classifier at threshold</h3>";
  operatingSection.appendChild(row("True-positive rate", "readout-tpr"));
  operatingSection.appendChild(row("False-positive rate", "readout-fpr"));

  const overallSection = document.createElement("div");
  overallSection.innerHTML = "<h3>Overall</h3>";
  overallSection.appendChild(row("AUROC", "readout-auroc"));
  overallSection.appendChild(row("AUPRC", "readout-auprc"));
  overallSection.appendChild(row("Brier", "readout-brier"));
  overallSection.appendChild(row("Best F1 threshold", "readout-best-t"));

  const patientSection = document.createElement("div");
  patientSection.innerHTML = "<h3>Selected patient</h3>";
  patientSection.appendChild(row("Risk score", "readout-patient-score"));
  patientSection.appendChild(row("Expected QoL cost", "readout-patient-qol"));
  patientSection.appendChild(row("Expected healthcare cost", "readout-patient-hc"));

  root.append(curveSection, operatingSection, overallSection, patientSection);
  container.appendChild(root);

  const byId = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;

  return {
    root,
    renderCurveAt(payload: CipCurvePayload, threshold: number): void {
      const i = nearestIndex(payload.grid, threshold);
      for (const [field] of CURVE_FIELDS) {
        setReadout(byId(`readout-${field}`), payload[field][i]);
      }
    },
    renderOperating(metrics: MetricsPayload, threshold: number): void {
      // ROC points carry their own thresholds; pick the nearest one.
      const thresholds = metrics.roc.map((p) => p.threshold);
      const i = nearestIndex(thresholds, threshold);
      setReadout(byId("readout-tpr"), metrics.roc[i].y);
      setReadout(byId("readout-fpr"), metrics.roc[i].x);
    },
    renderOverall(metrics: MetricsPayload): void {
      setReadout(byId("readout-auroc"), metrics.auroc);
      setReadout(byId("readout-auprc"), metrics.auprc);
      setReadout(byId("readout-brier"), metrics.brier);
      setReadout(byId("readout-best-t"), metrics.best_threshold.threshold, 2);
    },
    renderExpectedCost(payload: ExpectedCostPayload | null): void {
      const score = byId("readout-patient-score");
      const qol = byId("readout-patient-qol");
      const hc = byId("readout-patient-hc");
      if (!payload) {
        for (const el of [score, qol, hc]) {
          el.textContent = "-";
          delete el.dataset.value;
        }
        return;
      }
      setReadout(score, payload.score);
      setReadout(qol, payload.totals.qol);
      setReadout(hc, payload.totals.healthcare);
    },
  };
}
