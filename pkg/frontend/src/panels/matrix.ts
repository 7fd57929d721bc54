// Cost-matrix editor: 16 numeric cells (type x scenario x dimension).
// Edits are reported upward; the caller re-PUTs the matrix and re-fetches
// the curve, so the chart always reflects the server's view.

import type { CostMatrixDoc } from "../api";

const TYPES = ["treatment", "error"] as const;
const SCENARIOS = ["TP", "FP", "TN", "FN"] as const;
const DIMENSIONS = ["qol", "healthcare"] as const;

export interface MatrixEditorHandle {
  root: HTMLElement;
  current(): CostMatrixDoc;
  setDoc(doc: CostMatrixDoc): void;
}

export function createMatrixEditor(
  container: HTMLElement,
  doc: CostMatrixDoc,
  onChange: (doc: CostMatrixDoc) => void,
): MatrixEditorHandle {
  let working: CostMatrixDoc = structuredClone(doc);
  const root = document.createElement("table");
  root.className = "matrix-editor";
  const head = document.createElement("tr");
  head.innerHTML =
    "<th>Type</th><th>Scenario</th><th>QoL</th><th>Healthcare</th>";
  root.appendChild(head);

  const inputs: Record<string, HTMLInputElement> = {};
  for (const kind of TYPES) {
    for (const scenario of SCENARIOS) {
      const row = document.createElement("tr");
      row.innerHTML = `<td>${kind}</td><td>${scenario}</td>`;
      for (const dim of DIMENSIONS) {
        const cell = document.createElement("td");
        const input = document.createElement("input");
        input.type = "number";
        input.step = "0.05";
        input.min = "-1";
        input.max = "1";
        input.value = String(working[kind][scenario][dim]);
        input.dataset.cell = `${kind}.${scenario}.${dim}`;
        input.addEventListener("input", () => {
          const value = Number(input.value);
          if (!Number.isFinite(value) || value < -1 || value > 1) {
            input.classList.add("invalid");
            return;
          }
          input.classList.remove("invalid");
          working[kind][scenario][dim] = value;
          onChange(structuredClone(working));
        });
        inputs[input.dataset.cell] = input;
        cell.appendChild(input);
        row.appendChild(cell);
      }
      root.appendChild(row);
    }
  }
  container.appendChild(root);

  return {
    root,
    current: () => structuredClone(working),
    setDoc(next: CostMatrixDoc): void {
      working = structuredClone(next);
      for (const kind of TYPES) {
        for (const scenario of SCENARIOS) {
          for (const dim of DIMENSIONS) {
            inputs[`${kind}.${scenario}.${dim}`].value = String(
              working[kind][scenario][dim],
            );
          }
        }
      }
    },
  };
}
