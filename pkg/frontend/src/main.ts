// Dashboard wiring: selectors and slider drive the view state; data flows
// service -> payload -> render, with matrix edits debounced into a PUT +
// curve re-fetch. The slider itself never refetches: the curve payload
// already covers the whole grid.

import {
  ApiClient,
  ApiError,
  type CipCurvePayload,
  type CohortPayload,
  type MetricsPayload,
} from "./api";
import { renderCipChart } from "./charts/cip";
import { renderCalibrationChart, renderUnitLineChart } from "./charts/lines";
import { createAgentPanels } from "./panels/agents";
import { createMatrixEditor } from "./panels/matrix";
import { createReadouts } from "./panels/readouts";
import { debounce, StateStore } from "./state";
import { setReadout } from "./format";

const api = new ApiClient("");
const store = new StateStore();

const MATRIX_ID = "dashboard";
const CARD_ID = "dashboard";

const DEFAULT_MATRIX = {
  treatment: {
    TP: { qol: -1.0, healthcare: -0.5 },
    FP: { qol: -1.0, healthcare: -0.5 },
    TN: { qol: 0.0, healthcare: 0.0 },
    FN: { qol: 0.0, healthcare: 0.0 },
  },
  error: {
    TP: { qol: 0.0, healthcare: 0.0 },
    FP: { qol: 0.5, healthcare: 0.25 },
    TN: { qol: 0.0, healthcare: 0.0 },
    FN: { qol: 1.0, healthcare: 1.0 },
  },
};

interface Loaded {
  cip: CipCurvePayload | null;
  metrics: MetricsPayload | null;
  cohort: CohortPayload | null;
}

const loaded: Loaded = { cip: null, metrics: null, cohort: null };

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function showError(message: string, retry: (() => void) | null): void {
  const banner = el<HTMLElement>("error-banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
  const button = document.createElement("button");
  button.textContent = "Retry";
  if (retry) {
    button.addEventListener("click", () => {
      banner.classList.add("hidden");
      retry();
    });
    banner.appendChild(button);
  }
}

function clearError(): void {
  el<HTMLElement>("error-banner").classList.add("hidden");
}

async function guarded(task: () => Promise<void>): Promise<void> {
  try {
    clearError();
    await task();
  } catch (error) {
    const message =
      error instanceof ApiError
        ? `${error.code}: ${error.message}`
        : String(error);
    showError(message, () => void guarded(task));
  }
}

function main(): void {
  const chartHost = el<HTMLElement>("cip-chart");
  const readouts = createReadouts(el("readout-host"));
  const agentPanels = createAgentPanels(el("agents-host"));
  const slider = el<HTMLInputElement>("threshold-slider");
  const sliderLabel = el<HTMLElement>("threshold-label");
  const patientSelect = el<HTMLSelectElement>("patient-select");
  const bandInput = el<HTMLInputElement>("band-delta");

  const matrixEditor = createMatrixEditor(
    el("matrix-host"),
    structuredClone(DEFAULT_MATRIX),
    debounce((doc) => {
      void guarded(async () => {
        await api.putMatrix(MATRIX_ID, doc);
        await refreshCurve();
      });
    }, 300),
  );

  function currentBand(): { lo: number; hi: number } | null {
    const state = store.get();
    if (!state.patientId || !loaded.metrics || !loaded.cohort) return null;
    const scoreEl = document.getElementById("readout-patient-score");
    const raw = scoreEl?.dataset.value;
    if (raw === undefined) return null;
    const s = Number(raw);
    return { lo: s - state.bandDelta, hi: s + state.bandDelta };
  }

  function redraw(): void {
    const state = store.get();
    sliderLabel.textContent = state.threshold.toFixed(2);
    if (!loaded.cip) return;
    chartHost.replaceChildren(
      renderCipChart(loaded.cip, {
        threshold: state.threshold,
        band: currentBand(),
      }),
    );
    readouts.renderCurveAt(loaded.cip, state.threshold);
    if (loaded.metrics) readouts.renderOperating(loaded.metrics, state.threshold);
  }

  async function refreshCurve(): Promise<void> {
    const state = store.get();
    if (!state.predictionsId) return;
    loaded.cip = await api.getCip(state.predictionsId, MATRIX_ID);
    redraw();
  }

  async function refreshMetrics(): Promise<void> {
    const state = store.get();
    if (!state.predictionsId) return;
    loaded.metrics = await api.getMetrics(state.predictionsId);
    readouts.renderOverall(loaded.metrics);
    el("roc-chart").replaceChildren(renderUnitLineChart(loaded.metrics.roc, "roc"));
    el("pr-chart").replaceChildren(renderUnitLineChart(loaded.metrics.pr, "pr"));
    el("calibration-chart").replaceChildren(
      renderCalibrationChart(loaded.metrics.calibration),
    );
    redraw();
  }

  async function refreshPatient(): Promise<void> {
    const state = store.get();
    if (!state.patientId || !state.predictionsId) {
      readouts.renderExpectedCost(null);
      redraw();
      return;
    }
    const payload = await api.getExpectedCost(
      state.patientId,
      state.predictionsId,
      MATRIX_ID,
      state.threshold,
    );
    readouts.renderExpectedCost(payload);
    redraw();
  }

  slider.addEventListener("input", () => {
    store.update({ threshold: Number(slider.value) });
    redraw(); // live: payload already has every grid point
  });

  bandInput.addEventListener("change", () => {
    const value = Number(bandInput.value);
    if (value > 0) {
      store.update({ bandDelta: value });
      redraw();
    }
  });

  patientSelect.addEventListener("change", () => {
    store.update({ patientId: patientSelect.value || null });
    void guarded(refreshPatient);
  });

  el<HTMLButtonElement>("generate-cohort").addEventListener("click", () => {
    void guarded(async () => {
      const summary = await api.generateCohort(200, 7);
      store.update({
        cohortId: summary.cohort_id,
        predictionsId: summary.predictions_id,
        matrixId: MATRIX_ID,
        patientId: null,
      });
      await api.putMatrix(MATRIX_ID, matrixEditor.current());
      await api.putCard(CARD_ID, {
        description: "Generated-cohort outcome model scores.",
        decision_threshold: store.get().threshold,
        training_summary: "",
        metric_summary: {},
      });
      loaded.cohort = await api.getCohort(summary.cohort_id);
      patientSelect.replaceChildren(
        new Option("select a patient", ""),
        ...loaded.cohort.profiles.map(
          (p) => new Option(p.patient_id, p.patient_id),
        ),
      );
      setReadout(el("readout-prevalence"), summary.prevalence);
      await refreshMetrics();
      await refreshCurve();
    });
  });

  el<HTMLButtonElement>("ask-agents").addEventListener("click", () => {
    const state = store.get();
    if (!state.cohortId || !state.patientId || !state.predictionsId) {
      showError("generate a cohort and pick a patient first", null);
      return;
    }
    agentPanels.reset(true);
    void guarded(async () => {
      await api.putCard(CARD_ID, {
        description: "Generated-cohort outcome model scores.",
        decision_threshold: state.threshold,
        training_summary: "",
        metric_summary: {},
      });
      await api.runAgents(
        {
          cohort_id: state.cohortId!,
          patient_id: state.patientId!,
          predictions_id: state.predictionsId!,
          matrix_id: MATRIX_ID,
          card_id: CARD_ID,
          band_delta: state.bandDelta,
        },
        (event) => agentPanels.handleEvent(event),
      );
    });
  });

  store.update({ threshold: Number(slider.value) });
}

document.addEventListener("DOMContentLoaded", main);
