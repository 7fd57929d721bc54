// Typed client for the engine's REST API. The UI never recomputes numbers:
// everything rendered comes from these payloads.

export interface CipCurvePayload {
  grid: number[];
  treatment_qol: number[];
  treatment_hc: number[];
  error_qol: number[];
  error_hc: number[];
  net: number[];
}

export interface CurvePointPayload {
  x: number;
  y: number;
  threshold: number;
}

export interface CalibrationBinPayload {
  lo: number;
  hi: number;
  mean_score: number | null;
  observed_rate: number | null;
  count: number;
}

export interface MetricsPayload {
  n: number;
  prevalence: number;
  auroc: number;
  auprc: number;
  brier: number;
  best_threshold: { threshold: number; f1: number };
  roc: CurvePointPayload[];
  pr: CurvePointPayload[];
  calibration: CalibrationBinPayload[];
}

export type CostMatrixDoc = Record<string, Record<string, Record<string, number>>>;

export interface ExpectedCostPayload {
  patient_id: string;
  score: number;
  threshold: number;
  cells: Record<string, number>;
  totals: { qol: number; healthcare: number };
}

export interface CohortSummary {
  cohort_id: string;
  predictions_id: string;
  prevalence: number;
}

export interface CohortPayload {
  profiles: Array<{ patient_id: string; variables: Record<string, number> }>;
  predictions_id: string;
}

export interface ExchangeDoc {
  agent: string;
  response_text: string;
  model_name: string;
  latency_ms: number;
}

export interface RunRecordPayload {
  run_id: string;
  exchanges: ExchangeDoc[];
  failures: Array<{ agent: string; kind: string; cause: string }>;
  call_order: string[];
}

export type RunEvent =
  | { event: "agent_completed"; agent: string; model_name: string; latency_ms: number }
  | { event: "agent_failed"; agent: string; kind: string; cause: string }
  | { event: "run_completed"; run: RunRecordPayload }
  | { event: "run_failed"; code: string; message: string };

export interface AgentRunBody {
  cohort_id: string;
  patient_id: string;
  predictions_id: string;
  matrix_id: string;
  card_id: string;
  band_delta?: number;
  window?: number;
  stream?: boolean;
  fail_agents?: string[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function raiseFor(response: Response): Promise<never> {
  let code = "error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.baseUrl + path);
    if (!response.ok) await raiseFor(response);
    return (await response.json()) as T;
  }

  private async sendJson<T>(method: string, path: string, body: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) await raiseFor(response);
    return (await response.json()) as T;
  }

  listCohorts(): Promise<Array<{ id: string; created_at: string }>> {
    return this.getJson("/cohorts");
  }

  generateCohort(n: number, seed: number): Promise<CohortSummary> {
    return this.sendJson("POST", "/cohorts", { n, seed });
  }

  getCohort(cohortId: string): Promise<CohortPayload> {
    return this.getJson(`/cohorts/${cohortId}`);
  }

  getMetrics(predictionsId: string): Promise<MetricsPayload> {
    return this.getJson(`/predictions/${predictionsId}/metrics`);
  }

  getMatrix(matrixId: string): Promise<CostMatrixDoc> {
    return this.getJson(`/cost-matrices/${matrixId}`);
  }

  putMatrix(
    matrixId: string,
    doc: CostMatrixDoc,
  ): Promise<{ matrix_id: string; warnings: string[] }> {
    return this.sendJson("PUT", `/cost-matrices/${matrixId}`, doc);
  }

  putCard(cardId: string, doc: Record<string, unknown>): Promise<{ card_id: string }> {
    return this.sendJson("PUT", `/cards/${cardId}`, doc);
  }

  getCip(predictionsId: string, matrixId: string, grid?: string): Promise<CipCurvePayload> {
    const suffix = grid ? `&grid=${encodeURIComponent(grid)}` : "";
    return this.getJson(`/cip?predictions=${predictionsId}&matrix=${matrixId}${suffix}`);
  }

  getExpectedCost(
    patientId: string,
    predictionsId: string,
    matrixId: string,
    t: number,
  ): Promise<ExpectedCostPayload> {
    return this.getJson(
      `/patients/${patientId}/expected-cost?predictions=${predictionsId}` +
        `&matrix=${matrixId}&t=${t}`,
    );
  }

  /** Stream an agent run; onEvent fires for every NDJSON line. */
  async runAgents(body: AgentRunBody, onEvent: (event: RunEvent) => void): Promise<void> {
    const response = await fetch(this.baseUrl + "/agent-runs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ ...body, stream: true }),
    });
    if (!response.ok) await raiseFor(response);
    if (response.body) {
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffered = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffered += decoder.decode(value, { stream: true });
        const lines = buffered.split("\n");
        buffered = lines.pop() ?? "";
        for (const line of lines) {
          if (line.trim()) onEvent(JSON.parse(line) as RunEvent);
        }
      }
      if (buffered.trim()) onEvent(JSON.parse(buffered) as RunEvent);
    } else {
      for (const line of (await response.text()).split("\n")) {
        if (line.trim()) onEvent(JSON.parse(line) as RunEvent);
      }
    }
  }
}
