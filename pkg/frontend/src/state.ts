// Central view state with the two hard invariants enforced on update:
// threshold stays in [0, 1] and the risk-band delta stays positive.

export type AgentName = "I" | "II" | "III" | "IV";

export interface AgentPanelState {
  status: "idle" | "running" | "done" | "error";
  text?: string;
  modelName?: string;
  error?: string;
}

export interface ViewState {
  cohortId: string | null;
  predictionsId: string | null;
  matrixId: string | null;
  patientId: string | null;
  threshold: number;
  bandDelta: number;
  transcripts: Record<AgentName, AgentPanelState>;
}

export const AGENT_NAMES: AgentName[] = ["I", "II", "III", "IV"];

export function idleTranscripts(): Record<AgentName, AgentPanelState> {
  return {
    I: { status: "idle" },
    II: { status: "idle" },
    III: { status: "idle" },
    IV: { status: "idle" },
  };
}

export function initialState(): ViewState {
  return {
    cohortId: null,
    predictionsId: null,
    matrixId: null,
    patientId: null,
    threshold: 0.25,
    bandDelta: 0.05,
    transcripts: idleTranscripts(),
  };
}

export class StateStore {
  private state: ViewState;
  private listeners: Array<(state: ViewState) => void> = [];

  constructor(state: ViewState = initialState()) {
    this.state = state;
  }

  get(): ViewState {
    return this.state;
  }

  update(patch: Partial<ViewState>): void {
    if (patch.threshold !== undefined && !(patch.threshold >= 0 && patch.threshold <= 1)) {
      throw new RangeError(`threshold ${patch.threshold} outside [0, 1]`);
    }
    if (patch.bandDelta !== undefined && !(patch.bandDelta > 0)) {
      throw new RangeError(`band delta ${patch.bandDelta} must be positive`);
    }
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: (state: ViewState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  return (...args: A) => {
    if (timer !== undefined) clearTimeout(timer);
    timer = setTimeout(() => fn(...args), waitMs);
  };
}
