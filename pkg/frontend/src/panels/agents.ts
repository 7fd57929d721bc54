// Four agent panels. Each panel tracks its own status, so one failed agent
// never blanks the others; failures render in place with the cause.

import type { RunEvent } from "../api";
import { AGENT_NAMES, type AgentName, type AgentPanelState } from "../state";

export const AGENT_TITLES: Record<AgentName, string> = {
  I: "How certain is this risk prediction?",
  II: "What does the cost balance look like?",
  III: "How could prediction uncertainty be reduced?",
  IV: "How could future risk be mitigated?",
};

export interface AgentPanelsHandle {
  root: HTMLElement;
  reset(running: boolean): void;
  handleEvent(event: RunEvent): void;
  panelState(agent: AgentName): AgentPanelState;
}

export function createAgentPanels(container: HTMLElement): AgentPanelsHandle {
  const root = document.createElement("div");
  root.className = "agent-panels";
  const states = {} as Record<AgentName, AgentPanelState>;
  const bodies = {} as Record<AgentName, HTMLElement>;
  const badges = {} as Record<AgentName, HTMLElement>;

  for (const agent of AGENT_NAMES) {
    const panel = document.createElement("section");
    panel.className = "agent-panel";
    panel.dataset.agent = agent;

    const header = document.createElement("h3");
    header.textContent = `Agent ${agent}: ${AGENT_TITLES[agent]}`;
    const badge = document.createElement("span");
    badge.className = "status";
    header.appendChild(badge);

    const body = document.createElement("div");
    body.className = "agent-body";

    panel.append(header, body);
    root.appendChild(panel);
    states[agent] = { status: "idle" };
    bodies[agent] = body;
    badges[agent] = badge;
  }
  container.appendChild(root);

  function paint(agent: AgentName): void {
    const state = states[agent];
    badges[agent].textContent = state.status;
    badges[agent].dataset.status = state.status;
    if (state.status === "error") {
      bodies[agent].textContent = `Failed: ${state.error ?? "unknown error"}`;
      bodies[agent].classList.add("error");
    } else {
      bodies[agent].textContent = state.text ?? "";
      bodies[agent].classList.remove("error");
    }
  }

  function setState(agent: AgentName, state: AgentPanelState): void {
    states[agent] = state;
    paint(agent);
  }

  return {
    root,
    reset(running: boolean): void {
      for (const agent of AGENT_NAMES) {
        setState(agent, { status: running ? "running" : "idle" });
      }
    },
    handleEvent(event: RunEvent): void {
      if (event.event === "agent_completed") {
        const agent = event.agent as AgentName;
        setState(agent, {
          status: "done",
          modelName: event.model_name,
          text: states[agent].text,
        });
      } else if (event.event === "agent_failed") {
        setState(event.agent as AgentName, { status: "error", error: event.cause });
      } else if (event.event === "run_completed") {
        for (const exchange of event.run.exchanges) {
          const agent = exchange.agent as AgentName;
          setState(agent, {
            status: "done",
            text: exchange.response_text,
            modelName: exchange.model_name,
          });
        }
        for (const failure of event.run.failures) {
          setState(failure.agent as AgentName, {
            status: "error",
            error: failure.cause,
          });
        }
      } else {
        for (const agent of AGENT_NAMES) {
          if (states[agent].status === "running") {
            setState(agent, { status: "error", error: event.message });
          }
        }
      }
    },
    panelState(agent: AgentName): AgentPanelState {
      return states[agent];
    },
  };
}
