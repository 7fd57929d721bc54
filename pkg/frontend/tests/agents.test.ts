// Agent panels consume the run's streamed events; a failing agent renders
// its error in place while the other panels fill normally.

import { beforeEach, describe, expect, it } from "vitest";

import type { RunEvent } from "../src/api";
import { createAgentPanels } from "../src/panels/agents";
import { fixtureText } from "./helpers";

function eventsFrom(name: string): RunEvent[] {
  return fixtureText(name)
    .trim()
    .split("\n")
    .map((line) => JSON.parse(line) as RunEvent);
}

describe("agent panels", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("fills all four panels on a clean run", () => {
    const panels = createAgentPanels(document.body);
    panels.reset(true);
    for (const event of eventsFrom("agent_run_ok.ndjson")) {
      panels.handleEvent(event);
    }
    for (const agent of ["I", "II", "III", "IV"] as const) {
      expect(panels.panelState(agent).status).toBe("done");
      expect(panels.panelState(agent).text).toBeTruthy();
    }
  });

  it("isolates a failing agent III while I, II, IV populate", () => {
    const panels = createAgentPanels(document.body);
    panels.reset(true);
    for (const event of eventsFrom("agent_run_fail_iii.ndjson")) {
      panels.handleEvent(event);
    }
    for (const agent of ["I", "II", "IV"] as const) {
      expect(panels.panelState(agent).status).toBe("done");
      expect(panels.panelState(agent).text).toBeTruthy();
    }
    expect(panels.panelState("III").status).toBe("error");
    const panel = document.querySelector('[data-agent="III"] .agent-body')!;
    expect(panel.textContent).toContain("injected fault");
    expect(panel.classList.contains("error")).toBe(true);
  });

  it("marks still-running panels as failed when the whole run dies", () => {
    const panels = createAgentPanels(document.body);
    panels.reset(true);
    panels.handleEvent({
      event: "agent_completed",
      agent: "I",
      model_name: "mock",
      latency_ms: 0,
    });
    panels.handleEvent({
      event: "run_failed",
      code: "error",
      message: "store exploded",
    });
    expect(panels.panelState("II").status).toBe("error");
    expect(panels.panelState("II").error).toBe("store exploded");
    expect(panels.panelState("I").status).toBe("done");
  });
});
