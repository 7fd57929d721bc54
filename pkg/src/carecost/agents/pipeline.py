"""DAG executor for the four agents: I first, then II and III (optionally
concurrent), then IV after II. A failed call aborts its dependents while
completed exchanges are kept."""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Mapping

from ..cohort import PatientProfile
from ..costcurves import CipCurve, CostMatrix
from ..errors import AgentCallFailed
from ..metrics import PredictionSet
from ..scorer import ModelCard
from .blocks import AgentContext, AgentId, build_context
from .clients import ChatClient
from .templates import DEFAULT_TEMPLATES, TemplateSet, render_prompt


@dataclass(frozen=True)
class AgentExchange:
    """One completed agent call: context, rendered prompt, and response."""

    agent: AgentId
    context: AgentContext
    prompt: str
    response_text: str
    model_name: str
    latency_ms: float
    token_counts: Mapping[str, int] | None
    template_hash: str

    def to_doc(self) -> dict:
        return {
            "agent": self.agent.value,
            "context": self.context.to_doc(),
            "prompt": self.prompt,
            "response_text": self.response_text,
            "model_name": self.model_name,
            "latency_ms": self.latency_ms,
            "token_counts": dict(self.token_counts) if self.token_counts else None,
            "template_hash": self.template_hash,
        }


@dataclass(frozen=True)
class AgentFailure:
    agent: AgentId
    kind: str  # "call_failed" or "dependency_unmet"
    cause: str

    def to_doc(self) -> dict:
        return {"agent": self.agent.value, "kind": self.kind, "cause": self.cause}


@dataclass(frozen=True)
class PipelineResult:
    exchanges: Mapping[AgentId, AgentExchange]
    failures: Mapping[AgentId, AgentFailure]
    call_order: tuple[AgentId, ...]

    @property
    def complete(self) -> bool:
        return len(self.exchanges) == 4

    def to_doc(self) -> dict:
        return {
            "exchanges": {a.value: e.to_doc() for a, e in self.exchanges.items()},
            "failures": {a.value: f.to_doc() for a, f in self.failures.items()},
            "call_order": [a.value for a in self.call_order],
        }


def run_pipeline(
    patient: PatientProfile,
    card: ModelCard,
    preds: PredictionSet,
    cip: CipCurve,
    matrix: CostMatrix,
    client: ChatClient,
    templates: TemplateSet = DEFAULT_TEMPLATES,
    band_delta: float = 0.05,
    window: float = 0.05,
    concurrent: bool = True,
    observer: Callable[[str, AgentId, dict], None] | None = None,
) -> PipelineResult:
    """Run all four agents for one patient, respecting the dependency DAG.

    II and III run concurrently when ``concurrent`` is set; the sequential
    fallback produces identical exchanges. ``observer`` (if given) receives
    ("completed" | "failed", agent, detail) as each agent finishes, which is
    how callers stream progress.
    """
    exchanges: dict[AgentId, AgentExchange] = {}
    failures: dict[AgentId, AgentFailure] = {}
    call_order: list[AgentId] = []
    order_lock = threading.Lock()
    template_hash = templates.fingerprint()

    def invoke(agent: AgentId, prior: dict[AgentId, str]) -> AgentExchange:
        ctx = build_context(
            agent,
            patient,
            card,
            preds,
            cip,
            matrix,
            prior=prior,
            band_delta=band_delta,
            window=window,
        )
        prompt = render_prompt(ctx, templates)
        with order_lock:
            call_order.append(agent)
        try:
            response = client.complete(prompt, agent)
        except AgentCallFailed:
            raise
        except Exception as exc:  # endpoint bugs must not kill the run
            raise AgentCallFailed(agent.value, str(exc))
        if not response.text:
            raise AgentCallFailed(agent.value, "empty response text")
        return AgentExchange(
            agent=agent,
            context=ctx,
            prompt=prompt,
            response_text=response.text,
            model_name=response.model_name,
            latency_ms=response.latency_ms,
            token_counts=response.token_counts,
            template_hash=template_hash,
        )

    def notify(event: str, agent: AgentId, detail: dict) -> None:
        if observer is not None:
            observer(event, agent, detail)

    def attempt(agent: AgentId, prior: dict[AgentId, str]) -> bool:
        try:
            exchange = invoke(agent, prior)
        except AgentCallFailed as exc:
            failures[agent] = AgentFailure(agent, "call_failed", exc.cause)
            notify("failed", agent, failures[agent].to_doc())
            return False
        exchanges[agent] = exchange
        notify(
            "completed",
            agent,
            {
                "agent": agent.value,
                "model_name": exchange.model_name,
                "latency_ms": exchange.latency_ms,
            },
        )
        return True

    def skip(agent: AgentId, missing: AgentId) -> None:
        failures[agent] = AgentFailure(
            agent, "dependency_unmet", f"no response from agent {missing.value}"
        )
        notify("failed", agent, failures[agent].to_doc())

    if attempt(AgentId.I, {}):
        prior = {AgentId.I: exchanges[AgentId.I].response_text}
        if concurrent:
            with ThreadPoolExecutor(max_workers=2) as pool:
                future_ii = pool.submit(attempt, AgentId.II, dict(prior))
                future_iii = pool.submit(attempt, AgentId.III, dict(prior))
                ii_ok = future_ii.result()
                future_iii.result()
        else:
            ii_ok = attempt(AgentId.II, dict(prior))
            attempt(AgentId.III, dict(prior))
        if ii_ok:
            attempt(
                AgentId.IV, {AgentId.II: exchanges[AgentId.II].response_text}
            )
        else:
            skip(AgentId.IV, AgentId.II)
    else:
        skip(AgentId.II, AgentId.I)
        skip(AgentId.III, AgentId.I)
        skip(AgentId.IV, AgentId.II)

    return PipelineResult(
        exchanges=exchanges, failures=failures, call_order=tuple(call_order)
    )
