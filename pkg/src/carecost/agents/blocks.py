"""Context assembly for the four decision-support agents.

Which agent receives which context block is fixed by a literal inclusion
matrix; build_context renders exactly the checked blocks, in declared order,
and refuses to run when a prerequisite response is missing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from ..cohort import PatientProfile
from ..costcurves import (
    CipCurve,
    CostMatrix,
    COST_TYPES,
    DIMENSIONS,
    SCENARIOS,
    patient_expected_cost,
    risk_band,
)
from ..errors import DependencyUnmet, NotFound
from ..metrics import LocalPerformance, PredictionSet, local_performance
from ..scorer import ModelCard


class AgentId(str, Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


# Declared block order; contexts list their blocks in this order.
BLOCK_KINDS: tuple[str, ...] = (
    "patient_profile",
    "classifier_description",
    "decision_threshold",
    "performance_near_r",
    "risk_score",
    "performance_near_s",
    "cip_cost_description",
    "cip_cost_coefficients",
    "cip_composition_near_s",
    "response_I",
    "response_II",
)

# Inclusion matrix: block kind -> agents whose context carries it.
AGENT_BLOCKS: dict[str, frozenset[AgentId]] = {
    "patient_profile": frozenset({AgentId.I, AgentId.II, AgentId.III, AgentId.IV}),
    "classifier_description": frozenset({AgentId.I}),
    "decision_threshold": frozenset({AgentId.I}),
    "performance_near_r": frozenset({AgentId.I}),
    "risk_score": frozenset({AgentId.I, AgentId.II}),
    "performance_near_s": frozenset({AgentId.I}),
    "cip_cost_description": frozenset({AgentId.II}),
    "cip_cost_coefficients": frozenset({AgentId.II}),
    "cip_composition_near_s": frozenset({AgentId.II}),
    "response_I": frozenset({AgentId.II, AgentId.III}),
    "response_II": frozenset({AgentId.IV}),
}

AGENT_QUERIES: dict[AgentId, str] = {
    AgentId.I: "risk_analysis",
    AgentId.II: "cost_benefit",
    AgentId.III: "risk_mitigation",
    AgentId.IV: "intervention_prediction",
}

AGENT_DEPENDENCIES: dict[AgentId, tuple[AgentId, ...]] = {
    AgentId.I: (),
    AgentId.II: (AgentId.I,),
    AgentId.III: (AgentId.I,),
    AgentId.IV: (AgentId.II,),
}


@dataclass(frozen=True)
class AgentContext:
    agent: AgentId
    blocks: tuple[tuple[str, str], ...]
    query_kind: str

    @property
    def block_kinds(self) -> tuple[str, ...]:
        return tuple(kind for kind, _text in self.blocks)

    def to_doc(self) -> dict:
        return {
            "agent": self.agent.value,
            "blocks": [{"kind": k, "text": t} for k, t in self.blocks],
            "query_kind": self.query_kind,
        }


def _fmt(value: float, places: int = 3) -> str:
    return f"{value:.{places}f}"


def _render_patient_profile(patient: PatientProfile) -> str:
    lines = [f"Patient {patient.patient_id}:"]
    for name, value in patient.variables.items():
        lines.append(f"- {name}: {value:.4g}")
    return "\n".join(lines)


def _render_classifier_description(card: ModelCard) -> str:
    parts = [card.description]
    if card.training_summary:
        parts.append(card.training_summary)
    if card.metric_summary:
        metrics = ", ".join(
            f"{k}={v:.3f}" for k, v in sorted(card.metric_summary.items())
        )
        parts.append(f"Overall performance: {metrics}.")
    return "\n".join(parts)


def _render_decision_threshold(card: ModelCard) -> str:
    r = card.decision_threshold
    return (
        f"The decision threshold is r = {_fmt(r)}. Patients with a risk score "
        "at or above r are classified as high risk."
    )


def _render_performance(lp: LocalPerformance, what: str) -> str:
    c = lp.counts
    lines = [
        f"Classifier behaviour near {what} = {_fmt(lp.center)} "
        f"(window +/- {_fmt(lp.window)}):",
        f"- confusion at this threshold: TP={c.tp}, FP={c.fp}, TN={c.tn}, FN={c.fn}",
        f"- precision={_fmt(lp.precision)}, recall={_fmt(lp.recall)}, "
        f"f1={_fmt(lp.f1)}",
        f"- fraction of patients scored within the window: {_fmt(lp.score_density)}",
    ]
    if lp.window_positive_rate is None:
        lines.append("- observed event rate within the window: no patients in window")
    else:
        lines.append(
            f"- observed event rate within the window: {_fmt(lp.window_positive_rate)}"
        )
    return "\n".join(lines)


def _render_risk_score(s: float, card: ModelCard) -> str:
    side = "at or above" if s >= card.decision_threshold else "below"
    cls = "high risk" if s >= card.decision_threshold else "low risk"
    return (
        f"Predicted risk score s = {_fmt(s)}. This is {side} the decision "
        f"threshold r = {_fmt(card.decision_threshold)}, so the patient is "
        f"classified as {cls}."
    )


def _render_cost_description() -> str:
    return (
        "Decision consequences are scored on two dimensions: patient quality "
        "of life and healthcare system resources. Each dimension carries two "
        "cost types: the cost of the action taken (treatment) and the extra "
        "cost of a wrong classification (error). Every outcome scenario "
        "(TP, FP, TN, FN) has a coefficient between -1 and 1; negative values "
        "are benefits relative to standard care, positive values are costs."
    )


def _render_cost_coefficients(matrix: CostMatrix) -> str:
    lines = ["Cost coefficients per scenario:"]
    for kind in COST_TYPES:
        for sc in SCENARIOS:
            cells = ", ".join(
                f"{dim}={matrix[(kind, sc, dim)]:g}" for dim in DIMENSIONS
            )
            lines.append(f"- {kind} {sc}: {cells}")
    return "\n".join(lines)


def _render_composition(
    cip: CipCurve, matrix: CostMatrix, s: float, card: ModelCard, band_delta: float
) -> str:
    band = risk_band(cip, s, band_delta)
    sl = band.slice
    nearest = min(range(len(sl.grid)), key=lambda i: abs(sl.grid[i] - s))
    comp = sl.components_at(nearest)
    cells = patient_expected_cost(s, card.decision_threshold, matrix)
    lines = [
        f"Population cost composition within the threshold band "
        f"[{_fmt(sl.grid[0])}, {_fmt(sl.grid[-1])}] around s = {_fmt(s)}:",
        f"- at threshold {_fmt(sl.grid[nearest])}: "
        + ", ".join(f"{k}={v:+.4f}" for k, v in comp.items())
        + f", net={sl.net[nearest]:+.4f}",
        f"- net effect across the band: {sl.net[0]:+.4f} at the lower edge, "
        f"{sl.net[-1]:+.4f} at the upper edge",
        "Expected cost for this patient (outcome weighted by s) at the "
        "decision threshold:",
    ]
    for (kind, dim), value in cells.items():
        lines.append(f"- {kind} {dim}: {value:+.4f}")
    qol = sum(v for (k, d), v in cells.items() if d == "qol")
    hc = sum(v for (k, d), v in cells.items() if d == "healthcare")
    lines.append(f"- total: qol {qol:+.4f}, healthcare {hc:+.4f}")
    return "\n".join(lines)


def build_context(
    agent: AgentId,
    patient: PatientProfile,
    card: ModelCard,
    preds: PredictionSet,
    cip: CipCurve,
    matrix: CostMatrix,
    prior: Mapping[AgentId, str] | None = None,
    band_delta: float = 0.05,
    window: float = 0.05,
) -> AgentContext:
    """Assemble exactly the context blocks the inclusion matrix checks for
    this agent. prior must hold response text from every prerequisite agent."""
    prior = prior or {}
    for dep in AGENT_DEPENDENCIES[agent]:
        if not prior.get(dep):
            raise DependencyUnmet(dep.value)

    def score() -> float:
        try:
            return preds.score_of(patient.patient_id)
        except KeyError:
            raise NotFound(
                f"patient {patient.patient_id!r} has no prediction record"
            )

    blocks: list[tuple[str, str]] = []
    for kind in BLOCK_KINDS:
        if agent not in AGENT_BLOCKS[kind]:
            continue
        if kind == "patient_profile":
            text = _render_patient_profile(patient)
        elif kind == "classifier_description":
            text = _render_classifier_description(card)
        elif kind == "decision_threshold":
            text = _render_decision_threshold(card)
        elif kind == "performance_near_r":
            text = _render_performance(
                local_performance(preds, card.decision_threshold, window), "r"
            )
        elif kind == "risk_score":
            text = _render_risk_score(score(), card)
        elif kind == "performance_near_s":
            text = _render_performance(local_performance(preds, score(), window), "s")
        elif kind == "cip_cost_description":
            text = _render_cost_description()
        elif kind == "cip_cost_coefficients":
            text = _render_cost_coefficients(matrix)
        elif kind == "cip_composition_near_s":
            text = _render_composition(cip, matrix, score(), card, band_delta)
        elif kind == "response_I":
            text = prior[AgentId.I]
        else:  # response_II
            text = prior[AgentId.II]
        blocks.append((kind, text))
    return AgentContext(
        agent=agent, blocks=tuple(blocks), query_kind=AGENT_QUERIES[agent]
    )
