"""Prompt templates: versioned, hashed, and fully deterministic.

The system preamble pins the ground rules found necessary in clinical
review: answers must stay within the supplied context, and phrasing must
stay advisory rather than directive.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping

from ..errors import TemplateMissing
from .blocks import AgentContext

SYSTEM_PREAMBLE = (
    "You are a decision-support assistant for clinicians reviewing one "
    "patient's risk prediction.\n"
    "Ground rules:\n"
    "- Use only the information in the context sections below; do not add "
    "outside facts, guideline citations, or invented patient details.\n"
    "- If the context does not support a statement, say the information is "
    "not available.\n"
    "- Phrase suggestions as considerations for the clinician; never use "
    "directive wording such as 'shall' or 'must', and give no orders.\n"
    "- Be concise and state uncertainty plainly."
)

_BLOCK_HEADERS = {
    "patient_profile": "Patient clinical profile",
    "classifier_description": "Classifier description",
    "decision_threshold": "Decision threshold",
    "performance_near_r": "Classifier performance near the decision threshold",
    "risk_score": "Predicted risk score",
    "performance_near_s": "Classifier performance near the patient's score",
    "cip_cost_description": "How costs are modelled",
    "cip_cost_coefficients": "Cost coefficients",
    "cip_composition_near_s": "Cost composition near the patient's score",
    "response_I": "Earlier analysis: prediction reliability",
    "response_II": "Earlier analysis: cost-benefit balance",
}

_QUERY_TEXTS = {
    "risk_analysis": (
        "How much confidence can a clinician place in this patient's "
        "predicted risk? Weigh the score against the decision threshold and "
        "the classifier's behaviour near both, and note what would make the "
        "prediction more or less reliable."
    ),
    "cost_benefit": (
        "Which cost and benefit components dominate for this patient, and "
        "how does the balance shift across the threshold band around their "
        "score? Ground every statement in the supplied coefficients and "
        "composition figures."
    ),
    "risk_mitigation": (
        "What could reduce the uncertainty of this prediction? Consider "
        "options such as repeating or adding measurements and reviewing the "
        "existing record, and say which profile entries make that worthwhile."
    ),
    "intervention_prediction": (
        "Looking ahead, how might the care decision under discussion affect "
        "this patient's future risk, and what follow-up would be reasonable "
        "to watch for? Stay within what the earlier analysis supports."
    ),
}


@dataclass(frozen=True)
class TemplateSet:
    """Prompt skeleton: preamble, one header per block kind, one query text
    per query kind. The fingerprint identifies the exact wording used."""

    version: str
    system: str
    block_headers: Mapping[str, str] = field(default_factory=dict)
    query_texts: Mapping[str, str] = field(default_factory=dict)

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "version": self.version,
                "system": self.system,
                "block_headers": dict(self.block_headers),
                "query_texts": dict(self.query_texts),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


DEFAULT_TEMPLATES = TemplateSet(
    version="1",
    system=SYSTEM_PREAMBLE,
    block_headers=_BLOCK_HEADERS,
    query_texts=_QUERY_TEXTS,
)


def render_prompt(ctx: AgentContext, templates: TemplateSet = DEFAULT_TEMPLATES) -> str:
    """Deterministic prompt: preamble, each block once in declared order,
    then the agent's question as the final section."""
    parts = [templates.system, ""]
    for kind, text in ctx.blocks:
        header = templates.block_headers.get(kind)
        if header is None:
            raise TemplateMissing(f"no template for block kind {kind!r}")
        parts.append(f"### {header}")
        parts.append(text)
        parts.append("")
    query = templates.query_texts.get(ctx.query_kind)
    if query is None:
        raise TemplateMissing(f"no template for query kind {ctx.query_kind!r}")
    parts.append("### Question")
    parts.append(query)
    return "\n".join(parts)
