"""Synthetic patient cohorts from summary statistics.

Continuous variables are reconstructed as log-normals from median + IQR
(clinical lab values are typically right-skewed), binaries as Bernoulli
draws. Outcome labels come from a logistic model over standardized
variables, so the generated risk scores are calibrated by construction.

Variables are drawn independently; no correlation structure is fitted. The
default specification panel is modeled on an elderly heart-failure inpatient
population and is a stand-in for real cohort data, not a claim about any
particular dataset.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidSpec
from .metrics import PredictionRecord, PredictionSet

__all__ = [
    "VariableSpec",
    "PatientProfile",
    "LabelModel",
    "fit_lognormal",
    "generate_cohort",
    "default_variable_specs",
    "default_label_model",
    "variable_specs_from_doc",
    "label_model_from_doc",
    "cohort_to_csv",
]

# Standard normal quantile at 0.75; the IQR of a log-normal spans
# 2 * Z75 standard deviations in log space.
Z75 = 0.6744897501


@dataclass(frozen=True)
class VariableSpec:
    """One clinical variable: either continuous (median + quartiles) or
    binary (prevalence)."""

    name: str
    kind: str
    median: float | None = None
    q25: float | None = None
    q75: float | None = None
    prevalence: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "continuous":
            if self.median is None or self.q25 is None or self.q75 is None:
                raise InvalidSpec(f"{self.name}: continuous needs median/q25/q75")
            if not 0 < self.q25 < self.median < self.q75:
                raise InvalidSpec(
                    f"{self.name}: need 0 < q25 < median < q75, got "
                    f"({self.q25}, {self.median}, {self.q75})"
                )
        elif self.kind == "binary":
            if self.prevalence is None or not 0.0 <= self.prevalence <= 1.0:
                raise InvalidSpec(f"{self.name}: binary needs prevalence in [0, 1]")
        else:
            raise InvalidSpec(f"{self.name}: unknown kind {self.kind!r}")

    def to_doc(self) -> dict:
        if self.kind == "continuous":
            return {
                "name": self.name,
                "kind": self.kind,
                "median": self.median,
                "q25": self.q25,
                "q75": self.q75,
            }
        return {"name": self.name, "kind": self.kind, "prevalence": self.prevalence}


@dataclass(frozen=True)
class PatientProfile:
    patient_id: str
    variables: Mapping[str, float]
    generated_seed: int

    def to_doc(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "variables": dict(self.variables),
            "generated_seed": self.generated_seed,
        }


@dataclass(frozen=True)
class LabelModel:
    """Logistic outcome model: log-odds = intercept + sum of weight *
    standardized variable value."""

    intercept: float
    weights: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.intercept):
            raise InvalidSpec("label model intercept must be finite")
        for name, w in self.weights.items():
            if not math.isfinite(w):
                raise InvalidSpec(f"label model weight for {name!r} must be finite")

    def to_doc(self) -> dict:
        return {"intercept": self.intercept, "weights": dict(self.weights)}


def fit_lognormal(median: float, q25: float, q75: float) -> tuple[float, float]:
    """Log-normal (mu, sigma) whose median matches exactly and whose IQR
    ratio q75/q25 is reproduced."""
    if not 0 < q25 < median < q75:
        raise InvalidSpec(
            f"need 0 < q25 < median < q75, got ({q25}, {median}, {q75})"
        )
    mu = math.log(median)
    sigma = (math.log(q75) - math.log(q25)) / (2 * Z75)
    return mu, sigma


def _standardizer(spec: VariableSpec):
    """Map a raw draw to the standardized unit the label model weights use."""
    if spec.kind == "continuous":
        mu, sigma = fit_lognormal(spec.median, spec.q25, spec.q75)
        return lambda v: (math.log(v) - mu) / sigma
    p = spec.prevalence
    if p in (0.0, 1.0):
        return lambda v: 0.0  # constant variable carries no signal
    sd = math.sqrt(p * (1.0 - p))
    return lambda v: (v - p) / sd


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def generate_cohort(
    specs: Sequence[VariableSpec],
    label_model: LabelModel,
    n: int,
    seed: int,
) -> tuple[list[PatientProfile], PredictionSet]:
    """Draw n patients and their outcomes.

    Returns the profiles plus a PredictionSet whose score is each patient's
    true outcome probability under the label model and whose label is the
    Bernoulli draw from it. Each patient uses an RNG stream keyed by
    (seed, patient index), so results are reproducible and order-independent.
    """
    if n < 1:
        raise InvalidSpec(f"cohort size must be >= 1, got {n}")
    if not specs:
        raise InvalidSpec("no variable specs given")
    by_name = {s.name: s for s in specs}
    if len(by_name) != len(specs):
        raise InvalidSpec("duplicate variable names in specs")
    for name in label_model.weights:
        if name not in by_name:
            raise InvalidSpec(f"label model weight references unknown variable {name!r}")
    standardizers = {s.name: _standardizer(s) for s in specs}
    fitted = {
        s.name: fit_lognormal(s.median, s.q25, s.q75)
        for s in specs
        if s.kind == "continuous"
    }

    profiles: list[PatientProfile] = []
    records: list[PredictionRecord] = []
    for i in range(n):
        rng = np.random.default_rng((seed, i))
        values: dict[str, float] = {}
        for spec in specs:
            if spec.kind == "continuous":
                mu, sigma = fitted[spec.name]
                values[spec.name] = float(math.exp(mu + sigma * rng.standard_normal()))
            else:
                values[spec.name] = float(1.0 if rng.random() < spec.prevalence else 0.0)
        linear = label_model.intercept
        for name, w in label_model.weights.items():
            linear += w * standardizers[name](values[name])
        score = _sigmoid(linear)
        label = 1 if rng.random() < score else 0
        pid = f"p{i:05d}"
        profiles.append(
            PatientProfile(patient_id=pid, variables=values, generated_seed=seed)
        )
        records.append(PredictionRecord(patient_id=pid, score=score, label=label))
    return profiles, PredictionSet(records)


def default_variable_specs() -> list[VariableSpec]:
    """Built-in panel for an elderly heart-failure-like inpatient cohort."""
    return [
        VariableSpec("age_years", "continuous", median=79, q25=71, q75=86),
        VariableSpec("bmi", "continuous", median=26.5, q25=23.6, q75=30.4),
        VariableSpec("in_hospital_days", "continuous", median=6.1, q25=3.1, q75=10.9),
        VariableSpec("comorbidity_index", "continuous", median=3, q25=2, q75=4),
        VariableSpec("nt_probnp", "continuous", median=4169, q25=1870, q75=8843),
        VariableSpec("albumin", "continuous", median=33, q25=29, q75=36),
        VariableSpec("hemoglobin", "continuous", median=124, q25=109, q75=138),
        VariableSpec("egfr", "continuous", median=57, q25=45, q75=70),
        VariableSpec("female", "binary", prevalence=0.45),
        VariableSpec("atrial_fibrillation", "binary", prevalence=0.52),
        VariableSpec("cancer", "binary", prevalence=0.21),
        VariableSpec("chronic_kidney_disease", "binary", prevalence=0.15),
        VariableSpec("hypertension", "binary", prevalence=0.70),
        VariableSpec("loop_diuretics", "binary", prevalence=0.36),
    ]


def default_label_model(target_prevalence: float = 0.22) -> LabelModel:
    """Hand-set weights: age, natriuretic peptide and comorbidity burden push
    risk up, albumin pulls it down. Magnitudes are configuration defaults."""
    if not 0.0 < target_prevalence < 1.0:
        raise InvalidSpec("target prevalence must be in (0, 1)")
    intercept = math.log(target_prevalence / (1.0 - target_prevalence))
    return LabelModel(
        intercept=intercept,
        weights={
            "age_years": 0.6,
            "nt_probnp": 0.5,
            "comorbidity_index": 0.45,
            "albumin": -0.35,
        },
    )


def variable_specs_from_doc(doc: Sequence[Mapping]) -> list[VariableSpec]:
    specs = []
    for item in doc:
        kind = item.get("kind")
        if kind == "continuous":
            specs.append(
                VariableSpec(
                    name=item["name"],
                    kind=kind,
                    median=float(item["median"]),
                    q25=float(item["q25"]),
                    q75=float(item["q75"]),
                )
            )
        elif kind == "binary":
            specs.append(
                VariableSpec(
                    name=item["name"], kind=kind, prevalence=float(item["prevalence"])
                )
            )
        else:
            raise InvalidSpec(f"unknown variable kind {kind!r}")
    return specs


def label_model_from_doc(doc: Mapping) -> LabelModel:
    return LabelModel(
        intercept=float(doc["intercept"]),
        weights={k: float(v) for k, v in doc.get("weights", {}).items()},
    )


def cohort_to_csv(profiles: Sequence[PatientProfile], preds: PredictionSet) -> str:
    """One row per patient: id, every variable, outcome label."""
    labels = {r.patient_id: r.label for r in preds}
    names = list(profiles[0].variables.keys())
    buf = io.StringIO()
    buf.write("patient_id," + ",".join(names) + ",label\n")
    for p in profiles:
        row = [p.patient_id] + [str(p.variables[n]) for n in names]
        row.append(str(labels[p.patient_id]))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def profiles_to_json(profiles: Sequence[PatientProfile]) -> str:
    return json.dumps([p.to_doc() for p in profiles], indent=2)
