"""Risk-score providers: a from-scratch L2-regularized logistic regression
for generated cohorts, and CSV import of externally computed scores.

Gradient-boosted or forest scorers are deliberately not trained in-engine;
their scores enter through import_scores.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, Mapping, Sequence

import numpy as np

from .cohort import PatientProfile
from .errors import (
    DegenerateLabels,
    DuplicateId,
    InvalidData,
    MissingFeature,
    RangeError,
)
from .metrics import PredictionRecord, PredictionSet

__all__ = [
    "LogisticModel",
    "ModelCard",
    "train_logistic",
    "predict",
    "loss_and_gradient",
    "features_from_profiles",
    "apply_to_cohort",
    "import_scores",
    "logistic_model_from_doc",
]


@dataclass(frozen=True)
class LogisticModel:
    """Fitted weights plus the per-feature standardization baked in at
    training time. predict() standardizes raw inputs internally; callers
    must never pre-standardize (the feature_hash identifies the stored
    transform for audit)."""

    feature_names: tuple[str, ...]
    weights: tuple[float, ...]
    intercept: float
    means: tuple[float, ...]
    sds: tuple[float, ...]
    converged: bool
    n_iter: int
    final_loss: float
    loss_history: tuple[float, ...] = ()
    feature_hash: str = ""

    def __post_init__(self) -> None:
        if len(self.weights) != len(self.feature_names):
            raise InvalidData("one weight per feature name required")
        if any(sd <= 0 for sd in self.sds):
            raise InvalidData("standardization sds must be positive")
        if not self.feature_hash:
            object.__setattr__(self, "feature_hash", self._hash())

    def _hash(self) -> str:
        payload = json.dumps(
            {
                "features": list(self.feature_names),
                "means": list(self.means),
                "sds": list(self.sds),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_doc(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "weights": list(self.weights),
            "intercept": self.intercept,
            "means": list(self.means),
            "sds": list(self.sds),
            "converged": self.converged,
            "n_iter": self.n_iter,
            "final_loss": self.final_loss,
            "loss_history": list(self.loss_history),
            "feature_hash": self.feature_hash,
        }


def logistic_model_from_doc(doc: Mapping) -> LogisticModel:
    model = LogisticModel(
        feature_names=tuple(doc["feature_names"]),
        weights=tuple(float(w) for w in doc["weights"]),
        intercept=float(doc["intercept"]),
        means=tuple(float(m) for m in doc["means"]),
        sds=tuple(float(s) for s in doc["sds"]),
        converged=bool(doc["converged"]),
        n_iter=int(doc["n_iter"]),
        final_loss=float(doc["final_loss"]),
        loss_history=tuple(float(v) for v in doc.get("loss_history", ())),
        feature_hash=str(doc.get("feature_hash", "")),
    )
    if model.feature_hash != model._hash():
        raise InvalidData("model standardization hash does not match its contents")
    return model


@dataclass(frozen=True)
class ModelCard:
    """Human-facing summary of a scorer and its chosen operating point."""

    description: str
    decision_threshold: float
    training_summary: str = ""
    metric_summary: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 <= self.decision_threshold <= 1.0:
            raise RangeError(
                f"decision threshold {self.decision_threshold} outside [0, 1]"
            )

    def to_doc(self) -> dict:
        return {
            "description": self.description,
            "decision_threshold": self.decision_threshold,
            "training_summary": self.training_summary,
            "metric_summary": dict(self.metric_summary),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ModelCard":
        return cls(
            description=doc["description"],
            decision_threshold=float(doc["decision_threshold"]),
            training_summary=doc.get("training_summary", ""),
            metric_summary=dict(doc.get("metric_summary", {})),
        )


def loss_and_gradient(
    theta: np.ndarray, features: np.ndarray, labels: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Mean logistic log-loss with L2 penalty on weights (not intercept).

    theta[0] is the intercept, theta[1:] the weights. Uses logaddexp for
    stability at extreme margins.
    """
    z = theta[0] + features @ theta[1:]
    loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    loss += 0.5 * l2 * float(np.dot(theta[1:], theta[1:]))
    p = 1.0 / (1.0 + np.exp(-z))
    residual = p - labels
    grad = np.empty_like(theta)
    grad[0] = float(residual.mean())
    grad[1:] = features.T @ residual / len(labels) + l2 * theta[1:]
    return loss, grad


def train_logistic(
    features: Sequence[Sequence[float]] | np.ndarray,
    labels: Sequence[int] | np.ndarray,
    l2: float = 0.01,
    max_iter: int = 500,
    tol: float = 1e-6,
    feature_names: Sequence[str] | None = None,
) -> LogisticModel:
    """Fit by gradient descent with backtracking line search.

    Inputs are z-scored internally and the transform is stored on the model.
    Only steps that decrease the loss are accepted, so the training loss is
    non-increasing by construction; convergence is declared when the
    gradient max-norm drops to tol.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2:
        raise InvalidData("features must be a 2-D matrix")
    if len(x) != len(y):
        raise InvalidData("features and labels differ in length")
    if len(x) < 2:
        raise InvalidData("need at least 2 samples")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise InvalidData("non-finite value in training data")
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise InvalidData("labels must be 0/1")
    if y.min() == y.max():
        raise DegenerateLabels("training labels contain a single class")
    if l2 < 0:
        raise InvalidData(f"l2 must be >= 0, got {l2}")
    if feature_names is None:
        feature_names = [f"x{j}" for j in range(x.shape[1])]
    if len(feature_names) != x.shape[1]:
        raise InvalidData("feature_names length does not match feature columns")

    means = x.mean(axis=0)
    sds = x.std(axis=0)
    constant = np.flatnonzero(sds == 0)
    if len(constant):
        raise InvalidData(
            f"constant feature cannot be standardized: {feature_names[constant[0]]!r}"
        )
    xs = (x - means) / sds

    theta = np.zeros(x.shape[1] + 1)
    loss, grad = loss_and_gradient(theta, xs, y, l2)
    history = [loss]
    step = 1.0
    iterations = 0
    converged = float(np.max(np.abs(grad))) <= tol
    while not converged and iterations < max_iter:
        accepted = False
        for _ in range(50):
            candidate = theta - step * grad
            new_loss, new_grad = loss_and_gradient(candidate, xs, y, l2)
            if new_loss <= loss - 1e-4 * step * float(np.dot(grad, grad)):
                theta, loss, grad = candidate, new_loss, new_grad
                history.append(loss)
                step *= 1.2
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # no descent direction left at float precision
        iterations += 1
        converged = float(np.max(np.abs(grad))) <= tol

    return LogisticModel(
        feature_names=tuple(feature_names),
        weights=tuple(float(w) for w in theta[1:]),
        intercept=float(theta[0]),
        means=tuple(float(m) for m in means),
        sds=tuple(float(s) for s in sds),
        converged=converged,
        n_iter=iterations,
        final_loss=loss,
        loss_history=tuple(history),
    )


def _profile_values(
    model: LogisticModel, profile: PatientProfile | Mapping[str, float]
) -> np.ndarray:
    variables = profile.variables if isinstance(profile, PatientProfile) else profile
    values = np.empty(len(model.feature_names))
    for j, name in enumerate(model.feature_names):
        if name not in variables:
            raise MissingFeature(f"profile is missing feature {name!r}")
        values[j] = float(variables[name])
    return values


def predict(
    model: LogisticModel, profile: PatientProfile | Mapping[str, float]
) -> float:
    """Risk score in (0, 1) for one raw (unstandardized) profile."""
    raw = _profile_values(model, profile)
    z = model.intercept
    for j in range(len(raw)):
        z += model.weights[j] * (raw[j] - model.means[j]) / model.sds[j]
    return 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))


def features_from_profiles(
    profiles: Sequence[PatientProfile], feature_names: Sequence[str]
) -> np.ndarray:
    rows = []
    for p in profiles:
        row = []
        for name in feature_names:
            if name not in p.variables:
                raise MissingFeature(
                    f"profile {p.patient_id!r} is missing feature {name!r}"
                )
            row.append(float(p.variables[name]))
        rows.append(row)
    return np.asarray(rows, dtype=float)


def apply_to_cohort(
    model: LogisticModel,
    profiles: Sequence[PatientProfile],
    outcomes: PredictionSet,
) -> PredictionSet:
    """Score every profile with the model, keeping the cohort's labels."""
    labels = {r.patient_id: r.label for r in outcomes}
    records = [
        PredictionRecord(
            patient_id=p.patient_id,
            score=predict(model, p),
            label=labels[p.patient_id],
        )
        for p in profiles
    ]
    return PredictionSet(records)


def import_scores(source: str | IO[str]) -> PredictionSet:
    """Parse a prediction CSV (header patient_id,score,label).

    Violations are reported with their line number; duplicate patient ids
    are rejected.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise InvalidData("prediction CSV is empty")
    if [h.strip() for h in header] != ["patient_id", "score", "label"]:
        raise InvalidData(
            f"expected header patient_id,score,label, got {','.join(header)!r}"
        )
    records = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise InvalidData(f"line {lineno}: expected 3 fields, got {len(row)}")
        pid, score_text, label_text = (f.strip() for f in row)
        try:
            score = float(score_text)
        except ValueError:
            raise InvalidData(f"line {lineno}: score {score_text!r} is not a number")
        if not 0.0 <= score <= 1.0:
            raise RangeError(f"line {lineno}: score {score} outside [0, 1]")
        if label_text not in ("0", "1"):
            raise InvalidData(f"line {lineno}: label {label_text!r} must be 0 or 1")
        if pid in seen:
            raise DuplicateId(f"line {lineno}: duplicate patient_id {pid!r}")
        seen.add(pid)
        records.append(PredictionRecord(pid, score, int(label_text)))
    return PredictionSet(records)
