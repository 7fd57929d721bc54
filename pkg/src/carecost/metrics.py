"""Threshold-based confusion analysis, discrimination and calibration curves,
F1 threshold sweeps, and bootstrap confidence intervals.

All operations are pure functions over immutable inputs. The decision rule
everywhere is ``score >= t`` means predicted positive, so ``t = 0`` is the
treat-all policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    DegenerateLabels,
    DuplicateId,
    EmptyInput,
    InvalidConfig,
    InvalidData,
    RangeError,
)

__all__ = [
    "PredictionRecord",
    "PredictionSet",
    "ConfusionCounts",
    "CurvePoint",
    "CalibrationBin",
    "BootstrapEstimate",
    "LocalPerformance",
    "confusion_at",
    "auroc",
    "auprc",
    "brier",
    "roc_curve",
    "pr_curve",
    "calibration",
    "f1_sweep",
    "best_threshold",
    "bootstrap",
    "local_performance",
    "default_grid",
]

# Tolerance used when assigning scores to equal-width bins, so that a score
# written as e.g. 0.3 lands in the bin whose lower edge is 0.3 despite the
# binary representation falling a hair below it.
_BIN_EPS = 1e-9


def default_grid() -> list[float]:
    """101 thresholds from 0.00 to 1.00 in steps of 0.01."""
    return [i / 100 for i in range(101)]


@dataclass(frozen=True)
class PredictionRecord:
    """One patient's risk score and observed binary outcome."""

    patient_id: str
    score: float
    label: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.score):
            raise InvalidData(f"score for {self.patient_id!r} is not finite")
        if not 0.0 <= self.score <= 1.0:
            raise RangeError(
                f"score {self.score} for {self.patient_id!r} outside [0, 1]"
            )
        if self.label not in (0, 1):
            raise InvalidData(
                f"label {self.label!r} for {self.patient_id!r} must be 0 or 1"
            )


class PredictionSet:
    """Immutable, non-empty collection of predictions with unique patient ids."""

    def __init__(self, records: Iterable[PredictionRecord]):
        records = tuple(records)
        if not records:
            raise EmptyInput("prediction set is empty")
        seen: set[str] = set()
        for rec in records:
            if rec.patient_id in seen:
                raise DuplicateId(f"duplicate patient_id {rec.patient_id!r}")
            seen.add(rec.patient_id)
        self._records = records
        self._scores = np.array([r.score for r in records], dtype=float)
        self._labels = np.array([r.label for r in records], dtype=int)

    @classmethod
    def from_arrays(
        cls,
        scores: Sequence[float],
        labels: Sequence[int],
        patient_ids: Sequence[str] | None = None,
    ) -> "PredictionSet":
        if patient_ids is None:
            patient_ids = [f"p{i:05d}" for i in range(len(list(scores)))]
        return cls(
            PredictionRecord(pid, float(s), int(y))
            for pid, s, y in zip(patient_ids, scores, labels)
        )

    @property
    def records(self) -> tuple[PredictionRecord, ...]:
        return self._records

    @property
    def scores(self) -> np.ndarray:
        return self._scores

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def prevalence(self) -> float:
        return float(self._labels.sum()) / len(self._records)

    def score_of(self, patient_id: str) -> float:
        for rec in self._records:
            if rec.patient_id == patient_id:
                return rec.score
        raise KeyError(patient_id)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[PredictionRecord]:
        return iter(self._records)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def precision(self) -> float:
        """tp / predicted positives, 0.0 when nothing is predicted positive."""
        denom = self.tp + self.fp
        return self.tp / denom if denom else 0.0

    def recall(self) -> float:
        denom = self.tp + self.fn
        return self.tp / denom if denom else 0.0

    def f1(self) -> float:
        """2*tp / (2*tp + fp + fn), defined as 0 when the denominator is 0."""
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 0.0


@dataclass(frozen=True)
class CurvePoint:
    x: float
    y: float
    threshold: float


@dataclass(frozen=True)
class CalibrationBin:
    """Equal-width score bin; mean_score/observed_rate are None when empty."""

    lo: float
    hi: float
    mean_score: float | None
    observed_rate: float | None
    count: int


@dataclass(frozen=True)
class BootstrapEstimate:
    point: float
    ci_lo: float
    ci_hi: float
    n_resamples: int
    seed: int


@dataclass(frozen=True)
class LocalPerformance:
    """Classifier behaviour at and around one operating point."""

    center: float
    window: float
    counts: ConfusionCounts
    precision: float
    recall: float
    f1: float
    score_density: float
    window_count: int
    window_positive_rate: float | None


def confusion_at(preds: PredictionSet, t: float) -> ConfusionCounts:
    """Confusion counts with the rule score >= t => predicted positive."""
    if not 0.0 <= t <= 1.0:
        raise InvalidConfig(f"threshold {t} outside [0, 1]")
    predicted = preds.scores >= t
    actual = preds.labels == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    tn = int(np.sum(~predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn, threshold=float(t))


def _require_both_classes(labels: np.ndarray) -> None:
    pos = int(labels.sum())
    if pos == 0 or pos == len(labels):
        raise DegenerateLabels("need at least one positive and one negative label")


def _auroc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Concordance probability via average ranks; ties count one half."""
    n = len(scores)
    pos = int(labels.sum())
    neg = n - pos
    order = np.argsort(scores, kind="mergesort")
    s_sorted = scores[order]
    group_starts = np.concatenate(([0], np.flatnonzero(np.diff(s_sorted)) + 1))
    group_ends = np.concatenate((group_starts[1:], [n]))
    avg_rank = (group_starts + group_ends + 1) / 2.0  # 1-based
    ranks_sorted = np.repeat(avg_rank, group_ends - group_starts)
    ranks = np.empty(n, dtype=float)
    ranks[order] = ranks_sorted
    u = float(ranks[labels == 1].sum()) - pos * (pos + 1) / 2.0
    return u / (pos * neg)


def auroc(preds: PredictionSet) -> float:
    """Area under the ROC curve (probability a positive outranks a negative)."""
    _require_both_classes(preds.labels)
    return _auroc(preds.scores, preds.labels)


def _descending_groups(
    scores: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cumulative tp / predicted-positive counts at each unique score,
    descending. Returns (thresholds, cum_tp, cum_predicted)."""
    order = np.argsort(-scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    n = len(s)
    cum_tp = np.cumsum(y)
    group_last = np.concatenate((np.flatnonzero(np.diff(s)), [n - 1]))
    return s[group_last], cum_tp[group_last], group_last + 1


def _auprc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Average precision: recall-weighted mean of precision over thresholds."""
    pos = int(labels.sum())
    _thr, cum_tp, cum_pred = _descending_groups(scores, labels)
    precision = cum_tp / cum_pred
    recall = cum_tp / pos
    recall_prev = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - recall_prev) * precision))


def auprc(preds: PredictionSet) -> float:
    """Average precision (no interpolation); needs at least one positive."""
    if int(preds.labels.sum()) == 0:
        raise DegenerateLabels("average precision needs at least one positive label")
    return _auprc(preds.scores, preds.labels)


def _brier(scores: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean((scores - labels) ** 2))


def brier(preds: PredictionSet) -> float:
    """Mean squared difference between score and outcome."""
    return _brier(preds.scores, preds.labels)


def roc_curve(preds: PredictionSet) -> list[CurvePoint]:
    """ROC points (x=FPR, y=TPR), one per unique score plus a (0, 0) anchor.

    The trapezoidal area under the returned polyline equals auroc.
    """
    _require_both_classes(preds.labels)
    pos = int(preds.labels.sum())
    neg = len(preds) - pos
    thresholds, cum_tp, cum_pred = _descending_groups(preds.scores, preds.labels)
    points = [CurvePoint(x=0.0, y=0.0, threshold=1.0)]
    for t, tp, npred in zip(thresholds, cum_tp, cum_pred):
        fp = npred - tp
        points.append(
            CurvePoint(x=float(fp / neg), y=float(tp / pos), threshold=float(t))
        )
    return points


def pr_curve(preds: PredictionSet) -> list[CurvePoint]:
    """Precision-recall points (x=recall, y=precision) per unique score."""
    if int(preds.labels.sum()) == 0:
        raise DegenerateLabels("precision-recall curve needs a positive label")
    pos = int(preds.labels.sum())
    thresholds, cum_tp, cum_pred = _descending_groups(preds.scores, preds.labels)
    points = [CurvePoint(x=0.0, y=1.0, threshold=1.0)]
    for t, tp, npred in zip(thresholds, cum_tp, cum_pred):
        points.append(
            CurvePoint(x=float(tp / pos), y=float(tp / npred), threshold=float(t))
        )
    return points


def calibration(preds: PredictionSet, n_bins: int = 10) -> list[CalibrationBin]:
    """Equal-width calibration bins partitioning [0, 1].

    Bins are half-open [lo, hi) except the last, which includes 1.0. Empty
    bins are retained with count 0 and absent rates.
    """
    if n_bins < 2:
        raise InvalidConfig(f"n_bins must be >= 2, got {n_bins}")
    idx = np.minimum(
        (preds.scores * n_bins + _BIN_EPS).astype(int), n_bins - 1
    )
    bins = []
    for b in range(n_bins):
        mask = idx == b
        count = int(mask.sum())
        if count:
            mean_score = float(preds.scores[mask].mean())
            observed = float(preds.labels[mask].mean())
        else:
            mean_score = None
            observed = None
        bins.append(
            CalibrationBin(
                lo=b / n_bins,
                hi=(b + 1) / n_bins,
                mean_score=mean_score,
                observed_rate=observed,
                count=count,
            )
        )
    return bins


def _validate_grid(grid: Sequence[float]) -> list[float]:
    grid = list(grid)
    if not grid:
        raise InvalidConfig("threshold grid is empty")
    for t in grid:
        if not 0.0 <= t <= 1.0:
            raise InvalidConfig(f"grid threshold {t} outside [0, 1]")
    return grid


def f1_sweep(preds: PredictionSet, grid: Sequence[float]) -> list[tuple[float, float]]:
    """F1 at each grid threshold, in the order given."""
    grid = _validate_grid(grid)
    return [(float(t), confusion_at(preds, t).f1()) for t in grid]


def best_threshold(preds: PredictionSet, grid: Sequence[float]) -> tuple[float, float]:
    """Grid threshold with maximal F1; ties resolve to the lowest threshold."""
    sweep = f1_sweep(preds, sorted(_validate_grid(grid)))
    best_t, best_f1 = sweep[0]
    for t, f1 in sweep[1:]:
        if f1 > best_f1:
            best_t, best_f1 = t, f1
    return best_t, best_f1


_METRIC_FNS: dict[str, Callable[[np.ndarray, np.ndarray], float]] = {
    "auroc": _auroc,
    "auprc": _auprc,
    "brier": _brier,
}


def _resolve_metric(name: str) -> Callable[[np.ndarray, np.ndarray], float]:
    if name in _METRIC_FNS:
        return _METRIC_FNS[name]
    if name.startswith("f1@"):
        try:
            t = float(name.split("@", 1)[1])
        except ValueError:
            raise InvalidConfig(f"bad f1 threshold in metric name {name!r}")
        if not 0.0 <= t <= 1.0:
            raise InvalidConfig(f"f1 threshold {t} outside [0, 1]")

        def f1_at(scores: np.ndarray, labels: np.ndarray) -> float:
            predicted = scores >= t
            tp = int(np.sum(predicted & (labels == 1)))
            fp = int(np.sum(predicted & (labels == 0)))
            fn = int(np.sum(~predicted & (labels == 1)))
            denom = 2 * tp + fp + fn
            return 2 * tp / denom if denom else 0.0

        return f1_at
    raise InvalidConfig(
        f"unknown metric {name!r}; expected auroc, auprc, brier or f1@<t>"
    )


def bootstrap(
    metric: str,
    preds: PredictionSet,
    n_resamples: int = 1000,
    seed: int = 0,
) -> BootstrapEstimate:
    """Percentile-method 95% CI for a named metric.

    Each resample draws N records with replacement using an RNG stream
    derived from (seed, resample index), so results are reproducible and
    resamples could be evaluated in parallel. Single-class resamples are
    redrawn up to 100 times before giving up.
    """
    if n_resamples < 1:
        raise InvalidConfig(f"n_resamples must be >= 1, got {n_resamples}")
    fn = _resolve_metric(metric)
    scores, labels = preds.scores, preds.labels
    n = len(preds)
    if not 0 < int(labels.sum()) < n:
        # every resample of a single-class set is single-class; fail fast
        raise DegenerateLabels("bootstrap needs both classes in the input set")
    point = fn(scores, labels)
    stats = np.empty(n_resamples, dtype=float)
    for i in range(n_resamples):
        rng = np.random.default_rng((seed, i))
        for _attempt in range(100):
            idx = rng.integers(0, n, size=n)
            resampled = labels[idx]
            if 0 < int(resampled.sum()) < n:
                break
        else:
            raise DegenerateLabels(
                f"resample {i} stayed single-class after 100 redraws"
            )
        stats[i] = fn(scores[idx], resampled)
    lo, hi = np.percentile(stats, [2.5, 97.5])
    return BootstrapEstimate(
        point=float(point),
        ci_lo=float(lo),
        ci_hi=float(hi),
        n_resamples=n_resamples,
        seed=seed,
    )


def local_performance(
    preds: PredictionSet, center: float, window: float
) -> LocalPerformance:
    """Confusion metrics at threshold=center plus score density around it.

    score_density is the fraction of records with |score - center| <= window;
    window_positive_rate is their observed outcome rate, None when the window
    is empty.
    """
    if not 0.0 <= center <= 1.0:
        raise InvalidConfig(f"center {center} outside [0, 1]")
    if window <= 0:
        raise InvalidConfig(f"window must be positive, got {window}")
    counts = confusion_at(preds, center)
    in_window = np.abs(preds.scores - center) <= window
    window_count = int(in_window.sum())
    positive_rate = (
        float(preds.labels[in_window].mean()) if window_count else None
    )
    return LocalPerformance(
        center=float(center),
        window=float(window),
        counts=counts,
        precision=counts.precision(),
        recall=counts.recall(),
        f1=counts.f1(),
        score_density=window_count / len(preds),
        window_count=window_count,
        window_positive_rate=positive_rate,
    )
