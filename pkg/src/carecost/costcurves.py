"""Cost matrices and expected-cost analysis across decision thresholds.

The central object is the CIP (cost-impact of predictions) curve: for every
threshold the four outcome scenarios (TP/FP/TN/FN) are weighted by a cost
matrix and aggregated per capita into four stacked components, one per
(cost type x dimension). Sign convention: negative values are benefits,
plotted below the zero-cost baseline; positive values are costs above it.
The net effect at a threshold is the exact sum of the four components.

Also provides decision-curve analysis (net benefit against treat-all and
treat-none policies), threshold bands around a patient's score, and the
patient-level expected-cost decomposition.
"""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import IncompleteMatrix, InvalidConfig, RangeError
from .metrics import PredictionSet, default_grid

__all__ = [
    "COST_TYPES",
    "SCENARIOS",
    "DIMENSIONS",
    "CostMatrix",
    "CostMatrixWarning",
    "CipCurve",
    "DcaCurve",
    "RiskBand",
    "validate_cost_matrix",
    "example_cost_matrix",
    "zero_cost_matrix",
    "population_cip",
    "dca_curve",
    "risk_band",
    "patient_expected_cost",
    "cip_curve_to_csv",
    "dca_curve_to_csv",
]

COST_TYPES = ("treatment", "error")
SCENARIOS = ("TP", "FP", "TN", "FN")
DIMENSIONS = ("qol", "healthcare")

_BAND_EPS = 1e-9


class CostMatrixWarning(UserWarning):
    """Raised (as a warning) for legal but suspicious cost assignments."""


@dataclass(frozen=True)
class CostMatrix:
    """16 coefficients in [-1, 1], keyed by (cost type, scenario, dimension)."""

    entries: Mapping[tuple[str, str, str], float]

    def __getitem__(self, key: tuple[str, str, str]) -> float:
        return self.entries[key]

    def scaled(self, factor: float) -> "CostMatrix":
        return CostMatrix(
            {k: v * factor for k, v in self.entries.items()}
        )

    def to_document(self) -> dict:
        """Nested JSON form: {type: {scenario: {dimension: value}}}."""
        return {
            kind: {
                sc: {dim: self.entries[(kind, sc, dim)] for dim in DIMENSIONS}
                for sc in SCENARIOS
            }
            for kind in COST_TYPES
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2)


def validate_cost_matrix(raw: Mapping | CostMatrix) -> CostMatrix:
    """Normalize a cost-matrix document into a CostMatrix.

    All 16 cells must be present and within [-1, 1]. A nonzero error cost on
    a correct scenario (TP or TN) is accepted but triggers a
    CostMatrixWarning, since users may deliberately redefine it.
    """
    if isinstance(raw, CostMatrix):
        doc = raw.to_document()
    else:
        doc = raw
    entries: dict[tuple[str, str, str], float] = {}
    for kind in COST_TYPES:
        for sc in SCENARIOS:
            for dim in DIMENSIONS:
                try:
                    value = doc[kind][sc][dim]
                except (KeyError, TypeError):
                    raise IncompleteMatrix(
                        f"cost matrix missing cell ({kind}, {sc}, {dim})"
                    )
                value = float(value)
                if not -1.0 <= value <= 1.0:
                    raise RangeError(
                        f"cost ({kind}, {sc}, {dim}) = {value} outside [-1, 1]"
                    )
                entries[(kind, sc, dim)] = value
    for sc in ("TP", "TN"):
        for dim in DIMENSIONS:
            if entries[("error", sc, dim)] != 0.0:
                warnings.warn(
                    f"nonzero error cost on correct scenario ({sc}, {dim})",
                    CostMatrixWarning,
                    stacklevel=2,
                )
    return CostMatrix(entries=entries)


def example_cost_matrix() -> CostMatrix:
    """Built-in home-care example: enrolment benefits QoL and frees hospital
    resources; a missed high-risk patient carries the highest penalties."""
    doc = {
        "treatment": {
            "TP": {"qol": -1.0, "healthcare": -0.5},
            "FP": {"qol": -1.0, "healthcare": -0.5},
            "TN": {"qol": 0.0, "healthcare": 0.0},
            "FN": {"qol": 0.0, "healthcare": 0.0},
        },
        "error": {
            "TP": {"qol": 0.0, "healthcare": 0.0},
            "FP": {"qol": 0.5, "healthcare": 0.25},
            "TN": {"qol": 0.0, "healthcare": 0.0},
            "FN": {"qol": 1.0, "healthcare": 1.0},
        },
    }
    return validate_cost_matrix(doc)


def zero_cost_matrix() -> CostMatrix:
    return CostMatrix(
        {
            (kind, sc, dim): 0.0
            for kind in COST_TYPES
            for sc in SCENARIOS
            for dim in DIMENSIONS
        }
    )


@dataclass(frozen=True)
class CipCurve:
    """Per-threshold stacked cost components and their net effect.

    Component lists run parallel to ``grid``; ``net[i]`` is exactly the sum
    of the four component values at ``grid[i]``.
    """

    grid: tuple[float, ...]
    treatment_qol: tuple[float, ...]
    treatment_hc: tuple[float, ...]
    error_qol: tuple[float, ...]
    error_hc: tuple[float, ...]
    net: tuple[float, ...]

    def components_at(self, i: int) -> dict[str, float]:
        return {
            "treatment_qol": self.treatment_qol[i],
            "treatment_hc": self.treatment_hc[i],
            "error_qol": self.error_qol[i],
            "error_hc": self.error_hc[i],
        }

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "treatment_qol": list(self.treatment_qol),
            "treatment_hc": list(self.treatment_hc),
            "error_qol": list(self.error_qol),
            "error_hc": list(self.error_hc),
            "net": list(self.net),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "CipCurve":
        return cls(
            grid=tuple(doc["grid"]),
            treatment_qol=tuple(doc["treatment_qol"]),
            treatment_hc=tuple(doc["treatment_hc"]),
            error_qol=tuple(doc["error_qol"]),
            error_hc=tuple(doc["error_hc"]),
            net=tuple(doc["net"]),
        )


@dataclass(frozen=True)
class DcaCurve:
    """Net benefit of model-guided decisions vs treat-all and treat-none."""

    grid: tuple[float, ...]
    model_nb: tuple[float, ...]
    treat_all_nb: tuple[float, ...]
    treat_none_nb: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "model_nb": list(self.model_nb),
            "treat_all_nb": list(self.treat_all_nb),
            "treat_none_nb": list(self.treat_none_nb),
        }


@dataclass(frozen=True)
class RiskBand:
    """Slice of a CipCurve around one patient's predicted score."""

    center: float
    delta: float
    slice: CipCurve = field(repr=False)


def _checked_grid(grid: Sequence[float] | None, upper_open: bool = False) -> list[float]:
    if grid is None:
        grid = default_grid()
        if upper_open:
            grid = grid[:-1]
    grid = [float(t) for t in grid]
    if not grid:
        raise InvalidConfig("threshold grid is empty")
    top = "1" if upper_open else "1 inclusive"
    for t in grid:
        if t < 0.0 or t > 1.0 or (upper_open and t >= 1.0):
            raise InvalidConfig(f"grid threshold {t} outside [0, {top})")
    return grid


def _scenario_fractions(
    preds: PredictionSet, grid: Sequence[float]
) -> dict[str, np.ndarray]:
    """Per-threshold fractions of TP/FP/TN/FN over the whole population."""
    n = len(preds)
    pos_sorted = np.sort(preds.scores[preds.labels == 1])
    neg_sorted = np.sort(preds.scores[preds.labels == 0])
    grid_arr = np.asarray(grid, dtype=float)
    tp = len(pos_sorted) - np.searchsorted(pos_sorted, grid_arr, side="left")
    fp = len(neg_sorted) - np.searchsorted(neg_sorted, grid_arr, side="left")
    fn = len(pos_sorted) - tp
    tn = len(neg_sorted) - fp
    return {"TP": tp / n, "FP": fp / n, "TN": tn / n, "FN": fn / n}


def population_cip(
    preds: PredictionSet,
    matrix: CostMatrix,
    grid: Sequence[float] | None = None,
) -> CipCurve:
    """Expected per-capita cost components across a threshold grid.

    For each threshold t, component (type k, dimension d) is
    sum over scenarios of matrix[k, scenario, d] * scenario_count(t) / N.
    """
    grid = _checked_grid(grid)
    frac = _scenario_fractions(preds, grid)
    comp: dict[tuple[str, str], np.ndarray] = {}
    for kind in COST_TYPES:
        for dim in DIMENSIONS:
            acc = np.zeros(len(grid))
            for sc in SCENARIOS:
                acc = acc + matrix[(kind, sc, dim)] * frac[sc]
            comp[(kind, dim)] = acc
    t_qol = comp[("treatment", "qol")]
    t_hc = comp[("treatment", "healthcare")]
    e_qol = comp[("error", "qol")]
    e_hc = comp[("error", "healthcare")]
    net = tuple(
        float(t_qol[i] + t_hc[i] + e_qol[i] + e_hc[i]) for i in range(len(grid))
    )
    return CipCurve(
        grid=tuple(grid),
        treatment_qol=tuple(float(v) for v in t_qol),
        treatment_hc=tuple(float(v) for v in t_hc),
        error_qol=tuple(float(v) for v in e_qol),
        error_hc=tuple(float(v) for v in e_hc),
        net=net,
    )


def dca_curve(
    preds: PredictionSet, grid: Sequence[float] | None = None
) -> DcaCurve:
    """Net benefit NB = TP/N - (FP/N) * p/(1-p) at each threshold probability.

    Thresholds must be strictly below 1. Treat-all uses the same formula with
    every record predicted positive; treat-none is identically zero.
    """
    grid = _checked_grid(grid, upper_open=True)
    frac = _scenario_fractions(preds, grid)
    prevalence = preds.prevalence
    model_nb = []
    treat_all_nb = []
    for i, p in enumerate(grid):
        odds = p / (1.0 - p)
        model_nb.append(float(frac["TP"][i] - frac["FP"][i] * odds))
        treat_all_nb.append(float(prevalence - (1.0 - prevalence) * odds))
    return DcaCurve(
        grid=tuple(grid),
        model_nb=tuple(model_nb),
        treat_all_nb=tuple(treat_all_nb),
        treat_none_nb=tuple(0.0 for _ in grid),
    )


def risk_band(curve: CipCurve, s: float, delta: float = 0.05) -> RiskBand:
    """Restrict a curve to thresholds within [s - delta, s + delta].

    The band is clamped to [0, 1]; if no grid point falls inside (delta
    smaller than the grid step), the single nearest grid point is kept.
    """
    if not 0.0 <= s <= 1.0:
        raise InvalidConfig(f"score {s} outside [0, 1]")
    if delta <= 0:
        raise InvalidConfig(f"delta must be positive, got {delta}")
    lo = max(0.0, s - delta)
    hi = min(1.0, s + delta)
    keep = [
        i
        for i, t in enumerate(curve.grid)
        if lo - _BAND_EPS <= t <= hi + _BAND_EPS
    ]
    if not keep:
        nearest = min(range(len(curve.grid)), key=lambda i: abs(curve.grid[i] - s))
        keep = [nearest]
    pick = lambda xs: tuple(xs[i] for i in keep)
    return RiskBand(
        center=float(s),
        delta=float(delta),
        slice=CipCurve(
            grid=pick(curve.grid),
            treatment_qol=pick(curve.treatment_qol),
            treatment_hc=pick(curve.treatment_hc),
            error_qol=pick(curve.error_qol),
            error_hc=pick(curve.error_hc),
            net=pick(curve.net),
        ),
    )


def _scenario(predicted_positive: bool, actual_positive: bool) -> str:
    if predicted_positive:
        return "TP" if actual_positive else "FP"
    return "FN" if actual_positive else "TN"


def patient_expected_cost(
    s: float, t: float, matrix: CostMatrix
) -> dict[tuple[str, str], float]:
    """Expected cost cells for one patient, treating s as outcome probability.

    The predicted class is fixed by s >= t; the true outcome is weighted by
    s (event) and 1 - s (no event). Returns the four (type, dimension) cells.
    """
    if not 0.0 <= s <= 1.0:
        raise InvalidConfig(f"score {s} outside [0, 1]")
    if not 0.0 <= t <= 1.0:
        raise InvalidConfig(f"threshold {t} outside [0, 1]")
    predicted = s >= t
    sc_event = _scenario(predicted, True)
    sc_no_event = _scenario(predicted, False)
    return {
        (kind, dim): s * matrix[(kind, sc_event, dim)]
        + (1.0 - s) * matrix[(kind, sc_no_event, dim)]
        for kind in COST_TYPES
        for dim in DIMENSIONS
    }


def cip_curve_to_csv(curve: CipCurve) -> str:
    buf = io.StringIO()
    buf.write("threshold,treatment_qol,treatment_hc,error_qol,error_hc,net\n")
    for i, t in enumerate(curve.grid):
        buf.write(
            f"{t},{curve.treatment_qol[i]},{curve.treatment_hc[i]},"
            f"{curve.error_qol[i]},{curve.error_hc[i]},{curve.net[i]}\n"
        )
    return buf.getvalue()


def dca_curve_to_csv(curve: DcaCurve) -> str:
    buf = io.StringIO()
    buf.write("p_t,model_nb,treat_all_nb,treat_none_nb\n")
    for i, p in enumerate(curve.grid):
        buf.write(
            f"{p},{curve.model_nb[i]},{curve.treat_all_nb[i]},"
            f"{curve.treat_none_nb[i]}\n"
        )
    return buf.getvalue()
