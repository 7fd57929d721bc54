import pytest

from carecost.costcurves import CostMatrix, example_cost_matrix
from carecost.metrics import PredictionSet


@pytest.fixture
def four_record_set() -> PredictionSet:
    """Hand-checkable fixture: scores [0.9, 0.8, 0.3, 0.2], labels [1, 0, 1, 0]."""
    return PredictionSet.from_arrays(
        scores=[0.9, 0.8, 0.3, 0.2],
        labels=[1, 0, 1, 0],
        patient_ids=["a", "b", "c", "d"],
    )


@pytest.fixture
def homecare_matrix() -> CostMatrix:
    """Built-in home-care example cost assignments."""
    return example_cost_matrix()


@pytest.fixture
def prevalence_022_set() -> PredictionSet:
    """100 records, 22 positives, scores strictly inside (0, 1)."""
    scores = [0.5 + 0.004 * i for i in range(22)] + [0.1 + 0.004 * i for i in range(78)]
    labels = [1] * 22 + [0] * 78
    return PredictionSet.from_arrays(scores, labels)
