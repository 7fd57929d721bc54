import numpy as np
import pytest

from carecost.costcurves import (
    CostMatrixWarning,
    cip_curve_to_csv,
    dca_curve,
    dca_curve_to_csv,
    example_cost_matrix,
    patient_expected_cost,
    population_cip,
    risk_band,
    validate_cost_matrix,
    zero_cost_matrix,
)
from carecost.errors import IncompleteMatrix, InvalidConfig, RangeError
from carecost.metrics import PredictionSet, confusion_at, default_grid


class TestValidateCostMatrix:
    def test_homecare_document_accepted(self):
        m = validate_cost_matrix(example_cost_matrix().to_document())
        assert m[("treatment", "TP", "qol")] == -1.0
        assert m[("error", "FN", "healthcare")] == 1.0

    def test_all_zero_accepted_without_warning(self, recwarn):
        validate_cost_matrix(zero_cost_matrix().to_document())
        assert not [w for w in recwarn.list if w.category is CostMatrixWarning]

    def test_nonzero_error_on_correct_scenario_warns(self):
        doc = example_cost_matrix().to_document()
        doc["error"]["TP"]["qol"] = 0.2
        with pytest.warns(CostMatrixWarning):
            validate_cost_matrix(doc)

    def test_missing_cell_rejected(self):
        doc = example_cost_matrix().to_document()
        del doc["error"]["FN"]["qol"]
        with pytest.raises(IncompleteMatrix):
            validate_cost_matrix(doc)

    def test_out_of_range_cell_rejected(self):
        doc = example_cost_matrix().to_document()
        doc["treatment"]["TP"]["qol"] = -1.5
        with pytest.raises(RangeError):
            validate_cost_matrix(doc)


class TestPopulationCip:
    def test_treat_all_closed_form(self, prevalence_022_set, homecare_matrix):
        curve = population_cip(prevalence_022_set, homecare_matrix)
        assert curve.grid[0] == 0.0
        assert curve.treatment_qol[0] == pytest.approx(-1.0, abs=1e-12)
        assert curve.treatment_hc[0] == pytest.approx(-0.5, abs=1e-12)
        assert curve.error_qol[0] == pytest.approx(0.39, abs=1e-12)
        assert curve.error_hc[0] == pytest.approx(0.195, abs=1e-12)
        assert curve.net[0] == pytest.approx(-0.915, abs=1e-12)

    def test_treat_none_closed_form(self, prevalence_022_set, homecare_matrix):
        curve = population_cip(prevalence_022_set, homecare_matrix)
        assert curve.grid[-1] == 1.0
        assert curve.treatment_qol[-1] == 0.0
        assert curve.treatment_hc[-1] == 0.0
        assert curve.error_qol[-1] == pytest.approx(0.22, abs=1e-12)
        assert curve.error_hc[-1] == pytest.approx(0.22, abs=1e-12)
        assert curve.net[-1] == pytest.approx(0.44, abs=1e-12)

    def test_zero_matrix_flat(self, prevalence_022_set):
        curve = population_cip(prevalence_022_set, zero_cost_matrix())
        assert all(v == 0.0 for v in curve.net)
        assert all(v == 0.0 for v in curve.treatment_qol)

    def test_net_is_exact_component_sum(self, prevalence_022_set, homecare_matrix):
        curve = population_cip(prevalence_022_set, homecare_matrix)
        for i in range(len(curve.grid)):
            total = sum(curve.components_at(i).values())
            assert curve.net[i] == total

    def test_scaling_matrix_scales_curve_and_keeps_argmin(
        self, prevalence_022_set, homecare_matrix
    ):
        lam = 0.37
        base = population_cip(prevalence_022_set, homecare_matrix)
        scaled = population_cip(prevalence_022_set, homecare_matrix.scaled(lam))
        for i in range(len(base.grid)):
            assert scaled.net[i] == pytest.approx(lam * base.net[i], abs=1e-12)
            assert scaled.error_qol[i] == pytest.approx(
                lam * base.error_qol[i], abs=1e-12
            )
        assert int(np.argmin(scaled.net)) == int(np.argmin(base.net))

    def test_error_only_matrix_tracks_misclassification_rate(
        self, prevalence_022_set
    ):
        doc = zero_cost_matrix().to_document()
        doc["error"]["FP"] = {"qol": 0.5, "healthcare": 0.5}
        doc["error"]["FN"] = {"qol": 0.5, "healthcare": 0.5}
        matrix = validate_cost_matrix(doc)
        curve = population_cip(prevalence_022_set, matrix)
        n = len(prevalence_022_set)
        misclass = [
            (lambda c: (c.fp + c.fn) / n)(confusion_at(prevalence_022_set, t))
            for t in curve.grid
        ]
        corr = np.corrcoef(curve.net, misclass)[0, 1]
        assert corr == pytest.approx(1.0, abs=1e-12)

    def test_record_order_is_irrelevant(self, homecare_matrix):
        scores = [0.9, 0.1, 0.6, 0.3, 0.5]
        labels = [1, 0, 0, 1, 0]
        forward = PredictionSet.from_arrays(scores, labels)
        backward = PredictionSet.from_arrays(scores[::-1], labels[::-1])
        a = population_cip(forward, homecare_matrix)
        b = population_cip(backward, homecare_matrix)
        assert a == b


class TestDcaCurve:
    def test_perfect_classifier_at_half(self):
        preds = PredictionSet.from_arrays([0.9, 0.9, 0.1, 0.1], [1, 1, 0, 0])
        curve = dca_curve(preds, [0.5])
        assert curve.model_nb[0] == pytest.approx(0.5, abs=1e-12)

    def test_treat_all_closed_form(self, prevalence_022_set):
        curve = dca_curve(prevalence_022_set, [0.25])
        assert curve.treat_all_nb[0] == pytest.approx(-0.04, abs=1e-12)

    def test_threshold_zero_equals_prevalence(self, prevalence_022_set):
        curve = dca_curve(prevalence_022_set, [0.0])
        assert curve.model_nb[0] == pytest.approx(0.22, abs=1e-12)
        assert curve.treat_all_nb[0] == pytest.approx(0.22, abs=1e-12)

    def test_treat_none_is_zero(self, prevalence_022_set):
        curve = dca_curve(prevalence_022_set)
        assert set(curve.treat_none_nb) == {0.0}

    def test_threshold_one_rejected(self, prevalence_022_set):
        with pytest.raises(InvalidConfig):
            dca_curve(prevalence_022_set, [0.5, 1.0])

    def test_model_nb_matches_confusion_recount(self, prevalence_022_set):
        curve = dca_curve(prevalence_022_set)
        n = len(prevalence_022_set)
        for p, nb in zip(curve.grid, curve.model_nb):
            c = confusion_at(prevalence_022_set, p)
            assert nb == c.tp / n - (c.fp / n) * (p / (1 - p))


class TestRiskBand:
    @pytest.fixture
    def curve(self, prevalence_022_set, homecare_matrix):
        return population_cip(prevalence_022_set, homecare_matrix)

    def test_band_width_on_default_grid(self, curve):
        band = risk_band(curve, s=0.5, delta=0.05)
        assert len(band.slice.grid) == 11
        assert band.slice.grid[0] == 0.45 and band.slice.grid[-1] == 0.55

    def test_clamped_at_lower_boundary(self, curve):
        band = risk_band(curve, s=0.0, delta=0.1)
        assert band.slice.grid[0] == 0.0
        assert band.slice.grid[-1] == pytest.approx(0.1)

    def test_tiny_delta_keeps_nearest_point(self, curve):
        band = risk_band(curve, s=0.503, delta=0.001)
        assert band.slice.grid == (0.5,)

    def test_slice_values_come_from_parent(self, curve):
        band = risk_band(curve, s=0.3, delta=0.02)
        for t, net in zip(band.slice.grid, band.slice.net):
            assert net == curve.net[curve.grid.index(t)]


class TestPatientExpectedCost:
    def test_predicted_positive_cells(self, homecare_matrix):
        cells = patient_expected_cost(0.8, 0.25, homecare_matrix)
        assert cells[("treatment", "qol")] == pytest.approx(-1.0)
        assert cells[("treatment", "healthcare")] == pytest.approx(-0.5)
        assert cells[("error", "qol")] == pytest.approx(0.1)
        assert cells[("error", "healthcare")] == pytest.approx(0.05)
        qol_total = cells[("treatment", "qol")] + cells[("error", "qol")]
        hc_total = cells[("treatment", "healthcare")] + cells[("error", "healthcare")]
        assert qol_total == pytest.approx(-0.9)
        assert hc_total == pytest.approx(-0.45)

    def test_predicted_negative_weights_miss_risk(self, homecare_matrix):
        cells = patient_expected_cost(0.1, 0.25, homecare_matrix)
        assert cells[("treatment", "qol")] == 0.0
        assert cells[("error", "qol")] == pytest.approx(0.1)
        assert cells[("error", "healthcare")] == pytest.approx(0.1)

    def test_zero_score_negative_prediction_is_free(self, homecare_matrix):
        cells = patient_expected_cost(0.0, 0.25, homecare_matrix)
        assert all(v == 0.0 for v in cells.values())


class TestCsvExport:
    def test_cip_csv_header_and_rows(self, prevalence_022_set, homecare_matrix):
        curve = population_cip(prevalence_022_set, homecare_matrix)
        text = cip_curve_to_csv(curve)
        lines = text.strip().split("\n")
        assert lines[0] == "threshold,treatment_qol,treatment_hc,error_qol,error_hc,net"
        assert len(lines) == 1 + len(default_grid())
        last = lines[-1].split(",")
        assert float(last[0]) == 1.0
        assert float(last[-1]) == pytest.approx(0.44, abs=1e-12)

    def test_dca_csv_header(self, prevalence_022_set):
        text = dca_curve_to_csv(dca_curve(prevalence_022_set))
        assert text.startswith("p_t,model_nb,treat_all_nb,treat_none_nb\n")
