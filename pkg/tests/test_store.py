import json
from datetime import datetime, timezone

import pytest

from carecost.errors import CorruptEntity, InvalidConfig, NotFound
from carecost.store import (
    RunRecord,
    Store,
    prediction_set_from_doc,
    prediction_set_to_doc,
)


@pytest.fixture
def store(tmp_path):
    return Store(tmp_path / "store")


class TestPutGet:
    def test_round_trip(self, store, four_record_set):
        doc = prediction_set_to_doc(four_record_set)
        entity_id = store.put("predictions", doc)
        loaded = store.get("predictions", entity_id)
        assert loaded == doc
        assert prediction_set_from_doc(loaded).records == four_record_set.records

    def test_unknown_id_is_not_found(self, store):
        with pytest.raises(NotFound):
            store.get("cohorts", "missing")

    def test_unknown_kind_rejected(self, store):
        with pytest.raises(InvalidConfig):
            store.put("gadgets", {})

    def test_explicit_id_and_overwrite(self, store):
        store.put("matrices", {"v": 1}, entity_id="table")
        store.put("matrices", {"v": 2}, entity_id="table")
        assert store.get("matrices", "table") == {"v": 2}

    def test_tampered_payload_is_corrupt_not_missing(self, store):
        entity_id = store.put("cards", {"description": "model"})
        path = store.root / "cards" / f"{entity_id}.json"
        envelope = json.loads(path.read_text())
        envelope["payload"]["description"] = "model!"
        path.write_text(json.dumps(envelope))
        with pytest.raises(CorruptEntity):
            store.get("cards", entity_id)

    def test_unparseable_file_is_corrupt(self, store):
        entity_id = store.put("cards", {"description": "x"})
        path = store.root / "cards" / f"{entity_id}.json"
        path.write_text("{broken json")
        with pytest.raises(CorruptEntity):
            store.get("cards", entity_id)

    def test_listing_ordered_by_creation(self, store):
        first = store.put("cohorts", {"n": 1})
        second = store.put("cohorts", {"n": 2})
        third = store.put("cohorts", {"n": 3})
        assert [e["id"] for e in store.list("cohorts")] == [first, second, third]


class TestRunRecords:
    def _record(self, store, four_record_set) -> RunRecord:
        preds_id = store.put("predictions", prediction_set_to_doc(four_record_set))
        matrix_id = store.put("matrices", {"cells": "stub"})
        return RunRecord(
            run_id="run-1",
            created_at=datetime.now(timezone.utc).isoformat(),
            inputs={
                "predictions": store.input_ref("predictions", preds_id),
                "matrix": store.input_ref("matrices", matrix_id),
            },
            artifacts={"cip_csv": "threshold,net\n0.0,-0.5\n"},
            exchanges=[{"agent": "I", "response_text": "ok"}],
            call_order=["I"],
        )

    def test_round_trip_with_verification(self, store, four_record_set):
        record = self._record(store, four_record_set)
        store.put_run(record)
        loaded = store.get_run("run-1")
        assert loaded == record

    def test_changed_input_detected_on_load(self, store, four_record_set):
        record = self._record(store, four_record_set)
        store.put_run(record)
        preds_ref = record.inputs["predictions"]
        store.put("predictions", {"records": []}, entity_id=preds_ref["id"])
        with pytest.raises(CorruptEntity, match="predictions"):
            store.get_run("run-1")
        # verification can be skipped explicitly
        assert store.get_run("run-1", verify_inputs=False).run_id == "run-1"
