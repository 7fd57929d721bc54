"""Plain-directory persistence with content hashing.

Every entity is one JSON envelope file under <root>/<kind>/<id>.json holding
the payload plus a sha256 over its canonical JSON form. Reads verify the
hash, so tampering is distinguished from absence. Writes take an advisory
lock on the store and land via atomic rename; readers never block.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .errors import CorruptEntity, InvalidConfig, NotFound
from .metrics import PredictionRecord, PredictionSet

__all__ = [
    "Store",
    "RunRecord",
    "ENTITY_KINDS",
    "prediction_set_to_doc",
    "prediction_set_from_doc",
]

ENTITY_KINDS = (
    "cohorts",
    "predictions",
    "matrices",
    "cards",
    "models",
    "curves",
    "runs",
)


def _canonical(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def _digest(payload) -> str:
    return hashlib.sha256(_canonical(payload)).hexdigest()


def prediction_set_to_doc(preds: PredictionSet) -> dict:
    return {
        "records": [
            {"patient_id": r.patient_id, "score": r.score, "label": r.label}
            for r in preds
        ]
    }


def prediction_set_from_doc(doc: Mapping) -> PredictionSet:
    return PredictionSet(
        PredictionRecord(r["patient_id"], float(r["score"]), int(r["label"]))
        for r in doc["records"]
    )


@dataclass(frozen=True)
class RunRecord:
    """One agent-pipeline run: input hashes, curve artifacts, transcripts."""

    run_id: str
    created_at: str
    inputs: Mapping[str, Mapping[str, str]]  # name -> {kind, id, sha256}
    artifacts: Mapping[str, str] = field(default_factory=dict)
    exchanges: Sequence[Mapping] = field(default_factory=list)
    failures: Sequence[Mapping] = field(default_factory=list)
    call_order: Sequence[str] = field(default_factory=list)

    def to_doc(self) -> dict:
        return {
            "run_id": self.run_id,
            "created_at": self.created_at,
            "inputs": {k: dict(v) for k, v in self.inputs.items()},
            "artifacts": dict(self.artifacts),
            "exchanges": list(self.exchanges),
            "failures": list(self.failures),
            "call_order": list(self.call_order),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "RunRecord":
        return cls(
            run_id=doc["run_id"],
            created_at=doc["created_at"],
            inputs=doc["inputs"],
            artifacts=dict(doc.get("artifacts", {})),
            exchanges=list(doc.get("exchanges", [])),
            failures=list(doc.get("failures", [])),
            call_order=list(doc.get("call_order", [])),
        )


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        for kind in ENTITY_KINDS:
            (self.root / kind).mkdir(exist_ok=True)
        self._lock_path = self.root / ".lock"

    def _check_kind(self, kind: str) -> None:
        if kind not in ENTITY_KINDS:
            raise InvalidConfig(f"unknown entity kind {kind!r}")

    def _path(self, kind: str, entity_id: str) -> Path:
        return self.root / kind / f"{entity_id}.json"

    def put(self, kind: str, payload, entity_id: str | None = None) -> str:
        """Persist a payload; returns its id. An explicit id overwrites."""
        self._check_kind(kind)
        entity_id = entity_id or uuid.uuid4().hex[:12]
        envelope = {
            "id": entity_id,
            "kind": kind,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "created_at_ns": time.time_ns(),
            "sha256": _digest(payload),
            "payload": payload,
        }
        target = self._path(kind, entity_id)
        tmp = target.with_suffix(".tmp")
        with open(self._lock_path, "w") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            tmp.write_text(json.dumps(envelope, indent=2))
            tmp.rename(target)
        return entity_id

    def _load(self, kind: str, entity_id: str) -> dict:
        self._check_kind(kind)
        path = self._path(kind, entity_id)
        if not path.exists():
            raise NotFound(f"{kind}/{entity_id} does not exist")
        try:
            envelope = json.loads(path.read_text())
        except ValueError:
            raise CorruptEntity(f"{kind}/{entity_id} is not valid JSON")
        if _digest(envelope.get("payload")) != envelope.get("sha256"):
            raise CorruptEntity(f"{kind}/{entity_id} failed its content hash check")
        return envelope

    def get(self, kind: str, entity_id: str):
        """Payload of a stored entity; hash-verified."""
        return self._load(kind, entity_id)["payload"]

    def digest(self, kind: str, entity_id: str) -> str:
        return self._load(kind, entity_id)["sha256"]

    def exists(self, kind: str, entity_id: str) -> bool:
        self._check_kind(kind)
        return self._path(kind, entity_id).exists()

    def list(self, kind: str) -> list[dict]:
        """Entity summaries ordered by creation time."""
        self._check_kind(kind)
        entries = []
        for path in (self.root / kind).glob("*.json"):
            try:
                envelope = json.loads(path.read_text())
            except ValueError:
                continue
            entries.append(
                {
                    "id": envelope["id"],
                    "created_at": envelope["created_at"],
                    "_ns": envelope.get("created_at_ns", 0),
                }
            )
        entries.sort(key=lambda e: (e["_ns"], e["id"]))
        return [{"id": e["id"], "created_at": e["created_at"]} for e in entries]

    # Run records reference other entities by hash; loading re-verifies them.

    def put_run(self, record: RunRecord) -> str:
        return self.put("runs", record.to_doc(), entity_id=record.run_id)

    def get_run(self, run_id: str, verify_inputs: bool = True) -> RunRecord:
        record = RunRecord.from_doc(self.get("runs", run_id))
        if verify_inputs:
            for name, ref in record.inputs.items():
                current = self.digest(ref["kind"], ref["id"])
                if current != ref["sha256"]:
                    raise CorruptEntity(
                        f"run {run_id}: input {name} ({ref['kind']}/{ref['id']}) "
                        "changed since the run was recorded"
                    )
        return record

    def input_ref(self, kind: str, entity_id: str) -> dict:
        return {"kind": kind, "id": entity_id, "sha256": self.digest(kind, entity_id)}
