"""HTTP API over the engine: cohorts, predictions, metrics, cost curves,
and agent runs. Every numeric payload comes straight from the library
functions, so API output and direct library calls agree bit for bit.
"""

from __future__ import annotations

import json
import queue
import threading
import uuid
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterator, Mapping

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse
from pydantic import BaseModel, ValidationError

from . import cohort as cohort_mod
from . import costcurves, metrics, scorer
from .agents import (
    AgentId,
    FaultyClient,
    HttpChatClient,
    MockClient,
    run_pipeline,
)
from .agents.clients import DEFAULT_MODEL_NAME
from .errors import CareCostError, InvalidConfig, NotFound
from .store import RunRecord, Store, prediction_set_from_doc, prediction_set_to_doc

__all__ = ["ServiceConfig", "ApiError", "create_app", "parse_grid"]

_STATUS_BY_CODE = {
    "not_found": 404,
    "agent_call_failed": 502,
    "corrupt_entity": 500,
}
_DEFAULT_STATUS = 422  # validation-style failures

_MAX_GRID_POINTS = 100_001


@dataclass(frozen=True)
class ApiError:
    code: str
    message: str
    detail: object | None = None

    def to_doc(self) -> dict:
        doc = {"code": self.code, "message": self.message}
        if self.detail is not None:
            doc["detail"] = self.detail
        return doc


@dataclass
class ServiceConfig:
    store_root: str = "./carecost-store"
    host: str = "127.0.0.1"
    port: int = 8000
    llm_base_url: str = ""
    llm_model: str = DEFAULT_MODEL_NAME
    llm_api_key_env: str = "CARECOST_LLM_API_KEY"
    mock_agents: bool = True

    @classmethod
    def load(cls, path: str | None = None, env: Mapping[str, str] | None = None):
        """Config file first, then environment overrides."""
        import os

        env = env if env is not None else os.environ
        values: dict = {}
        if path:
            values.update(json.loads(Path(path).read_text()))
        overrides = {
            "store_root": env.get("CARECOST_STORE_ROOT"),
            "host": env.get("CARECOST_HOST"),
            "port": env.get("CARECOST_PORT"),
            "llm_base_url": env.get("CARECOST_LLM_BASE_URL"),
            "llm_model": env.get("CARECOST_LLM_MODEL"),
            "llm_api_key_env": env.get("CARECOST_LLM_API_KEY_ENV"),
            "mock_agents": env.get("CARECOST_MOCK_AGENTS"),
        }
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "port":
                values[key] = int(value)
            elif key == "mock_agents":
                values[key] = value.lower() in ("1", "true", "yes")
            else:
                values[key] = value
        return cls(**values)


def parse_grid(text: str | None) -> list[float] | None:
    """Parse a start:stop:step grid; decimals are honored exactly."""
    if not text:
        return None
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidConfig(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (Decimal(p) for p in parts)
    except InvalidOperation:
        raise InvalidConfig(f"grid has non-numeric parts: {text!r}")
    if step <= 0:
        raise InvalidConfig("grid step must be positive")
    if stop < start:
        raise InvalidConfig("grid stop must be >= start")
    if (stop - start) / step > _MAX_GRID_POINTS:
        raise InvalidConfig("grid is too fine")
    points = []
    value = start
    while value <= stop:
        points.append(float(value))
        value += step
    return points


class CohortRequest(BaseModel):
    specs: list[dict] | None = None
    label_model: dict | None = None
    n: int = 100
    seed: int = 0


class TrainRequest(BaseModel):
    cohort_id: str
    l2: float = 0.01
    max_iter: int = 500
    tol: float = 1e-6
    seed: int = 0


class AgentRunRequest(BaseModel):
    cohort_id: str
    patient_id: str
    predictions_id: str
    matrix_id: str
    card_id: str
    band_delta: float = 0.05
    window: float = 0.05
    stream: bool = True
    mock: bool | None = None
    fail_agents: list[str] = []


def _csv_response(text: str) -> Response:
    return Response(content=text, media_type="text/csv")


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="carecost", version="0.1.0")
    store = Store(config.store_root)
    app.state.store = store
    app.state.config = config
    app.state.active_runs = set()
    app.state.active_runs_lock = threading.Lock()

    @app.exception_handler(CareCostError)
    async def carecost_error_handler(request: Request, exc: CareCostError):
        status = _STATUS_BY_CODE.get(exc.code, _DEFAULT_STATUS)
        return JSONResponse(
            status_code=status,
            content=ApiError(code=exc.code, message=str(exc)).to_doc(),
        )

    def load_predictions(predictions_id: str) -> metrics.PredictionSet:
        return prediction_set_from_doc(store.get("predictions", predictions_id))

    def load_matrix(matrix_id: str) -> costcurves.CostMatrix:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", costcurves.CostMatrixWarning)
            return costcurves.validate_cost_matrix(store.get("matrices", matrix_id))

    # ----- cohorts ---------------------------------------------------------

    @app.post("/cohorts")
    def create_cohort(body: CohortRequest):
        specs = (
            cohort_mod.variable_specs_from_doc(body.specs)
            if body.specs is not None
            else cohort_mod.default_variable_specs()
        )
        label_model = (
            cohort_mod.label_model_from_doc(body.label_model)
            if body.label_model is not None
            else cohort_mod.default_label_model()
        )
        profiles, outcome = cohort_mod.generate_cohort(
            specs, label_model, n=body.n, seed=body.seed
        )
        predictions_id = store.put("predictions", prediction_set_to_doc(outcome))
        cohort_id = store.put(
            "cohorts",
            {
                "specs": [s.to_doc() for s in specs],
                "label_model": label_model.to_doc(),
                "n": body.n,
                "seed": body.seed,
                "profiles": [p.to_doc() for p in profiles],
                "labels": {r.patient_id: r.label for r in outcome},
                "predictions_id": predictions_id,
            },
        )
        return {
            "cohort_id": cohort_id,
            "predictions_id": predictions_id,
            "prevalence": outcome.prevalence,
        }

    @app.get("/cohorts")
    def list_cohorts():
        return store.list("cohorts")

    @app.get("/cohorts/{cohort_id}")
    def get_cohort(cohort_id: str):
        return store.get("cohorts", cohort_id)

    # ----- predictions -----------------------------------------------------

    @app.post("/predictions")
    async def create_predictions(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                raise InvalidConfig("multipart upload needs a 'file' field")
            text = (await upload.read()).decode("utf-8")
            preds = scorer.import_scores(text)
            predictions_id = store.put("predictions", prediction_set_to_doc(preds))
            return {"predictions_id": predictions_id, "n": len(preds)}
        try:
            body = TrainRequest(**(await request.json()))
        except ValidationError as exc:
            raise InvalidConfig(f"bad train request: {exc.errors()}")
        cohort_doc = store.get("cohorts", body.cohort_id)
        specs = cohort_mod.variable_specs_from_doc(cohort_doc["specs"])
        profiles = [
            cohort_mod.PatientProfile(
                patient_id=p["patient_id"],
                variables=p["variables"],
                generated_seed=p["generated_seed"],
            )
            for p in cohort_doc["profiles"]
        ]
        names = [s.name for s in specs]
        features = scorer.features_from_profiles(profiles, names)
        labels = [cohort_doc["labels"][p.patient_id] for p in profiles]
        model = scorer.train_logistic(
            features,
            labels,
            l2=body.l2,
            max_iter=body.max_iter,
            tol=body.tol,
            feature_names=names,
        )
        outcome = prediction_set_from_doc(
            store.get("predictions", cohort_doc["predictions_id"])
        )
        preds = scorer.apply_to_cohort(model, profiles, outcome)
        predictions_id = store.put("predictions", prediction_set_to_doc(preds))
        model_id = store.put("models", model.to_doc())
        t_best, f1_best = metrics.best_threshold(preds, metrics.default_grid())
        card = scorer.ModelCard(
            description=(
                "In-engine logistic regression over the generated cohort "
                f"({len(preds)} patients, {len(names)} variables)."
            ),
            decision_threshold=t_best,
            training_summary=(
                f"converged={model.converged} after {model.n_iter} iterations, "
                f"final loss {model.final_loss:.6f}"
            ),
            metric_summary={
                "auroc": metrics.auroc(preds),
                "auprc": metrics.auprc(preds),
                "brier": metrics.brier(preds),
                "f1_at_threshold": f1_best,
            },
        )
        card_id = store.put("cards", card.to_doc())
        return {
            "predictions_id": predictions_id,
            "model_id": model_id,
            "card_id": card_id,
            "decision_threshold": t_best,
        }

    @app.get("/predictions")
    def list_predictions():
        return store.list("predictions")

    @app.get("/predictions/{predictions_id}")
    def get_predictions(predictions_id: str):
        return store.get("predictions", predictions_id)

    @app.get("/predictions/{predictions_id}/metrics")
    def prediction_metrics(
        predictions_id: str,
        grid: str | None = None,
        bootstrap: int = 0,
        seed: int = 0,
        bins: int = 10,
    ):
        preds = load_predictions(predictions_id)
        sweep_grid = parse_grid(grid) or metrics.default_grid()
        t_best, f1_best = metrics.best_threshold(preds, sweep_grid)
        payload = {
            "n": len(preds),
            "prevalence": preds.prevalence,
            "auroc": metrics.auroc(preds),
            "auprc": metrics.auprc(preds),
            "brier": metrics.brier(preds),
            "best_threshold": {"threshold": t_best, "f1": f1_best},
            "roc": [
                {"x": p.x, "y": p.y, "threshold": p.threshold}
                for p in metrics.roc_curve(preds)
            ],
            "pr": [
                {"x": p.x, "y": p.y, "threshold": p.threshold}
                for p in metrics.pr_curve(preds)
            ],
            "calibration": [
                {
                    "lo": b.lo,
                    "hi": b.hi,
                    "mean_score": b.mean_score,
                    "observed_rate": b.observed_rate,
                    "count": b.count,
                }
                for b in metrics.calibration(preds, n_bins=bins)
            ],
        }
        if bootstrap > 0:
            payload["bootstrap"] = {
                name: {
                    "point": est.point,
                    "ci_lo": est.ci_lo,
                    "ci_hi": est.ci_hi,
                    "n_resamples": est.n_resamples,
                    "seed": est.seed,
                }
                for name, est in (
                    (m, metrics.bootstrap(m, preds, n_resamples=bootstrap, seed=seed))
                    for m in ("auroc", "auprc", "brier")
                )
            }
        return payload

    # ----- cost matrices ---------------------------------------------------

    @app.put("/cost-matrices/{matrix_id}")
    def put_matrix(matrix_id: str, body: dict):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", costcurves.CostMatrixWarning)
            matrix = costcurves.validate_cost_matrix(body)
        store.put("matrices", matrix.to_document(), entity_id=matrix_id)
        return {
            "matrix_id": matrix_id,
            "warnings": [
                str(w.message)
                for w in caught
                if issubclass(w.category, costcurves.CostMatrixWarning)
            ],
        }

    @app.get("/cost-matrices")
    def list_matrices():
        return store.list("matrices")

    @app.get("/cost-matrices/{matrix_id}")
    def get_matrix(matrix_id: str):
        return store.get("matrices", matrix_id)

    # ----- curves ----------------------------------------------------------

    @app.get("/cip")
    def cip_endpoint(
        predictions: str, matrix: str, grid: str | None = None, format: str = "json"
    ):
        preds = load_predictions(predictions)
        cost_matrix = load_matrix(matrix)
        curve = costcurves.population_cip(preds, cost_matrix, parse_grid(grid))
        if format == "csv":
            return _csv_response(costcurves.cip_curve_to_csv(curve))
        return curve.to_dict()

    @app.get("/dca")
    def dca_endpoint(predictions: str, grid: str | None = None, format: str = "json"):
        preds = load_predictions(predictions)
        curve = costcurves.dca_curve(
            preds, parse_grid(grid) or metrics.default_grid()[:-1]
        )
        if format == "csv":
            return _csv_response(costcurves.dca_curve_to_csv(curve))
        return curve.to_dict()

    @app.get("/patients/{patient_id}/expected-cost")
    def expected_cost(patient_id: str, predictions: str, matrix: str, t: float):
        preds = load_predictions(predictions)
        cost_matrix = load_matrix(matrix)
        try:
            score = preds.score_of(patient_id)
        except KeyError:
            raise NotFound(f"patient {patient_id!r} not in predictions {predictions!r}")
        cells = costcurves.patient_expected_cost(score, t, cost_matrix)
        flat = {f"{kind}_{dim}": value for (kind, dim), value in cells.items()}
        return {
            "patient_id": patient_id,
            "score": score,
            "threshold": t,
            "cells": flat,
            "totals": {
                "qol": flat["treatment_qol"] + flat["error_qol"],
                "healthcare": flat["treatment_healthcare"] + flat["error_healthcare"],
            },
        }

    # ----- agent runs ------------------------------------------------------

    @app.get("/cards/{card_id}")
    def get_card(card_id: str):
        return store.get("cards", card_id)

    @app.put("/cards/{card_id}")
    def put_card(card_id: str, body: dict):
        card = scorer.ModelCard.from_doc(body)
        store.put("cards", card.to_doc(), entity_id=card_id)
        return {"card_id": card_id}

    @app.get("/runs")
    def list_runs():
        return store.list("runs")

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.get_run(run_id).to_doc()

    def _build_client(body: AgentRunRequest):
        use_mock = config.mock_agents if body.mock is None else body.mock
        if use_mock:
            client = MockClient()
        else:
            if not config.llm_base_url:
                raise InvalidConfig("live agent mode needs llm_base_url configured")
            client = HttpChatClient(
                base_url=config.llm_base_url,
                model_name=config.llm_model,
                api_key_env=config.llm_api_key_env,
            )
        if body.fail_agents:
            if not use_mock:
                raise InvalidConfig("fail_agents is only available in mock mode")
            client = FaultyClient(client, {AgentId(a) for a in body.fail_agents})
        return client

    def _run_agents(body: AgentRunRequest, observer=None) -> RunRecord:
        cohort_doc = store.get("cohorts", body.cohort_id)
        profile_doc = next(
            (p for p in cohort_doc["profiles"] if p["patient_id"] == body.patient_id),
            None,
        )
        if profile_doc is None:
            raise NotFound(
                f"patient {body.patient_id!r} not in cohort {body.cohort_id!r}"
            )
        patient = cohort_mod.PatientProfile(
            patient_id=profile_doc["patient_id"],
            variables=profile_doc["variables"],
            generated_seed=profile_doc["generated_seed"],
        )
        preds = load_predictions(body.predictions_id)
        cost_matrix = load_matrix(body.matrix_id)
        card = scorer.ModelCard.from_doc(store.get("cards", body.card_id))
        cip = costcurves.population_cip(preds, cost_matrix)
        client = _build_client(body)
        result = run_pipeline(
            patient,
            card,
            preds,
            cip,
            cost_matrix,
            client=client,
            band_delta=body.band_delta,
            window=body.window,
            observer=observer,
        )
        record = RunRecord(
            run_id=uuid.uuid4().hex[:12],
            created_at=datetime.now(timezone.utc).isoformat(),
            inputs={
                "cohort": store.input_ref("cohorts", body.cohort_id),
                "predictions": store.input_ref("predictions", body.predictions_id),
                "matrix": store.input_ref("matrices", body.matrix_id),
                "card": store.input_ref("cards", body.card_id),
            },
            artifacts={
                "cip_csv": costcurves.cip_curve_to_csv(cip),
                "dca_csv": costcurves.dca_curve_to_csv(
                    costcurves.dca_curve(preds, metrics.default_grid()[:-1])
                ),
            },
            exchanges=[e.to_doc() for e in result.exchanges.values()],
            failures=[f.to_doc() for f in result.failures.values()],
            call_order=[a.value for a in result.call_order],
        )
        store.put_run(record)
        return record

    def _release_patient(patient_id: str) -> None:
        with app.state.active_runs_lock:
            app.state.active_runs.discard(patient_id)

    @app.post("/agent-runs")
    def agent_runs(body: AgentRunRequest):
        with app.state.active_runs_lock:
            if body.patient_id in app.state.active_runs:
                return JSONResponse(
                    status_code=409,
                    content=ApiError(
                        code="run_in_progress",
                        message=f"a run for patient {body.patient_id!r} is already active",
                    ).to_doc(),
                )
            app.state.active_runs.add(body.patient_id)

        if not body.stream:
            try:
                record = _run_agents(body)
            finally:
                _release_patient(body.patient_id)
            return record.to_doc()

        events: queue.Queue = queue.Queue()

        def observer(event: str, agent, detail: dict) -> None:
            events.put({"event": f"agent_{event}", **detail})

        def worker() -> None:
            try:
                record = _run_agents(body, observer=observer)
                events.put({"event": "run_completed", "run": record.to_doc()})
            except CareCostError as exc:
                events.put(
                    {"event": "run_failed", "code": exc.code, "message": str(exc)}
                )
            except Exception as exc:  # surface unexpected bugs to the client
                events.put({"event": "run_failed", "code": "error", "message": str(exc)})
            finally:
                events.put(None)
                _release_patient(body.patient_id)

        threading.Thread(target=worker, daemon=True).start()

        def stream() -> Iterator[str]:
            while True:
                item = events.get()
                if item is None:
                    break
                yield json.dumps(item) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app
