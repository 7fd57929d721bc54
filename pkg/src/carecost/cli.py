"""Command-line front door.

Commands operate on plain files (prediction CSVs, cost-matrix JSON, profile
JSON) so everything is scriptable; `serve` starts the HTTP API backed by the
file store. All randomness is controlled by explicit --seed flags.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, cohort as cohort_mod, costcurves, metrics, scorer
from .agents import (
    FaultyClient,
    HttpChatClient,
    MockClient,
    run_pipeline,
)
from .agents.clients import DEFAULT_MODEL_NAME
from .errors import (
    AgentCallFailed,
    CareCostError,
    DegenerateLabels,
    NotFound,
)
from .metrics import PredictionSet

# Exit codes: 0 ok, 2 usage (click), then per failure class.
_EXIT_BAD_INPUT = 3
_EXIT_NOT_FOUND = 4
_EXIT_DEGENERATE = 5
_EXIT_AGENT_FAILED = 6


def _exit_code(exc: CareCostError) -> int:
    if isinstance(exc, NotFound):
        return _EXIT_NOT_FOUND
    if isinstance(exc, DegenerateLabels):
        return _EXIT_DEGENERATE
    if isinstance(exc, AgentCallFailed):
        return _EXIT_AGENT_FAILED
    return _EXIT_BAD_INPUT


def _fail(exc: CareCostError) -> None:
    click.echo(f"error ({exc.code}): {exc}", err=True)
    sys.exit(_exit_code(exc))


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _read_predictions(path: str) -> PredictionSet:
    with open(path, "r", encoding="utf-8") as handle:
        return scorer.import_scores(handle)


def _read_matrix(path: str) -> costcurves.CostMatrix:
    return costcurves.validate_cost_matrix(json.loads(Path(path).read_text()))


def _read_cohort_csv(path: str) -> tuple[list[cohort_mod.PatientProfile], list[int]]:
    """Parse a cohort CSV (patient_id, variables..., label)."""
    import csv as csv_mod

    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv_mod.reader(handle)
        header = next(reader)
        names = header[1:-1]
        profiles = []
        labels = []
        for row in reader:
            if not row:
                continue
            profiles.append(
                cohort_mod.PatientProfile(
                    patient_id=row[0],
                    variables={n: float(v) for n, v in zip(names, row[1:-1])},
                    generated_seed=0,
                )
            )
            labels.append(int(row[-1]))
    return profiles, labels


def _predictions_csv(preds: PredictionSet) -> str:
    lines = ["patient_id,score,label"]
    for r in preds:
        lines.append(f"{r.patient_id},{r.score},{r.label}")
    return "\n".join(lines) + "\n"


@click.group()
@click.version_option(version=__version__, prog_name="carecost")
def main() -> None:
    """Cost-aware decision support over binary risk predictions."""


# ----- cohort ---------------------------------------------------------------


@main.group()
def cohort() -> None:
    """Synthetic cohort generation."""


@cohort.command("gen")
@click.option("--n", default=100, show_default=True, help="Number of patients.")
@click.option("--seed", default=0, show_default=True)
@click.option("--specs", "specs_path", type=click.Path(exists=True), default=None,
              help="Variable spec JSON; built-in panel when omitted.")
@click.option("--label-model", "label_model_path", type=click.Path(exists=True),
              default=None, help="Label model JSON; built-in default when omitted.")
@click.option("--out-csv", default=None, help="Write cohort CSV here.")
@click.option("--out-profiles", default=None, help="Write profile JSON here.")
@click.option("--out-scores", default=None,
              help="Write the outcome-probability prediction CSV here.")
def cohort_gen(n, seed, specs_path, label_model_path, out_csv, out_profiles, out_scores):
    """Generate a cohort and its outcome labels."""
    try:
        specs = (
            cohort_mod.variable_specs_from_doc(json.loads(Path(specs_path).read_text()))
            if specs_path
            else cohort_mod.default_variable_specs()
        )
        label_model = (
            cohort_mod.label_model_from_doc(json.loads(Path(label_model_path).read_text()))
            if label_model_path
            else cohort_mod.default_label_model()
        )
        profiles, outcome = cohort_mod.generate_cohort(specs, label_model, n=n, seed=seed)
    except CareCostError as exc:
        _fail(exc)
    if out_csv:
        Path(out_csv).write_text(cohort_mod.cohort_to_csv(profiles, outcome))
    if out_profiles:
        Path(out_profiles).write_text(cohort_mod.profiles_to_json(profiles))
    if out_scores:
        Path(out_scores).write_text(_predictions_csv(outcome))
    click.echo(
        json.dumps(
            {
                "n": n,
                "seed": seed,
                "prevalence": outcome.prevalence,
                "variables": [s.name for s in specs],
            },
            indent=2,
        )
    )


# ----- score ------------------------------------------------------------------


@main.group()
def score() -> None:
    """Train, apply, or import risk scorers."""


@score.command("train")
@click.option("--cohort-csv", required=True, type=click.Path(exists=True))
@click.option("--l2", default=0.01, show_default=True)
@click.option("--max-iter", default=500, show_default=True)
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--out-model", required=True, help="Write fitted model JSON here.")
def score_train(cohort_csv, l2, max_iter, tol, out_model):
    """Fit the built-in logistic scorer on a cohort CSV."""
    try:
        profiles, labels = _read_cohort_csv(cohort_csv)
        names = list(profiles[0].variables.keys())
        features = scorer.features_from_profiles(profiles, names)
        model = scorer.train_logistic(
            features, labels, l2=l2, max_iter=max_iter, tol=tol, feature_names=names
        )
    except CareCostError as exc:
        _fail(exc)
    Path(out_model).write_text(json.dumps(model.to_doc(), indent=2))
    click.echo(
        json.dumps(
            {
                "converged": model.converged,
                "iterations": model.n_iter,
                "final_loss": model.final_loss,
                "features": list(model.feature_names),
            },
            indent=2,
        )
    )


@score.command("apply")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--cohort-csv", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, help="Prediction CSV destination (stdout default).")
def score_apply(model_path, cohort_csv, out):
    """Score a cohort CSV with a fitted model."""
    try:
        model = scorer.logistic_model_from_doc(json.loads(Path(model_path).read_text()))
        profiles, labels = _read_cohort_csv(cohort_csv)
        records = [
            metrics.PredictionRecord(p.patient_id, scorer.predict(model, p), y)
            for p, y in zip(profiles, labels)
        ]
        preds = PredictionSet(records)
    except CareCostError as exc:
        _fail(exc)
    _emit(_predictions_csv(preds), out)


@score.command("import")
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, help="Normalized CSV destination.")
def score_import(csv_path, out):
    """Validate an external prediction CSV."""
    try:
        preds = _read_predictions(csv_path)
    except CareCostError as exc:
        _fail(exc)
    _emit(_predictions_csv(preds), out)


# ----- metrics ----------------------------------------------------------------


@main.command("metrics")
@click.argument("action", type=click.Choice(["report"]))
@click.option("--preds", "preds_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default="0:1:0.01", show_default=True)
@click.option("--bootstrap", "n_resamples", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None)
def metrics_cmd(action, preds_path, grid, n_resamples, seed, out):
    """Discrimination/calibration report with bootstrap CIs."""
    from .service import parse_grid

    try:
        preds = _read_predictions(preds_path)
        sweep_grid = parse_grid(grid)
        t_best, f1_best = metrics.best_threshold(preds, sweep_grid)
        report = {
            "n": len(preds),
            "prevalence": preds.prevalence,
            "best_threshold": {"threshold": t_best, "f1": f1_best},
        }
        for name in ("auroc", "auprc", "brier"):
            est = metrics.bootstrap(name, preds, n_resamples=n_resamples, seed=seed)
            report[name] = {
                "point": est.point,
                "ci_lo": est.ci_lo,
                "ci_hi": est.ci_hi,
                "n_resamples": est.n_resamples,
                "seed": est.seed,
            }
    except CareCostError as exc:
        _fail(exc)
    _emit(json.dumps(report, indent=2), out)


# ----- curves -----------------------------------------------------------------


@main.group()
def cip() -> None:
    """Population cost curves."""


@cip.command("curve")
@click.option("--preds", "preds_path", required=True, type=click.Path(exists=True))
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default="0:1:0.01", show_default=True)
@click.option("--out", default=None, help="CSV destination (stdout default).")
def cip_curve_cmd(preds_path, matrix_path, grid, out):
    """Stacked expected-cost curve as CSV."""
    from .service import parse_grid

    try:
        preds = _read_predictions(preds_path)
        matrix = _read_matrix(matrix_path)
        curve = costcurves.population_cip(preds, matrix, parse_grid(grid))
    except CareCostError as exc:
        _fail(exc)
    _emit(costcurves.cip_curve_to_csv(curve), out)


@main.group()
def dca() -> None:
    """Decision-curve analysis."""


@dca.command("curve")
@click.option("--preds", "preds_path", required=True, type=click.Path(exists=True))
@click.option("--grid", default="0:0.99:0.01", show_default=True)
@click.option("--out", default=None)
def dca_curve_cmd(preds_path, grid, out):
    """Net-benefit curve as CSV."""
    from .service import parse_grid

    try:
        preds = _read_predictions(preds_path)
        curve = costcurves.dca_curve(preds, parse_grid(grid))
    except CareCostError as exc:
        _fail(exc)
    _emit(costcurves.dca_curve_to_csv(curve), out)


# ----- agents -----------------------------------------------------------------


@main.group()
def agents() -> None:
    """Patient-level narrative agents."""


@agents.command("run")
@click.option("--profile", "profile_path", required=True, type=click.Path(exists=True),
              help="Patient profile JSON.")
@click.option("--preds", "preds_path", required=True, type=click.Path(exists=True))
@click.option("--matrix", "matrix_path", required=True, type=click.Path(exists=True))
@click.option("--card", "card_path", required=True, type=click.Path(exists=True))
@click.option("--mock/--live", default=True, show_default=True)
@click.option("--base-url", default="", help="Chat endpoint base URL (live mode).")
@click.option("--model-name", default=DEFAULT_MODEL_NAME, show_default=True)
@click.option("--fail-agents", default="", help="Mock-only fault injection, e.g. 'III'.")
@click.option("--band-delta", default=0.05, show_default=True)
@click.option("--window", default=0.05, show_default=True)
@click.option("--out", default=None, help="Transcript JSON destination.")
def agents_run(profile_path, preds_path, matrix_path, card_path, mock, base_url,
               model_name, fail_agents, band_delta, window, out):
    """Run the four-agent pipeline for one patient."""
    from .agents import AgentId

    try:
        doc = json.loads(Path(profile_path).read_text())
        patient = cohort_mod.PatientProfile(
            patient_id=doc["patient_id"],
            variables=doc["variables"],
            generated_seed=int(doc.get("generated_seed", 0)),
        )
        preds = _read_predictions(preds_path)
        matrix = _read_matrix(matrix_path)
        card = scorer.ModelCard.from_doc(json.loads(Path(card_path).read_text()))
        curve = costcurves.population_cip(preds, matrix)
        if mock:
            client = MockClient()
            if fail_agents:
                client = FaultyClient(
                    client, {AgentId(a.strip()) for a in fail_agents.split(",")}
                )
        else:
            if not base_url:
                raise AgentCallFailed("I", "live mode needs --base-url")
            client = HttpChatClient(base_url=base_url, model_name=model_name)
        result = run_pipeline(
            patient, card, preds, curve, matrix,
            client=client, band_delta=band_delta, window=window,
        )
    except CareCostError as exc:
        _fail(exc)
    _emit(json.dumps(result.to_doc(), indent=2), out)
    if not result.complete:
        sys.exit(_EXIT_AGENT_FAILED)


# ----- serve ------------------------------------------------------------------


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.option("--store-root", default=None)
def serve(config_path, host, port, store_root):
    """Start the HTTP API."""
    import uvicorn

    from .service import ServiceConfig, create_app

    config = ServiceConfig.load(config_path)
    if host:
        config.host = host
    if port:
        config.port = port
    if store_root:
        config.store_root = store_root
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
