import json
from pathlib import Path

import httpx
import pytest

from carecost.agents import (
    AgentContext,
    AgentId,
    DEFAULT_TEMPLATES,
    FaultyClient,
    HttpChatClient,
    MockClient,
    build_context,
    render_prompt,
    run_pipeline,
)
from carecost.cohort import PatientProfile
from carecost.costcurves import population_cip
from carecost.errors import AgentCallFailed, DependencyUnmet, NotFound, TemplateMissing
from carecost.metrics import PredictionSet
from carecost.scorer import ModelCard

GOLDEN_PROMPT = Path(__file__).parent / "data" / "golden_prompt_agent_i.txt"

# Literal re-encoding of the agent/context inclusion table. Kept independent
# of the implementation on purpose: if either side drifts, this fails.
EXPECTED_BLOCKS = {
    AgentId.I: (
        "patient_profile",
        "classifier_description",
        "decision_threshold",
        "performance_near_r",
        "risk_score",
        "performance_near_s",
    ),
    AgentId.II: (
        "patient_profile",
        "risk_score",
        "cip_cost_description",
        "cip_cost_coefficients",
        "cip_composition_near_s",
        "response_I",
    ),
    AgentId.III: ("patient_profile", "response_I"),
    AgentId.IV: ("patient_profile", "response_II"),
}

EXPECTED_QUERIES = {
    AgentId.I: "risk_analysis",
    AgentId.II: "cost_benefit",
    AgentId.III: "risk_mitigation",
    AgentId.IV: "intervention_prediction",
}

FULL_PRIOR = {AgentId.I: "analysis one", AgentId.II: "analysis two"}


@pytest.fixture
def env(homecare_matrix):
    preds = PredictionSet.from_arrays(
        scores=[0.8, 0.3, 0.6, 0.2, 0.5, 0.75, 0.1, 0.9],
        labels=[1, 0, 1, 0, 0, 1, 0, 1],
        patient_ids=["pt1", "pt2", "pt3", "pt4", "pt5", "pt6", "pt7", "pt8"],
    )
    patient = PatientProfile(
        patient_id="pt1",
        variables={"age_years": 81.0, "nt_probnp": 5200.0, "albumin": 31.0},
        generated_seed=0,
    )
    card = ModelCard(
        description="Boosted-tree risk model for one-year outcome after discharge.",
        decision_threshold=0.25,
        training_summary="Trained externally; scores imported.",
        metric_summary={"auroc": 0.8},
    )
    cip = population_cip(preds, homecare_matrix)
    return patient, card, preds, cip, homecare_matrix


class TestBuildContext:
    @pytest.mark.parametrize("agent", list(AgentId))
    def test_block_sets_match_inclusion_table(self, env, agent):
        ctx = build_context(agent, *env, prior=FULL_PRIOR)
        assert ctx.block_kinds == EXPECTED_BLOCKS[agent]
        assert ctx.query_kind == EXPECTED_QUERIES[agent]

    def test_agent_i_needs_no_prior_and_no_cost_blocks(self, env):
        ctx = build_context(AgentId.I, *env)
        assert not any(k.startswith("cip_") for k in ctx.block_kinds)
        assert not any(k.startswith("response_") for k in ctx.block_kinds)

    def test_missing_prior_names_the_missing_agent(self, env):
        with pytest.raises(DependencyUnmet, match="I"):
            build_context(AgentId.II, *env)
        with pytest.raises(DependencyUnmet, match="II"):
            build_context(AgentId.IV, *env, prior={AgentId.I: "only I"})

    def test_patient_without_prediction_rejected(self, env):
        patient, card, preds, cip, matrix = env
        stranger = PatientProfile("nobody", {"age_years": 70.0}, 0)
        with pytest.raises(NotFound):
            build_context(AgentId.I, stranger, card, preds, cip, matrix)

    def test_profile_block_contains_exactly_profile_fields(self, env):
        patient = env[0]
        ctx = build_context(AgentId.III, *env, prior=FULL_PRIOR)
        profile_text = dict(ctx.blocks)["patient_profile"]
        rendered = {
            line[2:].split(":")[0]
            for line in profile_text.splitlines()
            if line.startswith("- ")
        }
        assert rendered == set(patient.variables)

    def test_prior_text_embedded_verbatim(self, env):
        ctx = build_context(AgentId.IV, *env, prior=FULL_PRIOR)
        assert dict(ctx.blocks)["response_II"] == "analysis two"


class TestRenderPrompt:
    def test_same_context_renders_identically(self, env):
        ctx = build_context(AgentId.II, *env, prior=FULL_PRIOR)
        assert render_prompt(ctx) == render_prompt(ctx)

    def test_section_count_is_blocks_plus_query(self, env):
        ctx = build_context(AgentId.I, *env)
        prompt = render_prompt(ctx)
        sections = [l for l in prompt.splitlines() if l.startswith("### ")]
        assert len(sections) == 6 + 1

    def test_unknown_block_kind_rejected(self):
        ctx = AgentContext(
            agent=AgentId.I,
            blocks=(("mystery_block", "text"),),
            query_kind="risk_analysis",
        )
        with pytest.raises(TemplateMissing):
            render_prompt(ctx)

    def test_no_directive_wording_in_templates(self):
        for text in DEFAULT_TEMPLATES.query_texts.values():
            lowered = f" {text.lower()} "
            assert " shall " not in lowered and " must " not in lowered

    def test_golden_snapshot_for_agent_i(self, env):
        ctx = build_context(AgentId.I, *env)
        assert render_prompt(ctx) == GOLDEN_PROMPT.read_text()


class TestPipeline:
    def test_mock_run_completes_all_four(self, env):
        result = run_pipeline(*env, client=MockClient())
        assert result.complete
        assert set(result.exchanges) == set(AgentId)
        assert not result.failures

    def test_iv_context_embeds_ii_response(self, env):
        result = run_pipeline(*env, client=MockClient())
        ii_text = result.exchanges[AgentId.II].response_text
        iv_blocks = dict(result.exchanges[AgentId.IV].context.blocks)
        assert iv_blocks["response_II"] == ii_text
        assert "mock agent II" in ii_text

    def test_transcripts_are_deterministic(self, env):
        a = run_pipeline(*env, client=MockClient()).to_doc()
        b = run_pipeline(*env, client=MockClient()).to_doc()
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_failure_on_iii_leaves_others_standing(self, env):
        client = FaultyClient(MockClient(), fail_on={AgentId.III})
        result = run_pipeline(*env, client=client)
        assert set(result.exchanges) == {AgentId.I, AgentId.II, AgentId.IV}
        assert result.failures[AgentId.III].kind == "call_failed"

    def test_failure_on_i_aborts_everything_downstream(self, env):
        client = FaultyClient(MockClient(), fail_on={AgentId.I})
        result = run_pipeline(*env, client=client)
        assert not result.exchanges
        assert result.failures[AgentId.I].kind == "call_failed"
        for agent in (AgentId.II, AgentId.III, AgentId.IV):
            assert result.failures[agent].kind == "dependency_unmet"

    def test_failure_on_ii_skips_only_iv(self, env):
        client = FaultyClient(MockClient(), fail_on={AgentId.II})
        result = run_pipeline(*env, client=client)
        assert set(result.exchanges) == {AgentId.I, AgentId.III}
        assert result.failures[AgentId.IV].kind == "dependency_unmet"

    @pytest.mark.parametrize("concurrent", [True, False])
    def test_call_order_respects_dag_over_many_runs(self, env, concurrent):
        for _ in range(100):
            result = run_pipeline(*env, client=MockClient(), concurrent=concurrent)
            order = list(result.call_order)
            assert order.index(AgentId.I) < order.index(AgentId.II)
            assert order.index(AgentId.I) < order.index(AgentId.III)
            assert order.index(AgentId.II) < order.index(AgentId.IV)

    def test_sequential_equals_concurrent(self, env):
        a = run_pipeline(*env, client=MockClient(), concurrent=True)
        b = run_pipeline(*env, client=MockClient(), concurrent=False)
        assert {k: v.to_doc() for k, v in a.exchanges.items()} == {
            k: v.to_doc() for k, v in b.exchanges.items()
        }

    def test_exchange_records_template_hash(self, env):
        result = run_pipeline(*env, client=MockClient())
        fp = DEFAULT_TEMPLATES.fingerprint()
        assert all(e.template_hash == fp for e in result.exchanges.values())


class TestHttpChatClient:
    def _client(self, handler):
        return HttpChatClient(
            base_url="http://llm.test/v1",
            transport=httpx.MockTransport(handler),
        )

    def test_parses_completion(self):
        def handler(request):
            return httpx.Response(
                200,
                json={
                    "model": "remote-model",
                    "choices": [{"message": {"content": "hello"}}],
                    "usage": {"prompt_tokens": 10, "completion_tokens": 1},
                },
            )

        response = self._client(handler).complete("prompt", AgentId.I)
        assert response.text == "hello"
        assert response.model_name == "remote-model"
        assert response.token_counts == {"prompt_tokens": 10, "completion_tokens": 1}

    def test_http_error_raises_agent_call_failed(self):
        def handler(request):
            return httpx.Response(503, json={"error": "down"})

        with pytest.raises(AgentCallFailed, match="503"):
            self._client(handler).complete("prompt", AgentId.II)

    def test_malformed_payload_raises(self):
        def handler(request):
            return httpx.Response(200, json={"unexpected": True})

        with pytest.raises(AgentCallFailed, match="malformed"):
            self._client(handler).complete("prompt", AgentId.I)

    def test_log_redacts_authorization(self, monkeypatch):
        monkeypatch.setenv("CARECOST_LLM_API_KEY", "sk-secret")

        def handler(request):
            assert request.headers["Authorization"] == "Bearer sk-secret"
            return httpx.Response(
                200, json={"choices": [{"message": {"content": "ok"}}]}
            )

        client = self._client(handler)
        client.complete("prompt", AgentId.I)
        assert client.log[0]["request"]["headers"] == {"authorization": "REDACTED"}
        assert "sk-secret" not in json.dumps(client.log)
