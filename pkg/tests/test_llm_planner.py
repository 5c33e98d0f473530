from __future__ import annotations

import json

import httpx
import pytest

from sqlmem.engine import ExecutedStep, ExecutionTrace, MemoryStep, UserInput, run_turn
from sqlmem.errors import PlanParseError, RemoteError
from sqlmem.memory import ResultTable, init_schema
from sqlmem.planner.base import DirectReply, Plan, PlannerConfig
from sqlmem.planner.llm import LlmPlanner, estimate_tokens, load_exemplars
from sqlmem.schema import fruit_shop_schema

from conftest import PRICE_CHANGE_TEXT

ENDPOINT = "https://llm.example/v1/chat/completions"

PRICE_PLAN_COMPLETION = """\
Step1: Update the selling price of pear
```sql
UPDATE fruits
SET selling_price = 1.6
WHERE fruit_name = 'pear';
```
"""


def _config(**overrides) -> PlannerConfig:
    base = dict(mode="llm", endpoint=ENDPOINT, model="test-model", temperature=0.0, retries=2)
    base.update(overrides)
    return PlannerConfig(**base)


def _canned(content: str, record=None):
    def responder(request: httpx.Request) -> httpx.Response:
        if record is not None:
            record.append(json.loads(request.content))
        return httpx.Response(
            200, json={"choices": [{"message": {"content": content}}]}
        )

    return httpx.MockTransport(responder)


def test_plan_parses_canned_completion_and_sends_temperature_zero():
    requests: list[dict] = []
    planner = LlmPlanner(_config(), transport=_canned(PRICE_PLAN_COMPLETION, requests))
    output = planner.plan(UserInput(text=PRICE_CHANGE_TEXT, turn_id=1), "schema here")
    assert isinstance(output, Plan)
    assert len(output.steps) == 1
    assert output.steps[0].description == "Update the selling price of pear"
    payload = requests[0]
    assert payload["temperature"] == 0.0
    assert payload["model"] == "test-model"
    assert payload["messages"][0]["role"] == "system"


def test_plan_prompt_contains_schema_exemplars_and_input():
    requests: list[dict] = []
    planner = LlmPlanner(_config(), transport=_canned(PRICE_PLAN_COMPLETION, requests))
    planner.plan(UserInput(text=PRICE_CHANGE_TEXT, turn_id=1), "SCHEMA-MARKER")
    user_message = requests[0]["messages"][1]["content"]
    assert "SCHEMA-MARKER" in user_message
    assert PRICE_CHANGE_TEXT in user_message
    for exemplar in load_exemplars("fruit-shop"):
        assert exemplar.input_text in user_message


def test_reply_prefix_becomes_direct_reply():
    planner = LlmPlanner(_config(), transport=_canned("REPLY: I am the shop assistant."))
    output = planner.plan(UserInput(text="hello", turn_id=1), "schema")
    assert output == DirectReply("I am the shop assistant.")


def test_unparseable_completion_is_plan_parse_error():
    planner = LlmPlanner(_config(), transport=_canned("I cannot help with that."))
    with pytest.raises(PlanParseError):
        planner.plan(UserInput(text="x", turn_id=1), "schema")


def test_server_errors_retry_then_succeed():
    calls = {"n": 0}

    def responder(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(500, text="boom")
        return httpx.Response(
            200, json={"choices": [{"message": {"content": PRICE_PLAN_COMPLETION}}]}
        )

    planner = LlmPlanner(_config(retries=2), transport=httpx.MockTransport(responder))
    output = planner.plan(UserInput(text="x", turn_id=1), "schema")
    assert isinstance(output, Plan)
    assert calls["n"] == 3


def test_persistent_server_error_raises_remote_error_with_retry_count():
    planner = LlmPlanner(
        _config(retries=2), transport=httpx.MockTransport(lambda r: httpx.Response(503))
    )
    with pytest.raises(RemoteError) as exc_info:
        planner.plan(UserInput(text="x", turn_id=1), "schema")
    assert exc_info.value.retries == 2


def test_client_error_is_not_retried():
    calls = {"n": 0}

    def responder(request):
        calls["n"] += 1
        return httpx.Response(401, text="bad key")

    planner = LlmPlanner(_config(), transport=httpx.MockTransport(responder))
    with pytest.raises(RemoteError):
        planner.plan(UserInput(text="x", turn_id=1), "schema")
    assert calls["n"] == 1


def test_api_key_sent_as_bearer_only_when_env_set(monkeypatch):
    seen = {}

    def responder(request: httpx.Request) -> httpx.Response:
        seen["auth"] = request.headers.get("authorization")
        return httpx.Response(
            200, json={"choices": [{"message": {"content": PRICE_PLAN_COMPLETION}}]}
        )

    monkeypatch.delenv("SQLMEM_API_KEY", raising=False)
    planner = LlmPlanner(_config(), transport=httpx.MockTransport(responder))
    planner.plan(UserInput(text="x", turn_id=1), "schema")
    assert seen["auth"] is None

    monkeypatch.setenv("SQLMEM_API_KEY", "sk-test")
    planner.plan(UserInput(text="x", turn_id=1), "schema")
    assert seen["auth"] == "Bearer sk-test"


def test_update_operation_parses_statements_and_shows_prior_results():
    requests: list[dict] = []
    planner = LlmPlanner(
        _config(),
        transport=_canned("DELETE FROM sale_items WHERE sale_id = 9;", requests),
    )
    from sqlmem.memory import SqlStatement

    step1 = MemoryStep(index=1, description="Find the sale_id", sql_template="SELECT 1")
    executed = ExecutedStep(step=step1)
    executed.resolved_statements = [SqlStatement("SELECT sale_id FROM sales WHERE sale_date = '2023-01-05'")]
    executed.results = [ResultTable(columns=(("sale_id", "integer"),), rows=((9,),))]
    trace = ExecutionTrace(input=UserInput(text="x", turn_id=1), steps=[executed])
    step2 = MemoryStep(
        index=2,
        description="Delete the sale items",
        sql_template="DELETE FROM sale_items WHERE sale_id = <sale_id>",
        llm_resolved=True,
    )
    statements = planner.update_operation(step2, trace)
    assert [s.text for s in statements] == ["DELETE FROM sale_items WHERE sale_id = 9"]
    prompt = requests[0]["messages"][1]["content"]
    assert "|    9    |" in prompt  # rendered prior result table
    assert "<sale_id>" in prompt


def test_llm_turn_end_to_end_with_mock_model():
    handle = init_schema(fruit_shop_schema())
    handle.execute(
        "INSERT INTO fruits (fruit_name, selling_price, stock_quantity, fruit_type, shelf_life) "
        "VALUES ('pear', 1.2, 10, NULL, NULL)"
    )

    def model(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        system = body["messages"][0]["content"]
        if system.startswith("You summarize"):
            content = "The price of pear is now 1.6. answer: 1.6"
        else:
            content = PRICE_PLAN_COMPLETION
        return httpx.Response(200, json={"choices": [{"message": {"content": content}}]})

    planner = LlmPlanner(_config(), transport=httpx.MockTransport(model))
    trace = run_turn(UserInput(text=PRICE_CHANGE_TEXT, turn_id=1), planner, handle)
    assert trace.error is None
    assert len(trace.steps) == 1
    assert trace.steps[0].results[0].rows_affected == 1
    assert "answer: 1.6" in trace.reply
    assert handle.execute("SELECT selling_price FROM fruits WHERE fruit_name='pear'").scalar() == 1.6
    handle.close()


def test_plan_prompts_stay_under_token_budget(fresh_handle):
    planner = LlmPlanner(_config(), transport=_canned(PRICE_PLAN_COMPLETION))
    schema_desc = fresh_handle.describe_schema()
    inputs = [
        PRICE_CHANGE_TEXT,
        "What was the total revenue for January 2023?",
        "A sale was made on 2023-01-02 to 'Bob Smith' (contact details: 123-456-7893, "
        "bob.smith@example.com). The items purchased were 9 kg apple, 4 kg cherry.",
    ]
    for text in inputs:
        system, user = planner.build_plan_prompt(UserInput(text=text, turn_id=1), schema_desc)
        assert estimate_tokens(system + user) <= planner.config.token_budget


def test_config_validation():
    with pytest.raises(ValueError):
        PlannerConfig(mode="llm").validate()  # endpoint required
    with pytest.raises(ValueError):
        PlannerConfig(mode="rule", temperature=-1).validate()


def test_config_file_and_overrides(tmp_path):
    path = tmp_path / "planner.json"
    path.write_text(json.dumps({"mode": "llm", "endpoint": ENDPOINT, "model": "m"}))
    config = PlannerConfig.from_file(path)
    assert config.endpoint == ENDPOINT
    overridden = config.with_overrides(model="m2", temperature=None)
    assert overridden.model == "m2"
    assert overridden.temperature == 0.0
