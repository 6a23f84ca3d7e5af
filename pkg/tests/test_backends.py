"""Backends and the gateway client: rules, synthesis, budgets, retries."""

from __future__ import annotations

import json

import httpx
import pytest

from stagecraft.errors import (
    BackendUnavailable,
    BudgetExceeded,
    GenerationFailed,
    ReplayDivergence,
)
from stagecraft.gateway import (
    GatewayClient,
    HttpBackend,
    HttpBackendConfig,
    ReplayBackend,
    ScriptedBackend,
    ScriptedRule,
    TemplateId,
    TranscriptRecord,
    parse_check,
)
from stagecraft.gateway.backends import LlmRequest
from stagecraft.gateway.templates import ChatMessage, Role

CHECK_BINDINGS = {
    "characters": "Alba, Bruno",
    "dialogue_history": "\nAlba: nothing yet",
    "background": "",
    "act_goal": "the talk turns to the greenhouse",
}


def _request(template: TemplateId, bindings: dict) -> LlmRequest:
    return LlmRequest(template=template, bindings=dict(bindings))


# ----------------------------------------------------------------- scripted


def test_scripted_synthesis_is_deterministic():
    a = ScriptedBackend(seed=3)
    b = ScriptedBackend(seed=3)
    req = _request(TemplateId.WRITE_OUTLINE, CHECK_BINDINGS)
    assert a.complete(req, []) == b.complete(req, [])
    different_seed = ScriptedBackend(seed=4).complete(req, [])
    assert different_seed != a.complete(req, [])


def test_scripted_synthesis_depends_on_bindings():
    backend = ScriptedBackend(seed=0)
    one = backend.complete(_request(TemplateId.ACTOR_RESPONSE, {"name": "Alba"}), [])
    two = backend.complete(_request(TemplateId.ACTOR_RESPONSE, {"name": "Bruno"}), [])
    assert one != two


def test_scripted_outline_is_parseable_json():
    backend = ScriptedBackend(seed=1)
    raw = backend.complete(_request(TemplateId.WRITE_OUTLINE, CHECK_BINDINGS), [])
    obj = json.loads(raw)
    assert obj["new_outline"].strip()


def test_scripted_check_policies():
    goal = {"act_goal": "a goal", "characters": "", "dialogue_history": "", "background": ""}
    req = _request(TemplateId.CHECK_OBJECTIVE, goal)

    never = ScriptedBackend(check_policy="never")
    assert all(
        parse_check(never.complete(req, [])).completed is False for _ in range(12)
    )

    always = ScriptedBackend(check_policy="always")
    assert parse_check(always.complete(req, [])).completed is True

    after = ScriptedBackend(check_policy="after:3")
    verdicts = [parse_check(after.complete(req, [])).completed for _ in range(4)]
    assert verdicts == [False, False, True, True]


def test_scripted_check_counts_per_goal():
    backend = ScriptedBackend(check_policy="after:2")
    goal_a = _request(TemplateId.CHECK_OBJECTIVE, {"act_goal": "goal a"})
    goal_b = _request(TemplateId.CHECK_OBJECTIVE, {"act_goal": "goal b"})
    assert parse_check(backend.complete(goal_a, [])).completed is False
    # a different objective starts its own count
    assert parse_check(backend.complete(goal_b, [])).completed is False
    assert parse_check(backend.complete(goal_a, [])).completed is True


def test_scripted_bad_policy_rejected():
    with pytest.raises(ValueError):
        ScriptedBackend(check_policy="sometimes")
    with pytest.raises(ValueError):
        ScriptedBackend(check_policy="after:0")


def test_scripted_rules_take_priority_and_exhaust():
    rule = ScriptedRule(
        responses=["one", "two"], template=TemplateId.ACTOR_RESPONSE
    )
    backend = ScriptedBackend(rules=[rule], seed=0)
    req = _request(TemplateId.ACTOR_RESPONSE, {"name": "Alba"})
    assert backend.complete(req, []) == "one"
    assert backend.complete(req, []) == "two"
    # exhausted rule stops matching; synthesis takes over
    synthesized = backend.complete(req, [])
    assert synthesized not in ("one", "two")


def test_scripted_rule_contains_matches_rendered_text():
    rule = ScriptedRule(responses=["hit"], contains="magic phrase", cycle=True)
    backend = ScriptedBackend(rules=[rule], seed=0)
    req = _request(TemplateId.ACTOR_RESPONSE, {"name": "Alba"})
    messages = [ChatMessage(role=Role.USER, text="say the magic phrase now")]
    assert backend.complete(req, messages) == "hit"
    assert backend.complete(req, messages) == "hit"
    assert backend.complete(req, []) != "hit"


# ------------------------------------------------------------------- replay


def _record(template: TemplateId, messages, response: str) -> TranscriptRecord:
    return TranscriptRecord(
        tick=1,
        template=template.value,
        messages=tuple((role.value, text) for role, text in messages),
        response=response,
    )


def test_replay_serves_matching_calls():
    record = _record(TemplateId.MONOLOGUE, [(Role.SYSTEM, "prompt body")], "the line")
    backend = ReplayBackend([record])
    messages = [ChatMessage(role=Role.SYSTEM, text="prompt body")]
    assert backend.complete(_request(TemplateId.MONOLOGUE, {}), messages) == "the line"


def test_replay_rejects_wrong_template():
    record = _record(TemplateId.MONOLOGUE, [(Role.SYSTEM, "x")], "y")
    backend = ReplayBackend([record])
    with pytest.raises(ReplayDivergence, match="template"):
        backend.complete(
            _request(TemplateId.INTERVIEW, {}), [ChatMessage(role=Role.SYSTEM, text="x")]
        )


def test_replay_rejects_changed_prompt():
    record = _record(TemplateId.MONOLOGUE, [(Role.SYSTEM, "original")], "y")
    backend = ReplayBackend([record])
    with pytest.raises(ReplayDivergence, match="differs"):
        backend.complete(
            _request(TemplateId.MONOLOGUE, {}),
            [ChatMessage(role=Role.SYSTEM, text="tampered")],
        )


def test_replay_exhaustion():
    backend = ReplayBackend([])
    with pytest.raises(ReplayDivergence, match="exhausted"):
        backend.complete(_request(TemplateId.MONOLOGUE, {}), [])


def test_transcript_record_round_trip():
    record = _record(TemplateId.CHECK_OBJECTIVE, [(Role.USER, "ask")], "answer")
    assert TranscriptRecord.from_json_obj(record.to_json_obj()) == record


# --------------------------------------------------------------------- http


def _http_backend(handler) -> HttpBackend:
    transport = httpx.MockTransport(handler)
    return HttpBackend(HttpBackendConfig(base_url="https://chat.test/v1"), transport=transport)


def test_http_backend_posts_chat_payload():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["url"] = str(request.url)
        seen["payload"] = json.loads(request.content)
        return httpx.Response(
            200, json={"choices": [{"message": {"content": "a reply"}}]}
        )

    backend = _http_backend(handler)
    messages = [
        ChatMessage(role=Role.SYSTEM, text="be brief"),
        ChatMessage(role=Role.USER, text="speak"),
    ]
    out = backend.complete(_request(TemplateId.ACTOR_RESPONSE, {}), messages)
    assert out == "a reply"
    assert seen["url"].endswith("/chat/completions")
    assert seen["payload"]["messages"] == [
        {"role": "system", "content": "be brief"},
        {"role": "user", "content": "speak"},
    ]
    assert seen["payload"]["model"] == "gpt-3.5-turbo-1106"


def test_http_backend_error_status():
    backend = _http_backend(lambda request: httpx.Response(503, text="down"))
    with pytest.raises(BackendUnavailable, match="503"):
        backend.complete(_request(TemplateId.ACTOR_RESPONSE, {}), [])


def test_http_backend_bad_body():
    backend = _http_backend(lambda request: httpx.Response(200, json={"choices": []}))
    with pytest.raises(BackendUnavailable, match="content"):
        backend.complete(_request(TemplateId.ACTOR_RESPONSE, {}), [])


def test_http_backend_network_failure():
    def handler(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectError("refused")

    backend = _http_backend(handler)
    with pytest.raises(BackendUnavailable, match="unreachable"):
        backend.complete(_request(TemplateId.ACTOR_RESPONSE, {}), [])


# ------------------------------------------------------------------ gateway


def test_gateway_records_transcript_and_counts_calls():
    gateway = GatewayClient(ScriptedBackend(seed=0))
    gateway.current_tick = 7
    out = gateway.request(
        TemplateId.MONOLOGUE,
        {"name": "Alba", "description": "a botanist", "content": "the key is hidden"},
    )
    assert "the key is hidden" in out
    assert gateway.calls_made == 1
    record = gateway.transcript[0]
    assert record.tick == 7
    assert record.template == "monologue"
    assert record.response == out
    assert all(role in ("system", "user", "assistant") for role, _ in record.messages)


def test_gateway_budget_exhaustion():
    gateway = GatewayClient(ScriptedBackend(seed=0), call_limit=1)
    bindings = {"name": "Alba", "description": "d", "content": "c"}
    gateway.request(TemplateId.MONOLOGUE, bindings)
    with pytest.raises(BudgetExceeded):
        gateway.request(TemplateId.MONOLOGUE, bindings)
    # the refused call is not recorded
    assert gateway.calls_made == 1
    assert len(gateway.transcript) == 1


def test_gateway_corrective_note_is_appended_and_recorded():
    gateway = GatewayClient(ScriptedBackend(seed=0))
    bindings = {"name": "Alba", "description": "d", "content": "c"}
    gateway.request(TemplateId.MONOLOGUE, bindings, corrective_note="try harder")
    record = gateway.transcript[-1]
    assert record.messages[-1] == ("system", "try harder")
    # the note lands in bindings so scripted synthesis sees the retry
    assert "corrective_note" not in bindings


def test_gateway_retries_then_fails_on_unparseable_output():
    rule = ScriptedRule(responses=["junk"], template=TemplateId.CHECK_OBJECTIVE, cycle=True)
    gateway = GatewayClient(ScriptedBackend(rules=[rule], seed=0))
    with pytest.raises(GenerationFailed):
        gateway.request_parsed(TemplateId.CHECK_OBJECTIVE, CHECK_BINDINGS, parse_check)
    # initial call plus two corrective retries
    assert gateway.calls_made == 3
    retry_messages = gateway.transcript[1].messages
    assert any("could not be used" in text for _, text in retry_messages)


def test_gateway_retry_recovers_when_output_improves():
    rule = ScriptedRule(
        responses=["junk", '{"completed": true, "reason": "finally"}'],
        template=TemplateId.CHECK_OBJECTIVE,
    )
    gateway = GatewayClient(ScriptedBackend(rules=[rule], seed=0))
    result = gateway.request_parsed(TemplateId.CHECK_OBJECTIVE, CHECK_BINDINGS, parse_check)
    assert result.completed is True
    assert gateway.calls_made == 2


def test_gateway_revision_note_renders_rejected_line():
    gateway = GatewayClient(ScriptedBackend(seed=0))
    note = gateway.revision_note("the same line again")
    assert "the same line again" in note
    assert "repeat" in note.lower()
