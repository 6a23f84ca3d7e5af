"""Director agent: planning, briefing, objective checks, decision log."""

from __future__ import annotations

import pytest

from stagecraft import EngineConfig
from stagecraft.director import DirectorAgent, Storyline
from stagecraft.errors import ValidationError
from stagecraft.gateway import (
    EMPTY_LOG_SENTINEL,
    NO_MEMORIES_SENTINEL,
    GatewayClient,
    ScriptedBackend,
    ScriptedRule,
    TemplateId,
)
from stagecraft.retrieval import CharacterStore, HashedEmbedder


def make_director(setting, rules=None, seed=0, **overrides) -> DirectorAgent:
    config = EngineConfig(seed=seed, **overrides)
    gateway = GatewayClient(ScriptedBackend(rules=rules or [], seed=seed))
    return DirectorAgent(setting=setting, gateway=gateway, config=config)


def make_stores(setting, act):
    embedder = HashedEmbedder()
    stores = {}
    for role in act.characters:
        profile = setting.character(role)
        if profile.kind.value == "actor":
            stores[role] = CharacterStore.from_setting(setting, role, embedder)
    return stores


@pytest.fixture()
def small_act(small_setting):
    return small_setting.act("g-1")


# ------------------------------------------------------------------ casting


def test_allowed_roles_excludes_the_player(small_setting, small_act):
    director = make_director(small_setting)
    roles = director.allowed_roles(small_act)
    assert roles == ["Narration", "Alba", "Bruno"]
    assert "Piet" not in roles


# ----------------------------------------------------------------- planning


def test_write_storyline_returns_outline_and_logs_it(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    storyline = director.write_storyline(
        small_act, objective, "", make_stores(small_setting, small_act), now_tick=1
    )
    assert isinstance(storyline, Storyline)
    assert storyline.act_id == "g-1"
    assert storyline.objective_id == objective.id
    assert storyline.new_outline.strip()
    assert [d.action for d in director.decision_log] == ["outline"]
    assert director.decision_log[0].objective_id == objective.id


def test_storyline_prompt_carries_scene_facts(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    stores = make_stores(small_setting, small_act)
    director.write_storyline(small_act, objective, "", stores, now_tick=1)
    joined = "\n".join(
        text for _, text in director.gateway.transcript[-1].messages
    )
    assert "Alba, Bruno, Piet" in joined
    assert EMPTY_LOG_SENTINEL in joined
    assert "Background of the scene: Evening." in joined
    # seeded memories surface through their monologue form
    assert "I buried the brass key under the third flagstone myself." in joined


def test_storyline_prompt_without_stores_shows_memory_sentinel(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    director.write_storyline(small_act, objective, "", {}, now_tick=1)
    joined = "\n".join(
        text for _, text in director.gateway.transcript[-1].messages
    )
    assert NO_MEMORIES_SENTINEL in joined


def test_storyline_prompt_includes_dialogue_so_far(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    log_text = "Bruno: Let me in.\nAlba: State your business."
    director.write_storyline(small_act, objective, log_text, {}, now_tick=3)
    joined = "\n".join(
        text for _, text in director.gateway.transcript[-1].messages
    )
    assert "Bruno: Let me in." in joined
    assert EMPTY_LOG_SENTINEL not in joined


# -------------------------------------------------------------- translation


def test_translate_script_respects_budget_and_roles(small_setting, small_act):
    director = make_director(small_setting)
    storyline = Storyline(
        act_id="g-1",
        objective_id="g-1/talk",
        previous_outline="",
        new_outline="Bruno presses; Alba deflects; the key stays hidden.",
    )
    turns = director.translate_script(small_act, storyline)
    assert 1 <= len(turns) <= director.config.script_line_budget
    allowed = set(director.allowed_roles(small_act))
    for turn in turns:
        assert turn.role in allowed
        assert turn.expected_utterance.strip()
    assert director.decision_log[-1].action == "script"
    assert director.decision_log[-1].detail == "lines=%d" % len(turns)


def test_translate_script_falls_back_to_narration(small_setting, small_act):
    rules = [
        ScriptedRule(
            responses=['{"scripts": []}', '{"scripts": []}'],
            template=TemplateId.TRANSLATE_SCRIPT,
        )
    ]
    director = make_director(small_setting, rules=rules)
    storyline = Storyline(
        act_id="g-1", objective_id="g-1/talk", previous_outline="", new_outline="Stall."
    )
    turns = director.translate_script(small_act, storyline)
    assert len(turns) == 1
    assert turns[0].role == "Narration"
    assert turns[0].expected_utterance == "(the scene continues)"
    # the empty first answer triggered one corrective retry
    assert director.gateway.calls_made == 2
    retry = director.gateway.transcript[-1]
    assert any("no usable lines" in text for _, text in retry.messages)


def test_translate_script_drops_player_lines(small_setting, small_act):
    payload = (
        '{"scripts": [{"role": "Piet", "content": "I sneak in."},'
        ' {"role": "Alba", "content": "Stay where you are."}]}'
    )
    rules = [ScriptedRule(responses=[payload], template=TemplateId.TRANSLATE_SCRIPT)]
    director = make_director(small_setting, rules=rules)
    storyline = Storyline(
        act_id="g-1", objective_id="g-1/talk", previous_outline="", new_outline="Guard."
    )
    turns = director.translate_script(small_act, storyline)
    assert [turn.role for turn in turns] == ["Alba"]


# -------------------------------------------------------------- instruction


def test_make_instruction_briefs_without_quoting(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    storyline = director.write_storyline(small_act, objective, "", {}, now_tick=1)
    planned = director.translate_script(small_act, storyline)[0]
    if planned.role == "Narration":
        planned = type(planned)(role="Alba", expected_utterance="The key is not for you.")
    instruction = director.make_instruction(small_act, objective, planned, "")
    assert instruction.synopsis.strip()
    assert instruction.keywords
    assert planned.expected_utterance.strip().lower() not in instruction.synopsis.lower()
    assert director.decision_log[-1].action == "instruct"
    assert director.decision_log[-1].detail == "role=%s" % planned.role


def test_make_instruction_replaces_verbatim_echo(small_setting, small_act):
    line = "The key is not for you."
    echo = "Synopsis: Say exactly this: The key is not for you.\nKeywords: key, refusal"
    rules = [ScriptedRule(responses=[echo], template=TemplateId.INSTRUCT_ACTOR)]
    director = make_director(small_setting, rules=rules)
    objective = small_act.objectives[0]
    from stagecraft.director import PlannedTurn

    planned = PlannedTurn(role="Alba", expected_utterance=line)
    instruction = director.make_instruction(small_act, objective, planned, "")
    assert line.lower() not in instruction.synopsis.lower()
    assert instruction.keywords == ("key", "refusal")


# ------------------------------------------------------------------- checks


def test_check_objective_records_source_and_turns(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    result = director.check_objective(small_act, objective, "some log", turns=5)
    assert result.completed in (True, False)
    record = director.decision_log[-1]
    assert record.action == "check"
    assert "source=scheduled" in record.detail
    assert "turns=5" in record.detail
    assert record.detail.startswith("completed") or record.detail.startswith("not_completed")


def test_scheduled_check_before_start_turn_is_refused(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    with pytest.raises(ValidationError):
        director.check_objective(small_act, objective, "log", turns=4)
    assert director.decision_log == []


def test_player_checks_may_run_early(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    result = director.check_objective(small_act, objective, "log", source="player", turns=1)
    assert result.completed in (True, False)
    assert "source=player turns=1" in director.decision_log[-1].detail


def test_unparseable_check_fails_safe(small_setting, small_act):
    rules = [
        ScriptedRule(
            responses=["no json here"], template=TemplateId.CHECK_OBJECTIVE, cycle=True
        )
    ]
    director = make_director(small_setting, rules=rules)
    objective = small_act.objectives[0]
    result = director.check_objective(small_act, objective, "log", turns=6)
    assert result.completed is False
    assert "not completed" in result.reason
    assert director.decision_log[-1].detail.startswith("not_completed")


def test_decision_log_covers_a_planning_cycle(small_setting, small_act):
    director = make_director(small_setting)
    objective = small_act.objectives[0]
    storyline = director.write_storyline(small_act, objective, "", {}, now_tick=1)
    planned = director.translate_script(small_act, storyline)
    for turn in planned:
        if turn.role != "Narration":
            director.make_instruction(small_act, objective, turn, "")
    director.check_objective(small_act, objective, "log", turns=5)
    actions = [d.action for d in director.decision_log]
    assert actions[0] == "outline"
    assert actions[1] == "script"
    assert actions[-1] == "check"
    assert set(actions[2:-1]) <= {"instruct"}
    assert all(d.act_id == "g-1" for d in director.decision_log)
