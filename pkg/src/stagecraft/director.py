"""The director agent: storyline planning, instruction, objective checks.

The director works from the canonical act log (never an actor's compacted
view). Every model-facing decision is appended to a decision log so runs
can be audited and scored afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import EngineConfig
from .errors import GenerationFailed, ValidationError
from .gateway import (
    EMPTY_LOG_SENTINEL,
    NO_MEMORIES_SENTINEL,
    CheckResult,
    GatewayClient,
    InstructionResult,
    TemplateId,
    parse_check,
    parse_instruction,
    parse_outline,
    parse_script,
)
from .retrieval import CharacterStore, surface_text
from .script import NARRATION, Act, CharacterKind, PlannedTurn, PlotObjective, ScriptSetting

FALLBACK_NARRATION = "(the scene continues)"

MEMORIES_PER_ACTOR = 2


@dataclass(frozen=True)
class Storyline:
    """One planned stretch of plot for an act's current objective."""

    act_id: str
    objective_id: str
    previous_outline: str
    new_outline: str


@dataclass(frozen=True)
class DecisionRecord:
    """One audited director decision."""

    tick: int
    act_id: str
    objective_id: str
    action: str
    detail: str = ""

    def to_json_obj(self) -> dict:
        return {
            "tick": self.tick,
            "act_id": self.act_id,
            "objective_id": self.objective_id,
            "action": self.action,
            "detail": self.detail,
        }


def _block(lines: list[str], empty: str = "(none)") -> str:
    """Multi-line binding that hangs off a label ending in a colon."""
    if not lines:
        return " " + empty
    return "\n" + "\n".join(lines)


class DirectorAgent:
    def __init__(self, setting: ScriptSetting, gateway: GatewayClient, config: EngineConfig):
        self.setting = setting
        self.gateway = gateway
        self.config = config
        self.decision_log: list[DecisionRecord] = []

    def note(self, act: Act, objective_id: str, action: str, detail: str = "") -> None:
        self.decision_log.append(
            DecisionRecord(
                tick=self.gateway.current_tick,
                act_id=act.id,
                objective_id=objective_id,
                action=action,
                detail=detail,
            )
        )

    def _characters(self, act: Act) -> str:
        return ", ".join(act.characters)

    def _descriptions(self, act: Act) -> str:
        lines = [
            "%s: %s" % (role, self.setting.character(role).description) for role in act.characters
        ]
        return _block(lines)

    def _act_relations(self, act: Act) -> list:
        roles = set(act.characters)
        return [
            relation
            for relation in self.setting.relations
            if relation.subject in roles and relation.object in roles
        ]

    def _relations(self, act: Act) -> str:
        lines = [
            "%s and %s: %s" % (relation.subject, relation.object, relation.content)
            for relation in self._act_relations(act)
        ]
        return _block(lines)

    def _impressions(self, act: Act) -> str:
        lines = [
            "%s about %s: %s" % (relation.subject, relation.object, relation.monologue)
            for relation in self._act_relations(act)
            if relation.monologue.strip()
        ]
        return _block(lines)

    def _background(self, act: Act) -> str:
        if not act.background.strip():
            return ""
        return "Background of the scene: %s" % act.background

    def _history(self, log_text: str) -> str:
        return "\n" + (log_text if log_text.strip() else EMPTY_LOG_SENTINEL)

    def _objective_memories(
        self,
        act: Act,
        objective: PlotObjective,
        stores: dict[str, CharacterStore],
        now_tick: int,
    ) -> str:
        """Per-actor top memories related to the objective text."""
        per_actor = min(MEMORIES_PER_ACTOR, self.config.retrieval_k)
        lines = []
        for role in act.characters:
            store = stores.get(role)
            if store is None:
                continue
            for doc, _ in store.memory.retrieve(objective.text, per_actor, now_tick):
                lines.append(
                    "%s: %s" % (role, surface_text(doc, self.config.monologue_enabled))
                )
        return _block(lines, empty=NO_MEMORIES_SENTINEL)

    def write_storyline(
        self,
        act: Act,
        objective: PlotObjective,
        log_text: str,
        stores: dict[str, CharacterStore],
        now_tick: int,
    ) -> Storyline:
        """Plan the next stretch of plot for the act's current objective."""
        result = self.gateway.request_parsed(
            TemplateId.WRITE_OUTLINE,
            {
                "characters": self._characters(act),
                "descriptions": self._descriptions(act),
                "relations": self._relations(act),
                "impressions": self._impressions(act),
                "dialogue_history": self._history(log_text),
                "background": self._background(act),
                "act_goal": objective.text,
                "memories": self._objective_memories(act, objective, stores, now_tick),
            },
            parse_outline,
        )
        self.note(act, objective.id, "outline")
        return Storyline(
            act_id=act.id,
            objective_id=objective.id,
            previous_outline=result.previous_outline,
            new_outline=result.new_outline,
        )

    def allowed_roles(self, act: Act) -> list[str]:
        """Speakers a planned script may use: Narration plus the act's actors.

        Player-kind characters are excluded; the plan cannot speak for the
        human player.
        """
        roles = [NARRATION]
        for role in act.characters:
            if self.setting.character(role).kind is not CharacterKind.PLAYER:
                roles.append(role)
        return roles

    def translate_script(self, act: Act, storyline: Storyline) -> list[PlannedTurn]:
        """Turn a storyline into at most script_line_budget planned turns."""
        budget = self.config.script_line_budget
        allowed = self.allowed_roles(act)
        bindings = {
            "characters": self._characters(act),
            "relations": self._relations(act),
            "prev_outline": storyline.previous_outline or "(the act has not started yet)",
            "background": self._background(act),
            "act_outline": storyline.new_outline,
            "num_lines": str(budget),
        }

        def parser(text: str) -> list[PlannedTurn]:
            return parse_script(text, budget, allowed)

        turns = self.gateway.request_parsed(TemplateId.TRANSLATE_SCRIPT, bindings, parser)
        if not turns:
            turns = self.gateway.request_parsed(
                TemplateId.TRANSLATE_SCRIPT,
                bindings,
                parser,
                corrective_note=(
                    "The script you wrote had no usable lines. Write at least one line "
                    "spoken by a character in the scene, in the required JSON format."
                ),
            )
        if not turns:
            turns = [PlannedTurn(role=NARRATION, expected_utterance=FALLBACK_NARRATION)]
        self.note(act, storyline.objective_id, "script", detail="lines=%d" % len(turns))
        return turns

    def _mechanical_synopsis(self, content: str) -> str:
        """Non-verbatim fallback when the model echoes the planned line."""
        words = [word[:4] for word in content.split()[::3]][:6]
        synopsis = "Convey this beat indirectly: %s ..." % " ".join(words)
        if content.strip() and content.strip().lower() in synopsis.lower():
            return "Convey the intended beat in your own words, keeping its meaning."
        return synopsis

    def make_instruction(
        self,
        act: Act,
        objective: PlotObjective,
        planned: PlannedTurn,
        log_text: str,
    ) -> InstructionResult:
        """Brief the actor for a planned line without quoting it."""
        result = self.gateway.request_parsed(
            TemplateId.INSTRUCT_ACTOR,
            {
                "characters": self._characters(act),
                "relations": self._relations(act),
                "dialogue_history": self._history(log_text),
                "background": self._background(act),
                "act_goal": objective.text,
                "actor_name": planned.role,
                "content": planned.expected_utterance,
                "description": self.setting.character(planned.role).description,
            },
            parse_instruction,
        )
        content = planned.expected_utterance.strip()
        if content and content.lower() in result.synopsis.lower():
            result = InstructionResult(
                synopsis=self._mechanical_synopsis(content), keywords=result.keywords
            )
        self.note(act, objective.id, "instruct", detail="role=%s" % planned.role)
        return result

    def check_objective(
        self,
        act: Act,
        objective: PlotObjective,
        log_text: str,
        source: str = "scheduled",
        turns: int = 0,
    ) -> CheckResult:
        """Ask whether the objective is satisfied; failure means no.

        A gateway failure is treated as "not completed" so a flaky model
        can never silently skip plot. Scheduled checks may not run before
        the configured start turn; only a player action may check early.
        """
        if source == "scheduled" and turns < self.config.check_start:
            raise ValidationError(
                "scheduled check at turn %d precedes start turn %d"
                % (turns, self.config.check_start)
            )
        try:
            result = self.gateway.request_parsed(
                TemplateId.CHECK_OBJECTIVE,
                {
                    "characters": self._characters(act),
                    "dialogue_history": self._history(log_text),
                    "background": self._background(act),
                    "act_goal": objective.text,
                },
                parse_check,
            )
        except GenerationFailed:
            result = CheckResult(
                completed=False, reason="check unavailable; treating as not completed"
            )
        self.note(
            act,
            objective.id,
            "check",
            detail="%s source=%s turns=%d"
            % ("completed" if result.completed else "not_completed", source, turns),
        )
        return result
