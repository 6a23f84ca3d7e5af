"""Session orchestration: staged acts, ticks, player actions, pausing.

A session plays every act to completion, column by column. Each tick
advances exactly one incomplete act in the current column (round-robin).
A pending player line is consumed on its act's next tick and triggers an
immediate objective check: completion advances the plot, anything else
rebuilds the storyline around what the player said.

Pausing freezes the play for in-character interviews. Interviews run on
deep copies of the actors, so resuming continues the play bit-for-bit as
if the pause never happened.
"""

from __future__ import annotations

import copy
import enum
import hashlib
import json
from dataclasses import dataclass

from .actor import ActorAgent
from .config import EngineConfig
from .director import DirectorAgent, Storyline
from .errors import (
    CooldownViolation,
    NotPaused,
    SessionFinished,
    SessionNotRunning,
    UnknownAct,
    UnknownRole,
    ValidationError,
)
from .gateway import Backend, GatewayClient, ScriptedBackend, TemplateSet
from .retrieval import CharacterStore, HashedEmbedder
from .script import (
    NARRATION,
    Act,
    CharacterKind,
    DialogueTurn,
    PlannedTurn,
    PlotObjective,
    ScriptSetting,
)


class TurnEventKind(str, enum.Enum):
    PLANNED = "Planned"
    ACTOR_RESPONSE = "ActorResponse"
    PLAYER_ACTION = "PlayerAction"
    FORCE_COMPLETE = "ForceComplete"
    OBJECTIVE_ADVANCED = "ObjectiveAdvanced"
    STORYLINE_REBUILT = "StorylineRebuilt"
    ACT_COMPLETE = "ActComplete"
    COLUMN_ADVANCED = "ColumnAdvanced"


@dataclass(frozen=True)
class TurnEvent:
    """One observable engine event, globally ordered by ``sequence``."""

    sequence: int
    tick: int
    kind: TurnEventKind
    act_id: str
    role: str = ""
    text: str = ""
    detail: str = ""
    objective_id: str = ""

    def to_json_obj(self) -> dict:
        return {
            "sequence": self.sequence,
            "tick": self.tick,
            "kind": self.kind.value,
            "act_id": self.act_id,
            "role": self.role,
            "text": self.text,
            "detail": self.detail,
            "objective_id": self.objective_id,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TurnEvent":
        return cls(
            sequence=int(obj["sequence"]),
            tick=int(obj["tick"]),
            kind=TurnEventKind(obj["kind"]),
            act_id=str(obj.get("act_id", "")),
            role=str(obj.get("role", "")),
            text=str(obj.get("text", "")),
            detail=str(obj.get("detail", "")),
            objective_id=str(obj.get("objective_id", "")),
        )


class ActRun:
    """Mutable play state for one act."""

    def __init__(self, act: Act, actors: dict[str, ActorAgent]):
        self.act = act
        self.actors = actors
        self.log: list[DialogueTurn] = []
        self.objective_index = 0
        self.turns_on_objective = 0
        self.storyline: Storyline | None = None
        self.planned: list[PlannedTurn] = []
        self.cursor = 0
        self.complete = False
        self.pending_player: str | None = None
        self.player_mark: int | None = None

    @property
    def current_objective(self) -> PlotObjective:
        return self.act.objectives[self.objective_index]

    def log_text(self) -> str:
        return "\n".join("%s: %s" % (turn.role, turn.utterance) for turn in self.log)


class InterviewSession:
    """In-character Q&A against a frozen copy of one actor."""

    def __init__(self, actor: ActorAgent, now_tick: int):
        self.actor = actor
        self._now_tick = now_tick
        self.history: list[tuple[str, str]] = []

    @property
    def role(self) -> str:
        return self.actor.name

    def ask(self, question: str) -> str:
        if not question.strip():
            raise ValidationError("interview question must be non-empty")
        answer = self.actor.interview_answer(question, self.history, self._now_tick)
        self.history.append((question, answer))
        return answer


class PlaySession:
    """One full run of a script setting."""

    def __init__(
        self,
        setting: ScriptSetting,
        config: EngineConfig | None = None,
        backend: Backend | None = None,
        templates: TemplateSet | None = None,
    ):
        self.setting = setting
        self.config = config if config is not None else EngineConfig()
        if backend is None:
            backend = ScriptedBackend(seed=self.config.seed)
        self.backend = backend
        self.embedder = HashedEmbedder()
        self.gateway = GatewayClient(
            backend, templates=templates, call_limit=self.config.llm_call_limit
        )
        self.director = DirectorAgent(setting, self.gateway, self.config)
        self.stores: dict[str, CharacterStore] = {}
        for profile in setting.characters:
            if profile.kind is CharacterKind.ACTOR:
                self.stores[profile.role] = CharacterStore.from_setting(
                    setting, profile.role, self.embedder
                )
        self.acts = [self._make_act_run(act) for act in setting.acts]
        self._acts_by_id = {run.act.id: run for run in self.acts}
        self.column = 0
        self.tick_count = 0
        self.events: list[TurnEvent] = []
        self._sequence = 0
        self._rr = 0
        self.status = "running"
        self.session_id = "play-" + hashlib.sha256(
            ("%d|%s" % (self.config.seed, setting.title)).encode("utf-8")
        ).hexdigest()[:12]

    def _make_act_run(self, act: Act) -> ActRun:
        actors = {}
        for role in act.characters:
            if self.setting.character(role).kind is CharacterKind.ACTOR:
                actors[role] = ActorAgent(
                    store=self.stores[role],
                    gateway=self.gateway,
                    config=self.config,
                    background=act.background,
                )
        return ActRun(act=act, actors=actors)

    def _emit(
        self,
        kind: TurnEventKind,
        act_id: str,
        role: str = "",
        text: str = "",
        detail: str = "",
        objective_id: str = "",
    ) -> TurnEvent:
        event = TurnEvent(
            sequence=self._sequence,
            tick=self.tick_count,
            kind=kind,
            act_id=act_id,
            role=role,
            text=text,
            detail=detail,
            objective_id=objective_id,
        )
        self._sequence += 1
        self.events.append(event)
        return event

    def _column_active(self) -> list[ActRun]:
        return [
            run for run in self.acts if run.act.column == self.column and not run.complete
        ]

    # ------------------------------------------------------------------ ticks

    def tick(self) -> list[TurnEvent]:
        """Advance one act by one turn; returns the events it produced."""
        if self.status == "finished":
            raise SessionFinished("session %s has finished" % self.session_id)
        if self.status != "running":
            raise SessionNotRunning("session is paused")
        active = self._column_active()
        run = active[self._rr % len(active)]
        self._rr += 1
        self.tick_count += 1
        self.gateway.current_tick = self.tick_count
        first_new = len(self.events)
        if run.pending_player is not None:
            self._play_player_turn(run)
        else:
            self._play_planned_turn(run)
        return self.events[first_new:]

    def run_to_completion(self, max_ticks: int = 5000) -> "PlaySession":
        while self.status == "running" and self.tick_count < max_ticks:
            self.tick()
        return self

    def _realize(self, run: ActRun, turn: DialogueTurn) -> None:
        run.log.append(turn)
        for actor in run.actors.values():
            actor.observe(turn)
        for actor in run.actors.values():
            actor.maybe_summarize(self.tick_count)
        run.turns_on_objective += 1

    def _play_planned_turn(self, run: ActRun) -> None:
        objective = run.current_objective
        if run.storyline is None or run.cursor >= len(run.planned):
            # includes silent re-planning when the planned script runs out
            self._plan(run)
        planned = run.planned[run.cursor]
        run.cursor += 1
        if planned.role == NARRATION:
            realized = DialogueTurn(
                role=NARRATION, utterance=planned.expected_utterance, tick=self.tick_count
            )
            self._emit(
                TurnEventKind.PLANNED,
                run.act.id,
                role=NARRATION,
                text=planned.expected_utterance,
                objective_id=objective.id,
            )
        else:
            actor = run.actors[planned.role]
            instruction = None
            if self.config.instruction_enabled:
                instruction = self.director.make_instruction(
                    run.act, objective, planned, run.log_text()
                )
            outcome = actor.respond(self.tick_count, run.storyline.new_outline, instruction)
            realized = DialogueTurn(
                role=planned.role, utterance=outcome.line, tick=self.tick_count
            )
            self._emit(
                TurnEventKind.ACTOR_RESPONSE,
                run.act.id,
                role=planned.role,
                text=outcome.line,
                detail="attempts=%d" % outcome.attempts if outcome.revised else "",
                objective_id=objective.id,
            )
        self._realize(run, realized)
        self._after_turn(run, objective, player=False)

    def _play_player_turn(self, run: ActRun) -> None:
        text = run.pending_player
        run.pending_player = None
        objective = run.current_objective
        self._emit(
            TurnEventKind.PLAYER_ACTION,
            run.act.id,
            role=self.setting.player_role,
            text=text,
            objective_id=objective.id,
        )
        realized = DialogueTurn(
            role=self.setting.player_role, utterance=text, tick=self.tick_count
        )
        self._realize(run, realized)
        run.player_mark = len(run.log)
        self._after_turn(run, objective, player=True)

    def _after_turn(self, run: ActRun, objective: PlotObjective, player: bool) -> None:
        turns = run.turns_on_objective
        if turns >= self.config.force_complete:
            self.director.note(run.act, objective.id, "force", detail="turns=%d" % turns)
            self._emit(
                TurnEventKind.FORCE_COMPLETE,
                run.act.id,
                detail="turns=%d" % turns,
                objective_id=objective.id,
            )
            self._advance_objective(run, source="force")
            return
        if player:
            # a player line is checked immediately, however early
            result = self.director.check_objective(
                run.act, objective, run.log_text(), source="player", turns=turns
            )
            if result.completed:
                self._advance_objective(run, source="player")
            else:
                self._rebuild_storyline(run, objective)
            return
        if turns >= self.config.check_start:
            result = self.director.check_objective(
                run.act, objective, run.log_text(), turns=turns
            )
            if result.completed:
                self._advance_objective(run, source="check")

    def _plan(self, run: ActRun) -> None:
        objective = run.current_objective
        run.storyline = self.director.write_storyline(
            run.act, objective, run.log_text(), self.stores, self.tick_count
        )
        run.planned = self.director.translate_script(run.act, run.storyline)
        run.cursor = 0

    def _rebuild_storyline(self, run: ActRun, objective: PlotObjective) -> None:
        self._plan(run)
        self._emit(
            TurnEventKind.STORYLINE_REBUILT,
            run.act.id,
            detail="player",
            objective_id=objective.id,
        )

    def _advance_objective(self, run: ActRun, source: str) -> None:
        objective = run.current_objective
        self._emit(
            TurnEventKind.OBJECTIVE_ADVANCED,
            run.act.id,
            detail=source,
            objective_id=objective.id,
        )
        run.objective_index += 1
        run.turns_on_objective = 0
        run.storyline = None
        run.planned = []
        run.cursor = 0
        if run.objective_index >= len(run.act.objectives):
            run.complete = True
            self._emit(TurnEventKind.ACT_COMPLETE, run.act.id)
            if not self._column_active():
                if self.column < self.setting.max_column:
                    self.column += 1
                    self._rr = 0
                    self._emit(
                        TurnEventKind.COLUMN_ADVANCED,
                        run.act.id,
                        detail="column=%d" % self.column,
                    )
                else:
                    self.status = "finished"

    # ----------------------------------------------------------- player input

    def player_speak(self, act_id: str, text: str) -> None:
        """Queue a player line; it is played on the act's next tick."""
        if self.status == "finished":
            raise SessionFinished("session %s has finished" % self.session_id)
        if self.status != "running":
            raise SessionNotRunning("session is paused")
        run = self._acts_by_id.get(act_id)
        if run is None:
            raise UnknownAct("no act %r in this play" % act_id)
        if run.complete or run.act.column != self.column:
            raise ValidationError("act %r is not currently active" % act_id)
        if not text.strip():
            raise ValidationError("player text must be non-empty")
        if run.pending_player is not None:
            raise CooldownViolation("a player line is already pending for act %r" % act_id)
        if run.player_mark is not None:
            since = len(run.log) - run.player_mark
            if since < self.config.player_cooldown_turns:
                raise CooldownViolation(
                    "player must wait %d more turn(s) in act %r"
                    % (self.config.player_cooldown_turns - since, act_id)
                )
        run.pending_player = text.strip()

    # -------------------------------------------------------- pause and resume

    def pause(self) -> None:
        if self.status == "finished":
            raise SessionFinished("session %s has finished" % self.session_id)
        if self.status != "running":
            raise SessionNotRunning("session is already paused")
        self.status = "paused"

    def resume(self) -> None:
        if self.status != "paused":
            raise NotPaused("session is not paused")
        self.status = "running"

    def interview(self, act_id: str, role: str) -> InterviewSession:
        """Open an interview with one actor; only allowed while paused.

        The interview works on a deep copy of the actor (model backend,
        setting, embedder, and templates stay shared), so no question can
        leak into the play.
        """
        if self.status != "paused":
            raise NotPaused("pause the session before interviewing")
        run = self._acts_by_id.get(act_id)
        if run is None:
            raise UnknownAct("no act %r in this play" % act_id)
        actor = run.actors.get(role)
        if actor is None:
            raise UnknownRole("no actor %r in act %r" % (role, act_id))
        memo = {
            id(self.backend): self.backend,
            id(self.setting): self.setting,
            id(self.embedder): self.embedder,
            id(self.gateway.templates): self.gateway.templates,
        }
        actor_copy = copy.deepcopy(actor, memo)
        actor_copy.gateway.call_limit = None
        return InterviewSession(actor=actor_copy, now_tick=self.tick_count)

    # ----------------------------------------------------------------- digest

    def state_snapshot(self) -> dict:
        """Play state as plain data; equal states give equal snapshots."""
        transcript_sha = hashlib.sha256(
            json.dumps(
                [record.to_json_obj() for record in self.gateway.transcript],
                sort_keys=True,
                ensure_ascii=False,
            ).encode("utf-8")
        ).hexdigest()
        return {
            "session_id": self.session_id,
            "tick_count": self.tick_count,
            "column": self.column,
            "status": self.status,
            "rr": self._rr,
            "acts": [
                {
                    "id": run.act.id,
                    "complete": run.complete,
                    "objective_index": run.objective_index,
                    "turns_on_objective": run.turns_on_objective,
                    "cursor": run.cursor,
                    "pending_player": run.pending_player,
                    "player_mark": run.player_mark,
                    "storyline": (
                        [run.storyline.previous_outline, run.storyline.new_outline]
                        if run.storyline is not None
                        else None
                    ),
                    "planned": [[t.role, t.expected_utterance] for t in run.planned],
                    "log": [[t.role, t.utterance, t.tick] for t in run.log],
                    "actors": {
                        name: {
                            "log": [
                                [e.role, e.text, e.tick, e.is_summary] for e in actor.log
                            ],
                            "own_recent": list(actor.own_recent),
                            "last_seen_tick": actor.last_seen_tick,
                        }
                        for name, actor in run.actors.items()
                    },
                }
                for run in self.acts
            ],
            "memories": {
                name: [
                    [doc.id, doc.content, doc.monologue, doc.created_tick, doc.kind]
                    for doc in store.memory.documents
                ]
                for name, store in self.stores.items()
            },
            "gateway": {"calls": self.gateway.calls_made, "transcript": transcript_sha},
            "events": len(self.events),
            "decisions": len(self.director.decision_log),
        }

    def state_digest(self) -> str:
        canonical = json.dumps(
            self.state_snapshot(), sort_keys=True, ensure_ascii=False, separators=(",", ":")
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def start_session(
    setting: ScriptSetting,
    config: EngineConfig | None = None,
    backend: Backend | None = None,
    templates: TemplateSet | None = None,
) -> PlaySession:
    return PlaySession(setting, config=config, backend=backend, templates=templates)
