"""Actor agents: observation, log compaction, and revised responses.

Each actor keeps its own view of the act log. When that view grows past
the summarize window, the head is condensed into recap points; each point
is rewritten as a first-person monologue and stored as a memory document,
and the view shrinks to one recap entry plus the kept suffix.

Responses go through a revision loop: a candidate is rejected as Abnormal
(empty or refusal boilerplate) or TooSimilar (relative edit distance to a
recent own line below the threshold), and rejected candidates trigger up
to two regenerations with a corrective note quoting the rejected line.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .config import MAX_GENERATIONS, REVISION_RECENT, EngineConfig
from .errors import GenerationFailed, OutOfOrderTick
from .gateway import (
    EMPTY_LOG_SENTINEL,
    NO_MEMORIES_SENTINEL,
    GatewayClient,
    InstructionResult,
    TemplateId,
    extract_line,
    parse_points,
)
from .kernels import relative_levenshtein
from .retrieval import CharacterStore, surface_text
from .script import NARRATION, DialogueTurn

REFUSAL_MARKERS = (
    "as an ai",
    "language model",
    "i cannot assist",
    "i can't assist",
    "cannot help with that request",
    "i'm unable to assist",
    "i am unable to assist",
)


class RejectionReason(str, enum.Enum):
    TOO_SIMILAR = "TooSimilar"
    ABNORMAL = "Abnormal"


@dataclass(frozen=True)
class Rejection:
    reason: RejectionReason
    candidate: str
    detail: str = ""
    distance: float | None = None


@dataclass(frozen=True)
class RevisionOutcome:
    """An accepted line plus the revision history that produced it."""

    line: str
    attempts: int
    rejections: tuple[Rejection, ...] = ()

    @property
    def revised(self) -> bool:
        return self.attempts > 1


@dataclass(frozen=True)
class LogEntry:
    role: str
    text: str
    tick: int
    is_summary: bool = False


@dataclass(frozen=True)
class SummaryResult:
    points: tuple[str, ...]
    recap: str


class ActorAgent:
    """One character's performer within a single act."""

    def __init__(
        self,
        store: CharacterStore,
        gateway: GatewayClient,
        config: EngineConfig,
        background: str = "",
    ):
        self.store = store
        self.gateway = gateway
        self.config = config
        self.background = background
        self.log: list[LogEntry] = []
        self.own_recent: list[str] = []
        self.last_seen_tick = 0

    @property
    def name(self) -> str:
        return self.store.name

    @property
    def description(self) -> str:
        return self.store.profile.description

    def observe(self, turn: DialogueTurn) -> None:
        """Append a realized turn to this actor's view of the act."""
        if turn.tick <= self.last_seen_tick:
            raise OutOfOrderTick(
                "%s saw tick %d after tick %d" % (self.name, turn.tick, self.last_seen_tick)
            )
        self.log.append(LogEntry(role=turn.role, text=turn.utterance, tick=turn.tick))
        self.last_seen_tick = turn.tick
        if turn.role == self.name:
            self.own_recent.append(turn.utterance)

    def history_text(self) -> str:
        if not self.log:
            return EMPTY_LOG_SENTINEL
        return "\n".join("%s: %s" % (entry.role, entry.text) for entry in self.log)

    @property
    def needs_summary(self) -> bool:
        return len(self.log) > self.config.summarize_window

    def maybe_summarize(self, now_tick: int) -> SummaryResult | None:
        """Compact the log head into recap points and memory documents.

        The previous recap entry is dropped rather than re-summarized; its
        points already live in the memory store. Afterwards the log holds
        the new recap entry plus the kept suffix.
        """
        if not self.needs_summary:
            return None
        keep = self.config.keep_suffix
        head = self.log[:-keep]
        suffix = self.log[-keep:]
        head_turns = [entry for entry in head if not entry.is_summary]
        history = "\n".join("%s: %s" % (entry.role, entry.text) for entry in head_turns)
        points = self.gateway.request_parsed(
            TemplateId.SUMMARIZE_LOG,
            {"name": self.name, "dialogue_history": history},
            parse_points,
        )
        for point in points:
            raw = self.gateway.request(
                TemplateId.MONOLOGUE,
                {"name": self.name, "description": self.description, "content": point},
            )
            monologue = extract_line(raw, self.name) or point
            self.store.memory.add(
                content=point,
                monologue=monologue,
                created_tick=now_tick,
                kind="summary",
            )
        recap = "(Earlier in this act: %s)" % " ".join(points)
        recap_entry = LogEntry(
            role=NARRATION, text=recap, tick=head[-1].tick, is_summary=True
        )
        self.log = [recap_entry] + suffix
        return SummaryResult(points=tuple(points), recap=recap)

    def _memories_text(self, query: str, now_tick: int) -> str:
        hits = self.store.memory.retrieve(query, self.config.retrieval_k, now_tick)
        if not hits:
            return NO_MEMORIES_SENTINEL
        return "\n".join(
            "%d. %s" % (index + 1, surface_text(doc, self.config.monologue_enabled))
            for index, (doc, _) in enumerate(hits)
        )

    def _impressions_text(self, scan_text: str) -> str:
        triggered = self.store.triggered(scan_text)
        return "\n".join(
            "Impression of %s: %s" % (relation.object, relation.monologue)
            for relation in triggered
        )

    def respond(
        self,
        now_tick: int,
        outline: str,
        instruction: InstructionResult | None,
    ) -> RevisionOutcome:
        """Produce one line of dialogue, revising rejected candidates."""
        if instruction is not None:
            query = "%s %s" % (instruction.synopsis, " ".join(instruction.keywords))
        else:
            query = " ".join(entry.text for entry in self.log[-3:])
        recent_text = "\n".join(entry.text for entry in self.log[-3:])
        bindings = {
            "name": self.name,
            "background": self.background,
            "description": self.description,
            "impressions": self._impressions_text(recent_text + "\n" + query),
            "relevant_memories": self._memories_text(query, now_tick),
            "dialogue_history": self.history_text(),
        }
        if instruction is not None:
            template = TemplateId.ACTOR_RESPONSE
            bindings["director_outline"] = outline
            bindings["instruction"] = "%s Keywords: %s" % (
                instruction.synopsis,
                ", ".join(instruction.keywords),
            )
        else:
            template = TemplateId.ACTOR_RESPONSE_NO_INSTRUCTION

        rejections: list[Rejection] = []
        best: tuple[float, str] | None = None
        note = None
        for attempt in range(1, MAX_GENERATIONS + 1):
            raw = self.gateway.request(template, bindings, corrective_note=note)
            line = extract_line(raw, self.name)
            rejection = self.revision_check(line)
            if rejection is None:
                return RevisionOutcome(line=line, attempts=attempt, rejections=tuple(rejections))
            rejections.append(rejection)
            if rejection.reason is RejectionReason.TOO_SIMILAR:
                distance = rejection.distance or 0.0
                if best is None or distance > best[0]:
                    best = (distance, line)
            note = self.gateway.revision_note(line if line else raw.strip()[:80])
        if best is not None:
            # all attempts too similar: keep the least similar one
            return RevisionOutcome(
                line=best[1], attempts=MAX_GENERATIONS, rejections=tuple(rejections)
            )
        raise GenerationFailed(
            "%s produced no usable line after %d attempts" % (self.name, MAX_GENERATIONS)
        )

    def revision_check(
        self, line: str, recent_own_utterances: list[str] | None = None
    ) -> Rejection | None:
        """Classify a candidate line; None means it is acceptable.

        ``recent_own_utterances`` overrides the actor's own history, which
        lets callers test the rule against arbitrary precedents.
        """
        stripped = line.strip()
        if not stripped:
            return Rejection(reason=RejectionReason.ABNORMAL, candidate=line, detail="empty")
        lowered = stripped.lower()
        for marker in REFUSAL_MARKERS:
            if marker in lowered:
                return Rejection(
                    reason=RejectionReason.ABNORMAL, candidate=line, detail=marker
                )
        if recent_own_utterances is None:
            recent_own_utterances = self.own_recent
        recent = recent_own_utterances[-REVISION_RECENT:]
        if recent:
            min_distance = min(relative_levenshtein(stripped, prev) for prev in recent)
            if min_distance < self.config.similarity_threshold:
                return Rejection(
                    reason=RejectionReason.TOO_SIMILAR,
                    candidate=line,
                    detail="%.3f" % min_distance,
                    distance=min_distance,
                )
        return None

    def interview_answer(
        self,
        question: str,
        history: list[tuple[str, str]],
        now_tick: int,
    ) -> str:
        """Answer an audience question in character; no play state changes."""
        interview_history = "\n".join(
            "Audience: %s\n%s: %s" % (q, self.name, a) for q, a in history
        )
        raw = self.gateway.request(
            TemplateId.INTERVIEW,
            {
                "name": self.name,
                "description": self.description,
                "background": self.background,
                "impressions": self._impressions_text(question),
                "relevant_memories": self._memories_text(question, now_tick),
                "dialogue_history": self.history_text(),
                "interview_history": interview_history,
                "question": question,
            },
        )
        return raw.strip()
