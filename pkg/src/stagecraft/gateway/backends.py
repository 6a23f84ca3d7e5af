"""Model backends and the gateway client that fronts them.

Three interchangeable backends:

* ScriptedBackend: deterministic offline model. Explicit rules answer
  matching requests; anything else is synthesized from a seeded hash of the
  request, so equal requests always get equal text.
* ReplayBackend: serves a recorded transcript back, verifying that the
  engine renders the same prompts in the same order.
* HttpBackend: an OpenAI-style chat-completions endpoint over httpx.

GatewayClient renders templates, enforces the call budget, keeps the
transcript, and retries unparseable output with a corrective note.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Callable, Protocol, TypeVar

import httpx

from ..errors import (
    BackendUnavailable,
    BudgetExceeded,
    GenerationFailed,
    MalformedOutput,
    ReplayDivergence,
)
from .templates import ChatMessage, Role, TemplateId, TemplateSet, load_templates

T = TypeVar("T")

NO_MEMORIES_SENTINEL = "(no relevant memories)"
EMPTY_LOG_SENTINEL = "(the act has just begun)"


@dataclass(frozen=True)
class DecodeHints:
    temperature: float | None = None
    max_output_tokens: int | None = None


@dataclass(frozen=True)
class LlmRequest:
    template: TemplateId
    bindings: dict[str, str]
    hints: DecodeHints = field(default_factory=DecodeHints)


class Backend(Protocol):
    name: str

    def complete(self, request: LlmRequest, messages: list[ChatMessage]) -> str: ...


@dataclass(frozen=True)
class TranscriptRecord:
    """One gateway call: what was sent and what came back."""

    tick: int
    template: str
    messages: tuple[tuple[str, str], ...]
    response: str

    def to_json_obj(self) -> dict:
        return {
            "tick": self.tick,
            "template": self.template,
            "messages": [{"role": role, "text": text} for role, text in self.messages],
            "response": self.response,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TranscriptRecord":
        return cls(
            tick=int(obj["tick"]),
            template=str(obj["template"]),
            messages=tuple((str(m["role"]), str(m["text"])) for m in obj["messages"]),
            response=str(obj["response"]),
        )


@dataclass
class ScriptedRule:
    """Canned responses for requests matching a template and/or substring.

    ``contains`` is searched in the rendered prompt text. Responses are
    consumed front to back; with ``cycle`` they repeat forever. A rule with
    an exhausted queue stops matching.
    """

    responses: list[str]
    template: TemplateId | None = None
    contains: str | None = None
    cycle: bool = False

    def matches(self, request: LlmRequest, messages: list[ChatMessage]) -> bool:
        if not self.responses:
            return False
        if self.template is not None and request.template != self.template:
            return False
        if self.contains is not None:
            if not any(self.contains in m.text for m in messages):
                return False
        return True

    def take(self) -> str:
        response = self.responses.pop(0)
        if self.cycle:
            self.responses.append(response)
        return response


def _canonical_bindings(bindings: dict[str, str]) -> str:
    return json.dumps(bindings, sort_keys=True, ensure_ascii=False)


_OPENERS = (
    "Hold a moment.",
    "Hear me out.",
    "Say what you will.",
    "I have thought on it.",
    "Mark this.",
    "Softly now.",
    "There it is, then.",
    "No more circling.",
    "Let us be plain.",
    "I will not pretend otherwise.",
    "Give me a breath.",
    "You press hard.",
    "So be it.",
    "Careful, now.",
    "That much is true.",
    "We both know it.",
)

_CORES = (
    "We keep to the course we set, whatever the cost.",
    "The truth of it sits badly with me, but it is the truth.",
    "I would sooner speak it aloud than carry it further.",
    "What was done that night cannot be smoothed over.",
    "There is still a way through, if we take it together.",
    "I trust the work of my own hands over any rumor.",
    "Someone here knows more than they have said.",
    "The hour is against us, and pretending will not slow it.",
    "I made my choice long before you asked me for it.",
    "Let the record show what actually happened.",
    "We owe the others a plain accounting, not comfort.",
    "If I am wrong, I will answer for it myself.",
)

_TWISTS = (
    "An old doubt resurfaces just as the matter seems settled.",
    "A withheld detail finally comes out, changing the mood.",
    "One of them presses the point further than the others expect.",
    "A quiet admission shifts where the blame is thought to lie.",
    "The group edges toward agreement, though unease remains.",
    "A practical obstacle forces the plan into the open.",
)

_SUMMARY_CLAUSES = (
    "a disagreement over the next step was aired and narrowed",
    "an earlier account was challenged and partly corrected",
    "a piece of withheld information was finally spoken aloud",
    "responsibilities for the coming hours were divided",
    "an old grievance surfaced and was set aside for now",
    "the group weighed the risks and chose to press on",
)


def _elide(text: str) -> str:
    """Compress a line so it can be described without quoting it."""
    words = [w[:6] for w in text.split()[::2]][:8]
    return " ".join(words) + " ..."


class ScriptedBackend:
    """Deterministic offline backend driven by rules plus synthesis.

    ``check_policy`` decides synthesized objective checks: "never" fails
    every check, "always" passes, "after:N" passes once the same objective
    has been checked N times.
    """

    name = "scripted"

    def __init__(
        self,
        rules: list[ScriptedRule] | None = None,
        check_policy: str = "after:2",
        seed: int = 0,
    ):
        self.rules = list(rules or [])
        self.seed = seed
        self.check_policy = check_policy
        self._check_counts: dict[str, int] = {}
        if check_policy in ("never", "always"):
            self._check_after = None
        elif check_policy.startswith("after:"):
            self._check_after = int(check_policy.split(":", 1)[1])
            if self._check_after < 1:
                raise ValueError("check_policy 'after:N' needs N >= 1")
        else:
            raise ValueError("unknown check_policy: %r" % check_policy)

    def complete(self, request: LlmRequest, messages: list[ChatMessage]) -> str:
        for rule in self.rules:
            if rule.matches(request, messages):
                return rule.take()
        return self._synthesize(request)

    def _digest(self, request: LlmRequest) -> int:
        seedtext = "%d|%s|%s" % (
            self.seed,
            request.template.value,
            _canonical_bindings(request.bindings),
        )
        raw = hashlib.sha256(seedtext.encode("utf-8")).digest()
        return int.from_bytes(raw[:8], "big")

    def _synthesize(self, request: LlmRequest) -> str:
        b = request.bindings
        h = self._digest(request)
        template = request.template
        if template == TemplateId.WRITE_OUTLINE:
            history = b.get("dialogue_history", "")
            if history.strip() in ("", EMPTY_LOG_SENTINEL):
                prev = "The act is only beginning; nothing has been settled yet."
            else:
                prev = "So far the characters have talked their way closer to the matter at hand."
            goal = " ".join(b.get("act_goal", "").split()[:14])
            new = "The scene presses toward its goal (%s). %s" % (goal, _TWISTS[h % len(_TWISTS)])
            return json.dumps({"previous_outline": prev, "new_outline": new})
        if template == TemplateId.TRANSLATE_SCRIPT:
            speakers = [c.strip() for c in b.get("characters", "").split(",") if c.strip()]
            if not speakers:
                speakers = ["Narration"]
            n = max(1, int(b.get("num_lines", "5")))
            lines = []
            for i in range(n):
                if (h + i) % 5 == 0:
                    lines.append(
                        {
                            "role": "Narration",
                            "content": "(A beat passes; the room settles. mark %d-%d)"
                            % (h % 97, i),
                        }
                    )
                else:
                    lines.append(
                        {
                            "role": speakers[(h + i) % len(speakers)],
                            "content": "%s (mark %d-%d)" % (_CORES[(h + i) % len(_CORES)], h % 97, i),
                        }
                    )
            return json.dumps({"scripts": lines})
        if template == TemplateId.INSTRUCT_ACTOR:
            content = b.get("content", "")
            keywords = []
            for token in (content + " " + b.get("act_goal", "")).lower().split():
                token = "".join(ch for ch in token if ch.isalnum())
                if len(token) >= 4 and token not in keywords:
                    keywords.append(token)
                if len(keywords) == 4:
                    break
            if not keywords:
                keywords = ["steady", "present", "direct", "succinct"]
            return "Synopsis: Convey, in your own words, this beat: %s\nKeywords: %s" % (
                _elide(content),
                ", ".join(keywords),
            )
        if template in (TemplateId.ACTOR_RESPONSE, TemplateId.ACTOR_RESPONSE_NO_INSTRUCTION):
            return "%s %s (beat %d)" % (
                _OPENERS[h % len(_OPENERS)],
                _CORES[(h >> 8) % len(_CORES)],
                h % 977,
            )
        if template == TemplateId.CHECK_OBJECTIVE:
            goal = b.get("act_goal", "")
            count = self._check_counts.get(goal, 0) + 1
            self._check_counts[goal] = count
            if self.check_policy == "never":
                completed = False
            elif self.check_policy == "always":
                completed = True
            else:
                completed = count >= self._check_after
            reason = (
                "The objective is reflected in the script."
                if completed
                else "The script has not yet reached the objective."
            )
            return json.dumps({"completed": completed, "reason": reason})
        if template == TemplateId.SUMMARIZE_LOG:
            count = 2 + h % 2
            points = [
                "- In this stretch of the play, %s (note %d-%d)."
                % (_SUMMARY_CLAUSES[(h + i) % len(_SUMMARY_CLAUSES)], h % 9973, i)
                for i in range(count)
            ]
            return "\n".join(points)
        if template == TemplateId.MONOLOGUE:
            return "I keep this close: %s" % b.get("content", "").strip()
        if template == TemplateId.INTERVIEW:
            question = " ".join(b.get("question", "").split()[:10])
            return "%s You ask of %s; I will speak plainly, as I did then. (beat %d)" % (
                _OPENERS[h % len(_OPENERS)],
                question or "the play",
                h % 977,
            )
        if template == TemplateId.JUDGE_STORYLINE:
            return json.dumps(
                {
                    "storyline_logicality": 1 + h % 4,
                    "storyline_coherence": 1 + (h >> 2) % 4,
                    "character_consistency": 1 + (h >> 4) % 4,
                }
            )
        raise BackendUnavailable(
            "scripted backend cannot synthesize template %r" % template.value
        )


class ReplayBackend:
    """Replays a recorded transcript, verifying prompts match exactly."""

    name = "replay"

    def __init__(self, records: list[TranscriptRecord]):
        self.records = list(records)
        self.cursor = 0

    def complete(self, request: LlmRequest, messages: list[ChatMessage]) -> str:
        if self.cursor >= len(self.records):
            raise ReplayDivergence(
                "transcript exhausted after %d calls; engine asked for %r"
                % (len(self.records), request.template.value)
            )
        record = self.records[self.cursor]
        if record.template != request.template.value:
            raise ReplayDivergence(
                "call %d requested template %r but transcript has %r"
                % (self.cursor, request.template.value, record.template)
            )
        rendered = tuple((m.role.value, m.text) for m in messages)
        if rendered != record.messages:
            raise ReplayDivergence(
                "call %d (%s): rendered prompt differs from transcript"
                % (self.cursor, record.template)
            )
        self.cursor += 1
        return record.response


@dataclass(frozen=True)
class HttpBackendConfig:
    base_url: str = "https://api.openai.com/v1"
    model: str = "gpt-3.5-turbo-1106"
    api_key_env: str = "OPENAI_API_KEY"
    timeout: float = 60.0


class HttpBackend:
    """OpenAI-style chat-completions backend."""

    name = "http"

    def __init__(self, config: HttpBackendConfig | None = None, transport=None):
        self.config = config or HttpBackendConfig()
        headers = {}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = "Bearer " + api_key
        self._client = httpx.Client(
            base_url=self.config.base_url,
            timeout=self.config.timeout,
            headers=headers,
            transport=transport,
        )

    def complete(self, request: LlmRequest, messages: list[ChatMessage]) -> str:
        payload: dict = {
            "model": self.config.model,
            "messages": [{"role": m.role.value, "content": m.text} for m in messages],
        }
        if request.hints.temperature is not None:
            payload["temperature"] = request.hints.temperature
        if request.hints.max_output_tokens is not None:
            payload["max_tokens"] = request.hints.max_output_tokens
        try:
            response = self._client.post("/chat/completions", json=payload)
        except httpx.HTTPError as exc:
            raise BackendUnavailable("chat backend unreachable: %s" % exc) from exc
        if response.status_code != 200:
            raise BackendUnavailable(
                "chat backend returned %d: %s"
                % (response.status_code, response.text[:200])
            )
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise BackendUnavailable("chat backend response has no message content") from exc

    def close(self) -> None:
        self._client.close()


class GatewayClient:
    """Single entry point the engine uses to talk to a model."""

    def __init__(
        self,
        backend: Backend,
        templates: TemplateSet | None = None,
        call_limit: int | None = None,
        parse_retries: int = 2,
    ):
        self.backend = backend
        self.templates = templates if templates is not None else load_templates()
        self.call_limit = call_limit
        self.parse_retries = parse_retries
        self.transcript: list[TranscriptRecord] = []
        self.calls_made = 0
        self.current_tick = 0

    def request(
        self,
        template: TemplateId,
        bindings: dict[str, str],
        hints: DecodeHints | None = None,
        corrective_note: str | None = None,
    ) -> str:
        """Render and send one request, recording it in the transcript."""
        if self.call_limit is not None and self.calls_made >= self.call_limit:
            raise BudgetExceeded(
                "model call budget of %d exhausted (template %r)"
                % (self.call_limit, template.value)
            )
        bound = {key: str(value) for key, value in bindings.items()}
        messages = self.templates.get(template).render(bound)
        if corrective_note is not None:
            # recorded in bindings so deterministic backends see the retry
            bound["corrective_note"] = corrective_note
            messages = messages + [ChatMessage(role=Role.SYSTEM, text=corrective_note)]
        request = LlmRequest(template=template, bindings=bound, hints=hints or DecodeHints())
        response = self.backend.complete(request, messages)
        self.calls_made += 1
        self.transcript.append(
            TranscriptRecord(
                tick=self.current_tick,
                template=template.value,
                messages=tuple((m.role.value, m.text) for m in messages),
                response=response,
            )
        )
        return response

    def request_parsed(
        self,
        template: TemplateId,
        bindings: dict[str, str],
        parser: Callable[[str], T],
        hints: DecodeHints | None = None,
        corrective_note: str | None = None,
    ) -> T:
        """request() plus parsing, with corrective retries on bad output."""
        last_error: MalformedOutput | None = None
        for attempt in range(self.parse_retries + 1):
            note = corrective_note
            if attempt > 0:
                note = (
                    "Your previous reply could not be used (%s). Answer again, strictly "
                    "following the required output format." % last_error
                )
            text = self.request(template, bindings, hints=hints, corrective_note=note)
            try:
                return parser(text)
            except MalformedOutput as exc:
                last_error = exc
        raise GenerationFailed(
            "template %r produced unusable output %d times"
            % (template.value, self.parse_retries + 1)
        ) from last_error

    def revision_note(self, rejected: str) -> str:
        """Corrective text shown to an actor whose line was rejected."""
        rendered = self.templates.get(TemplateId.REVISION).render({"rejected": rejected})
        return rendered[0].text
