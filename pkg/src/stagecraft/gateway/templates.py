"""Prompt templates: loading, placeholder discovery, and rendering.

Templates live in a YAML file (``data/templates.yaml`` by default) grouped
under ``core`` and ``auxiliary``. Each template is an ordered list of chat
messages whose text may contain ``{{placeholder}}`` slots. Rendering is a
single pass, so braces inside binding values are never re-interpreted.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from ..errors import MissingPlaceholder, ParseError, ValidationError

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


class Role(str, enum.Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class TemplateId(str, enum.Enum):
    """Stable identifiers for the prompt templates the engine can issue."""

    WRITE_OUTLINE = "write_outline"
    TRANSLATE_SCRIPT = "translate_script"
    INSTRUCT_ACTOR = "instruct_actor"
    ACTOR_RESPONSE = "actor_response"
    ACTOR_RESPONSE_NO_INSTRUCTION = "actor_response_no_instruction"
    CHECK_OBJECTIVE = "check_objective"
    SUMMARIZE_LOG = "summarize_log"
    MONOLOGUE = "monologue"
    REVISION = "revision"
    INTERVIEW = "interview"
    JUDGE_STORYLINE = "judge_storyline"


@dataclass(frozen=True)
class ChatMessage:
    """One rendered message ready to send to a language model."""

    role: Role
    text: str


@dataclass(frozen=True)
class PromptTemplate:
    name: TemplateId
    group: str
    messages: tuple[tuple[Role, str], ...]

    def placeholders(self) -> frozenset[str]:
        found: set[str] = set()
        for _, text in self.messages:
            found.update(_PLACEHOLDER.findall(text))
        return frozenset(found)

    def render(self, bindings: dict[str, str]) -> list[ChatMessage]:
        """Substitute every placeholder; extra bindings are ignored.

        Raises MissingPlaceholder naming the missing keys when the bindings
        are incomplete. Messages that render to whitespace only are dropped.
        """
        missing = self.placeholders() - set(bindings)
        if missing:
            raise MissingPlaceholder(
                "template %r is missing bindings for: %s"
                % (self.name.value, ", ".join(sorted(missing)))
            )

        def subst(match: re.Match) -> str:
            return str(bindings[match.group(1)])

        rendered = []
        for role, text in self.messages:
            body = _PLACEHOLDER.sub(subst, text)
            if body.strip():
                rendered.append(ChatMessage(role=role, text=body))
        return rendered


class TemplateSet:
    """All templates known to the gateway, indexed by TemplateId."""

    def __init__(self, templates: dict[TemplateId, PromptTemplate]):
        self._templates = dict(templates)

    def __contains__(self, name: TemplateId) -> bool:
        return name in self._templates

    def get(self, name: TemplateId) -> PromptTemplate:
        try:
            return self._templates[name]
        except KeyError:
            raise ValidationError("unknown template: %r" % (name,)) from None

    def names(self) -> list[TemplateId]:
        return list(self._templates)


def _parse_template(name: str, group: str, raw: object) -> PromptTemplate:
    try:
        tid = TemplateId(name)
    except ValueError:
        raise ValidationError("template file defines unknown template %r" % name) from None
    if not isinstance(raw, dict) or not isinstance(raw.get("messages"), list):
        raise ValidationError("template %r must have a 'messages' list" % name)
    messages = []
    for i, entry in enumerate(raw["messages"]):
        if not isinstance(entry, dict):
            raise ValidationError("template %r message %d is not a mapping" % (name, i))
        try:
            role = Role(entry.get("role"))
        except ValueError:
            raise ValidationError(
                "template %r message %d has bad role %r" % (name, i, entry.get("role"))
            ) from None
        text = entry.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ValidationError("template %r message %d has empty text" % (name, i))
        messages.append((role, text))
    if not messages:
        raise ValidationError("template %r has no messages" % name)
    return PromptTemplate(name=tid, group=group, messages=tuple(messages))


def parse_templates(source: str) -> TemplateSet:
    try:
        doc = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise ParseError("template file is not valid YAML: %s" % exc) from exc
    if not isinstance(doc, dict):
        raise ValidationError("template file must be a mapping of groups")
    templates: dict[TemplateId, PromptTemplate] = {}
    for group in ("core", "auxiliary"):
        section = doc.get(group) or {}
        if not isinstance(section, dict):
            raise ValidationError("template group %r must be a mapping" % group)
        for name, raw in section.items():
            tmpl = _parse_template(str(name), group, raw)
            if tmpl.name in templates:
                raise ValidationError("duplicate template %r" % name)
            templates[tmpl.name] = tmpl
    return TemplateSet(templates)


def load_templates(path: str | Path | None = None) -> TemplateSet:
    """Load templates from ``path``, or the packaged defaults when omitted."""
    if path is None:
        source = (
            resources.files("stagecraft.gateway").joinpath("data/templates.yaml").read_text("utf-8")
        )
    else:
        source = Path(path).read_text("utf-8")
    return parse_templates(source)
