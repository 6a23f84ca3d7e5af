"""Parsers that turn raw model text into typed results.

Every parser raises MalformedOutput on unusable text; the gateway client
translates repeated failures into GenerationFailed. JSON extraction allows
one repair pass (code fences stripped, first balanced object located,
trailing commas removed) and nothing more aggressive.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..errors import MalformedOutput
from ..script import PlannedTurn

_FENCE = re.compile(r"```(?:[A-Za-z0-9_-]+)?\s*(.*?)```", re.DOTALL)
_TRAILING_COMMA = re.compile(r",(\s*[}\]])")
_OPENER = re.compile(r"[{\[]")


def _first_json_value(text: str):
    decoder = json.JSONDecoder()
    for match in _OPENER.finditer(text):
        try:
            value, _ = decoder.raw_decode(text, match.start())
        except ValueError:
            continue
        return value
    return None


def extract_json(text: str):
    """Return the first JSON object or array found in ``text``.

    Tries the raw text first, then fenced blocks, then a trailing-comma
    repair of each candidate.
    """
    candidates = [text]
    candidates.extend(_FENCE.findall(text))
    for candidate in candidates:
        for attempt in (candidate, _TRAILING_COMMA.sub(r"\1", candidate)):
            value = _first_json_value(attempt)
            if value is not None:
                return value
    raise MalformedOutput("no JSON value found in model output: %r" % _clip(text))


def _clip(text: str, limit: int = 120) -> str:
    text = text.strip().replace("\n", " ")
    return text if len(text) <= limit else text[: limit - 3] + "..."


@dataclass(frozen=True)
class OutlineResult:
    previous_outline: str
    new_outline: str


@dataclass(frozen=True)
class CheckResult:
    completed: bool
    reason: str


@dataclass(frozen=True)
class InstructionResult:
    synopsis: str
    keywords: tuple[str, ...] = field(default_factory=tuple)


def parse_outline(text: str) -> OutlineResult:
    value = extract_json(text)
    if not isinstance(value, dict):
        raise MalformedOutput("outline output is not a JSON object")
    new = value.get("new_outline")
    if not isinstance(new, str) or not new.strip():
        raise MalformedOutput("outline output has no usable 'new_outline'")
    prev = value.get("previous_outline")
    if not isinstance(prev, str):
        prev = ""
    return OutlineResult(previous_outline=prev.strip(), new_outline=new.strip())


def parse_script(text: str, line_budget: int, allowed_roles: list[str]) -> list[PlannedTurn]:
    """Parse a planned script, dropping lines by unknown speakers.

    Speaker names are matched case-insensitively against ``allowed_roles``
    (which should include Narration) and canonicalized. The result is
    truncated to ``line_budget`` lines and may be empty.
    """
    value = extract_json(text)
    if isinstance(value, dict):
        value = value.get("scripts", value.get("script"))
    if not isinstance(value, list):
        raise MalformedOutput("script output has no 'scripts' list")
    canonical = {role.lower(): role for role in allowed_roles}
    turns: list[PlannedTurn] = []
    for entry in value:
        if not isinstance(entry, dict):
            continue
        role = entry.get("role")
        content = entry.get("content")
        if not isinstance(role, str) or not isinstance(content, str):
            continue
        role = canonical.get(role.strip().lower())
        if role is None or not content.strip():
            continue
        turns.append(PlannedTurn(role=role, expected_utterance=content.strip()))
        if len(turns) == line_budget:
            break
    return turns


def parse_check(text: str) -> CheckResult:
    value = extract_json(text)
    if not isinstance(value, dict):
        raise MalformedOutput("check output is not a JSON object")
    completed = value.get("completed")
    if isinstance(completed, str):
        lowered = completed.strip().lower()
        if lowered in ("true", "yes"):
            completed = True
        elif lowered in ("false", "no"):
            completed = False
    if not isinstance(completed, bool):
        raise MalformedOutput("check output has no boolean 'completed'")
    reason = value.get("reason")
    if not isinstance(reason, str):
        reason = ""
    return CheckResult(completed=completed, reason=reason.strip())


_SYNOPSIS_LABEL = re.compile(r"^\s*(?:[*#>\-]\s*)*synopsis\s*:\s*", re.IGNORECASE)
_KEYWORDS_LABEL = re.compile(r"^\s*(?:[*#>\-]\s*)*keywords?\s*:\s*", re.IGNORECASE)


def parse_instruction(text: str) -> InstructionResult:
    """Parse the labeled Synopsis:/Keywords: form of an actor instruction."""
    synopsis_parts: list[str] = []
    keywords: list[str] = []
    section = None
    for line in text.splitlines():
        match = _SYNOPSIS_LABEL.match(line)
        if match:
            section = "synopsis"
            line = line[match.end() :].lstrip("* ")
        else:
            match = _KEYWORDS_LABEL.match(line)
            if match:
                section = "keywords"
                line = line[match.end() :].lstrip("* ")
        if section == "synopsis" and line.strip():
            synopsis_parts.append(line.strip())
        elif section == "keywords" and line.strip():
            keywords.extend(
                part.strip(" .") for part in re.split(r"[,;]", line) if part.strip(" .")
            )
    if not synopsis_parts:
        raise MalformedOutput("instruction output has no 'Synopsis:' line")
    if not keywords:
        raise MalformedOutput("instruction output has no 'Keywords:' line")
    return InstructionResult(synopsis=" ".join(synopsis_parts), keywords=tuple(keywords))


_POINT = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s+(.*\S)\s*$")


def parse_points(text: str) -> list[str]:
    """Parse a bullet list of summary points, one per line."""
    points = []
    for line in text.splitlines():
        match = _POINT.match(line)
        if match:
            points.append(match.group(1))
    if not points:
        raise MalformedOutput("summary output has no bullet points")
    return points


JUDGE_DIMENSIONS = ("storyline_logicality", "storyline_coherence", "character_consistency")


def parse_judge(text: str) -> dict[str, int]:
    """Parse the three judge scores; values are not range-checked here."""
    value = extract_json(text)
    if not isinstance(value, dict):
        raise MalformedOutput("judge output is not a JSON object")
    scores = {}
    for dim in JUDGE_DIMENSIONS:
        raw = value.get(dim)
        if isinstance(raw, bool) or not isinstance(raw, (int, float, str)):
            raise MalformedOutput("judge output is missing %r" % dim)
        try:
            scores[dim] = int(raw)
        except (TypeError, ValueError):
            raise MalformedOutput("judge score %r is not an integer" % dim) from None
    return scores


def extract_line(text: str, role: str) -> str:
    """Reduce a raw actor completion to a single spoken line.

    Strips a leading "Name:" speaker tag for the given role (models often
    echo one), surrounding quotes when they wrap the whole line, and keeps
    only the first non-empty line so multi-turn spillover is cut.
    """
    line = ""
    for part in text.strip().splitlines():
        if part.strip():
            line = part.strip()
            break
    prefix = re.match(r"^\s*%s\s*[:：]\s*" % re.escape(role), line, re.IGNORECASE)
    if prefix:
        line = line[prefix.end() :].strip()
    if len(line) >= 2 and line[0] == line[-1] and line[0] in "\"'":
        line = line[1:-1].strip()
    return line


def strip_role_prefix(utterance: str, role: str) -> str:
    return extract_line(utterance, role)


__all__ = [
    "CheckResult",
    "InstructionResult",
    "JUDGE_DIMENSIONS",
    "OutlineResult",
    "extract_json",
    "extract_line",
    "parse_check",
    "parse_instruction",
    "parse_judge",
    "parse_outline",
    "parse_points",
    "parse_script",
    "strip_role_prefix",
]
