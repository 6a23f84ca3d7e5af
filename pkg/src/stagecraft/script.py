"""Authored play definitions: characters, acts, objectives, staging columns.

The on-disk format is a single human-editable YAML document per play (see
``docs/script-format.md``). Everything loaded here is immutable for the
lifetime of a session and safe to share between sessions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources

import yaml

from stagecraft.errors import ParseError, ValidationError

#: Reserved role name for stage directions; never a playable character.
NARRATION = "Narration"


class CharacterKind(enum.Enum):
    ACTOR = "actor"
    PLAYER = "player"


@dataclass(frozen=True)
class CharacterProfile:
    role: str
    description: str
    kind: CharacterKind = CharacterKind.ACTOR


@dataclass(frozen=True)
class RelationDoc:
    """How ``subject`` relates to ``object``; the monologue is subject-voiced."""

    subject: str
    object: str
    content: str
    monologue: str


@dataclass(frozen=True)
class SeedMemory:
    content: str
    monologue: str


@dataclass(frozen=True)
class PlotObjective:
    id: str
    text: str


@dataclass(frozen=True)
class Act:
    id: str
    place: str
    background: str
    characters: tuple[str, ...]
    objectives: tuple[PlotObjective, ...]
    column: int


@dataclass(frozen=True)
class ScriptSetting:
    title: str
    characters: tuple[CharacterProfile, ...]
    relations: tuple[RelationDoc, ...]
    seed_memories: dict[str, tuple[SeedMemory, ...]] = field(default_factory=dict)
    acts: tuple[Act, ...] = ()

    def character(self, role: str) -> CharacterProfile:
        for profile in self.characters:
            if profile.role == role:
                return profile
        raise KeyError(role)

    @property
    def player_role(self) -> str:
        return next(p.role for p in self.characters if p.kind is CharacterKind.PLAYER)

    @property
    def max_column(self) -> int:
        return max(act.column for act in self.acts)

    def act(self, act_id: str) -> Act:
        for act in self.acts:
            if act.id == act_id:
                return act
        raise KeyError(act_id)


@dataclass(frozen=True)
class DialogueTurn:
    """A realized line of the play; ``tick`` is the global turn counter."""

    role: str
    utterance: str
    tick: int


@dataclass(frozen=True)
class PlannedTurn:
    """A director-planned line: who should speak and roughly what."""

    role: str
    expected_utterance: str


def acts_in_column(setting: ScriptSetting, column: int) -> list[Act]:
    """Acts staged at ``column``, in declaration order; [] past the last column."""
    if column < 0:
        raise ValueError("column must be >= 0")
    return [act for act in setting.acts if act.column == column]


# ---------------------------------------------------------------------------
# Loading / validation
# ---------------------------------------------------------------------------


def _require(mapping: dict, key: str, where: str) -> object:
    if key not in mapping:
        raise ParseError(f"{where}: missing required field '{key}'")
    return mapping[key]


def _string(value: object, where: str, allow_empty: bool = False) -> str:
    if not isinstance(value, str):
        raise ParseError(f"{where}: expected a string, got {type(value).__name__}")
    if not allow_empty and not value.strip():
        raise ValidationError(f"{where}: must be non-empty")
    return value


def load_script(source: bytes | str) -> ScriptSetting:
    """Parse and validate a play document.

    Raises ParseError for malformed documents and ValidationError for
    structurally invalid ones; diagnostics name the offending field.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        raw = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise ParseError(f"script document is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError("script document must be a mapping at the top level")

    title = _string(_require(raw, "title", "script"), "title")

    characters: list[CharacterProfile] = []
    for i, entry in enumerate(_require(raw, "characters", "script") or []):
        where = f"characters[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected a mapping")
        name = _string(_require(entry, "name", where), f"{where}.name")
        kind_raw = str(entry.get("kind", "actor")).lower()
        try:
            kind = CharacterKind(kind_raw)
        except ValueError:
            raise ValidationError(f"{where}.kind: must be 'actor' or 'player', got '{kind_raw}'")
        description = _string(_require(entry, "description", where), f"{where}.description")
        characters.append(CharacterProfile(role=name, description=description, kind=kind))

    names = [c.role for c in characters]
    for name in names:
        if names.count(name) > 1:
            raise ValidationError(f"characters: role '{name}' declared more than once")
        if name == NARRATION:
            raise ValidationError(f"characters: '{NARRATION}' is a reserved role name")
    known = set(names)
    players = [c for c in characters if c.kind is CharacterKind.PLAYER]
    if len(players) != 1:
        raise ValidationError(
            f"characters: exactly one player-kind character required, found {len(players)}"
        )

    relations: list[RelationDoc] = []
    for i, entry in enumerate(raw.get("relations") or []):
        where = f"relations[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected a mapping")
        subject = _string(_require(entry, "subject", where), f"{where}.subject")
        obj = _string(_require(entry, "object", where), f"{where}.object")
        content = _string(_require(entry, "content", where), f"{where}.content")
        monologue = _string(entry.get("monologue", ""), f"{where}.monologue", allow_empty=True)
        if subject == obj:
            raise ValidationError(f"{where}: subject and object must differ")
        for role, slot in ((subject, "subject"), (obj, "object")):
            if role not in known:
                raise ValidationError(f"{where}.{slot}: unknown role '{role}'")
        if content.strip() and not monologue.strip():
            raise ValidationError(f"{where}.monologue: required when content is non-empty")
        relations.append(RelationDoc(subject=subject, object=obj, content=content, monologue=monologue))

    seed_memories: dict[str, tuple[SeedMemory, ...]] = {}
    for role, entries in (raw.get("seed_memories") or {}).items():
        where = f"seed_memories.{role}"
        if role not in known:
            raise ValidationError(f"{where}: unknown role '{role}'")
        seeds = []
        for i, entry in enumerate(entries or []):
            if not isinstance(entry, dict):
                raise ParseError(f"{where}[{i}]: expected a mapping")
            seeds.append(
                SeedMemory(
                    content=_string(_require(entry, "content", f"{where}[{i}]"), f"{where}[{i}].content"),
                    monologue=_string(
                        _require(entry, "monologue", f"{where}[{i}]"), f"{where}[{i}].monologue"
                    ),
                )
            )
        seed_memories[role] = tuple(seeds)

    acts: list[Act] = []
    acts_raw = _require(raw, "acts", "script")
    if not acts_raw:
        raise ValidationError("acts: a script must declare at least one act")
    for i, entry in enumerate(acts_raw):
        where = f"acts[{i}]"
        if not isinstance(entry, dict):
            raise ParseError(f"{where}: expected a mapping")
        act_id = _string(_require(entry, "id", where), f"{where}.id")
        column = _require(entry, "column", where)
        if not isinstance(column, int) or column < 0:
            raise ValidationError(f"{where}.column: must be a non-negative integer")
        act_chars = []
        for name in _require(entry, "characters", where) or []:
            name = _string(name, f"{where}.characters")
            if name == NARRATION:
                raise ValidationError(f"{where}.characters: '{NARRATION}' is reserved")
            if name not in known:
                raise ValidationError(f"{where}.characters: unknown role '{name}'")
            act_chars.append(name)
        objectives: list[PlotObjective] = []
        for j, obj_entry in enumerate(_require(entry, "objectives", where) or []):
            obj_where = f"{where}.objectives[{j}]"
            if isinstance(obj_entry, str):
                obj_id, text = f"{act_id}/{j}", obj_entry
            elif isinstance(obj_entry, dict):
                obj_id = str(obj_entry.get("id") or f"{act_id}/{j}")
                text = _string(_require(obj_entry, "text", obj_where), f"{obj_where}.text")
            else:
                raise ParseError(f"{obj_where}: expected a string or mapping")
            if not text.strip():
                raise ValidationError(f"{obj_where}.text: must be non-empty")
            objectives.append(PlotObjective(id=obj_id, text=text))
        if not objectives:
            raise ValidationError(f"{where}.objectives: must be non-empty")
        ids = [o.id for o in objectives]
        if len(ids) != len(set(ids)):
            raise ValidationError(f"{where}.objectives: ids must be unique within the act")
        acts.append(
            Act(
                id=act_id,
                place=_string(_require(entry, "place", where), f"{where}.place"),
                background=_string(_require(entry, "background", where), f"{where}.background"),
                characters=tuple(act_chars),
                objectives=tuple(objectives),
                column=column,
            )
        )

    act_ids = [a.id for a in acts]
    if len(act_ids) != len(set(act_ids)):
        raise ValidationError("acts: ids must be unique")
    columns = sorted({a.column for a in acts})
    if columns != list(range(len(columns))):
        raise ValidationError(f"acts: columns must be contiguous integers starting at 0, got {columns}")

    return ScriptSetting(
        title=title,
        characters=tuple(characters),
        relations=tuple(relations),
        seed_memories=seed_memories,
        acts=tuple(acts),
    )


def dump_script(setting: ScriptSetting) -> str:
    """Serialize a setting back to the document format (round-trip stable)."""
    doc: dict = {
        "title": setting.title,
        "characters": [
            {"name": c.role, "kind": c.kind.value, "description": c.description}
            for c in setting.characters
        ],
        "relations": [
            {"subject": r.subject, "object": r.object, "content": r.content, "monologue": r.monologue}
            for r in setting.relations
        ],
        "seed_memories": {
            role: [{"content": s.content, "monologue": s.monologue} for s in seeds]
            for role, seeds in setting.seed_memories.items()
        },
        "acts": [
            {
                "id": a.id,
                "column": a.column,
                "place": a.place,
                "background": a.background,
                "characters": list(a.characters),
                "objectives": [{"id": o.id, "text": o.text} for o in a.objectives],
            }
            for a in setting.acts
        ],
    }
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=100)


def load_demo_script() -> ScriptSetting:
    """The packaged demonstration play."""
    source = resources.files("stagecraft").joinpath("data/demo_play.yaml").read_text("utf-8")
    return load_script(source)
