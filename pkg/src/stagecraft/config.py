"""Engine tuning knobs shared by the director, actors, and session."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .errors import ValidationError


@dataclass(frozen=True)
class EngineConfig:
    """Limits and feature toggles for one play session.

    Turn thresholds are counted per objective: checks begin once
    ``check_start`` turns have played, and the objective is forced complete
    without a model call when ``force_complete`` turns are reached.
    """

    script_line_budget: int = 5
    check_start: int = 5
    force_complete: int = 9
    summarize_window: int = 16
    keep_suffix: int = 8
    similarity_threshold: float = 0.4
    retrieval_k: int = 5
    instruction_enabled: bool = True
    monologue_enabled: bool = True
    player_cooldown_turns: int = 1
    llm_call_limit: int | None = None
    seed: int = 0

    def __post_init__(self):
        for name in (
            "script_line_budget",
            "check_start",
            "force_complete",
            "summarize_window",
            "keep_suffix",
            "retrieval_k",
        ):
            if getattr(self, name) < 1:
                raise ValidationError("%s must be at least 1" % name)
        if self.force_complete < self.check_start:
            raise ValidationError("force_complete must be >= check_start")
        if self.keep_suffix >= self.summarize_window:
            raise ValidationError("keep_suffix must be smaller than summarize_window")
        if not 0.0 <= self.similarity_threshold <= 1.0:
            raise ValidationError("similarity_threshold must be within [0, 1]")
        if self.player_cooldown_turns < 0:
            raise ValidationError("player_cooldown_turns must be >= 0")
        if self.llm_call_limit is not None and self.llm_call_limit < 1:
            raise ValidationError("llm_call_limit must be positive when set")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "EngineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValidationError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        return cls(**obj)

    def replace(self, **overrides) -> "EngineConfig":
        merged = {**self.to_dict(), **overrides}
        return EngineConfig.from_dict(merged)


REVISION_RECENT = 3
MAX_GENERATIONS = 3
