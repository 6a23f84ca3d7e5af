"""Run statistics, check-annotation scoring, judging, and ablations.

Everything here works on exported play records (plain dicts), so analysis
never needs a live session. Check scoring compares the director's
objective-check verdicts against human annotations collected on a sheet;
judging asks a model to rate the finished script on a 1-4 scale.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .config import EngineConfig
from .engine import PlaySession
from .errors import DanglingAnnotation, ValidationError
from .gateway import (
    Backend,
    GatewayClient,
    ScriptedBackend,
    TemplateId,
    parse_judge,
)
from .record import export_play
from .script import ScriptSetting


@dataclass(frozen=True)
class RunStats:
    """Counts summarizing one play record."""

    total_ticks: int
    llm_calls: int
    realized_turns: int
    actor_turns: int
    planned_narrations: int
    player_turns: int
    revised_turns: int
    objectives_advanced: int
    force_completes: int
    storyline_rebuilds: int
    acts_completed: int
    columns_advanced: int
    outlines: int
    scripts: int
    instructions: int
    checks: int
    checks_passed: int
    mean_turns_per_objective: float


def compute_stats(play: dict) -> RunStats:
    kinds: dict[str, int] = {}
    revised = 0
    for event in play.get("events", []):
        kind = event.get("kind", "")
        kinds[kind] = kinds.get(kind, 0) + 1
        if kind == "ActorResponse" and str(event.get("detail", "")).startswith("attempts="):
            revised += 1
    actions: dict[str, int] = {}
    checks_passed = 0
    for decision in play.get("decisions", []):
        action = decision.get("action", "")
        actions[action] = actions.get(action, 0) + 1
        if action == "check" and str(decision.get("detail", "")).startswith("completed"):
            checks_passed += 1
    realized = (
        kinds.get("Planned", 0) + kinds.get("ActorResponse", 0) + kinds.get("PlayerAction", 0)
    )
    advanced = kinds.get("ObjectiveAdvanced", 0)
    return RunStats(
        total_ticks=int(play.get("total_ticks", 0)),
        llm_calls=len(play.get("transcript", [])),
        realized_turns=realized,
        actor_turns=kinds.get("ActorResponse", 0),
        planned_narrations=kinds.get("Planned", 0),
        player_turns=kinds.get("PlayerAction", 0),
        revised_turns=revised,
        objectives_advanced=advanced,
        force_completes=kinds.get("ForceComplete", 0),
        storyline_rebuilds=kinds.get("StorylineRebuilt", 0),
        acts_completed=kinds.get("ActComplete", 0),
        columns_advanced=kinds.get("ColumnAdvanced", 0),
        outlines=actions.get("outline", 0),
        scripts=actions.get("script", 0),
        instructions=actions.get("instruct", 0),
        checks=actions.get("check", 0),
        checks_passed=checks_passed,
        mean_turns_per_objective=(realized / advanced) if advanced else 0.0,
    )


def render_stats(stats: RunStats) -> str:
    rows = [
        ("ticks", stats.total_ticks),
        ("model calls", stats.llm_calls),
        ("realized turns", stats.realized_turns),
        ("  actor", stats.actor_turns),
        ("  narration", stats.planned_narrations),
        ("  player", stats.player_turns),
        ("  revised", stats.revised_turns),
        ("objectives advanced", stats.objectives_advanced),
        ("  forced", stats.force_completes),
        ("storyline rebuilds", stats.storyline_rebuilds),
        ("acts completed", stats.acts_completed),
        ("columns advanced", stats.columns_advanced),
        ("outlines written", stats.outlines),
        ("scripts planned", stats.scripts),
        ("instructions given", stats.instructions),
        ("checks run", stats.checks),
        ("  passed", stats.checks_passed),
        ("turns per objective", "%.2f" % stats.mean_turns_per_objective),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join("%-*s  %s" % (width, label, value) for label, value in rows)


# ------------------------------------------------------------- check scoring

SHEET_FIELDS = ("check_id", "tick", "act_id", "objective_id", "model_completed", "human_completed")


def check_rows(play: dict) -> list[dict]:
    """Director check decisions as annotation-sheet rows (human column blank)."""
    rows = []
    index = 0
    for decision in play.get("decisions", []):
        if decision.get("action") != "check":
            continue
        index += 1
        detail = str(decision.get("detail", ""))
        rows.append(
            {
                "check_id": "chk-%04d" % index,
                "tick": decision.get("tick", 0),
                "act_id": decision.get("act_id", ""),
                "objective_id": decision.get("objective_id", ""),
                "model_completed": detail.startswith("completed"),
                "human_completed": None,
            }
        )
    return rows


def write_annotation_sheet(play: dict, path: str | Path) -> int:
    rows = check_rows(play)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=SHEET_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    **row,
                    "model_completed": "true" if row["model_completed"] else "false",
                    "human_completed": "",
                }
            )
    return len(rows)


def _parse_flag(value: str, where: str) -> bool | None:
    text = value.strip().lower()
    if text == "":
        return None
    if text in ("true", "yes", "y", "1"):
        return True
    if text in ("false", "no", "n", "0"):
        return False
    raise ValidationError("%s has unreadable flag %r" % (where, value))


def read_annotation_sheet(path: str | Path) -> list[dict]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(("check_id", "model_completed", "human_completed")) - set(
            reader.fieldnames or []
        )
        if missing:
            raise ValidationError(
                "annotation sheet is missing columns: %s" % ", ".join(sorted(missing))
            )
        for line_no, raw in enumerate(reader, start=2):
            check_id = (raw.get("check_id") or "").strip()
            if not check_id:
                raise ValidationError("annotation sheet line %d has no check_id" % line_no)
            model = _parse_flag(
                raw.get("model_completed") or "", "line %d model_completed" % line_no
            )
            if model is None:
                raise ValidationError("line %d has no model_completed value" % line_no)
            human = _parse_flag(
                raw.get("human_completed") or "", "line %d human_completed" % line_no
            )
            rows.append(
                {
                    "check_id": check_id,
                    "act_id": (raw.get("act_id") or "").strip(),
                    "objective_id": (raw.get("objective_id") or "").strip(),
                    "model_completed": model,
                    "human_completed": human,
                }
            )
    return rows


@dataclass(frozen=True)
class CheckScore:
    """Agreement between model check verdicts and human annotations."""

    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    labeled: int
    degenerate: bool


def score_checks(rows: list[dict], known_ids: set[str] | None = None) -> CheckScore:
    """Precision/recall/F1 of model "completed" verdicts vs human labels.

    Rows without a human label are skipped. When either class is absent
    (no predicted or no actual positives) the scores are zero and the
    result is flagged degenerate rather than dividing by zero.
    """
    if known_ids is not None:
        for row in rows:
            if row["check_id"] not in known_ids:
                raise DanglingAnnotation(
                    "annotation %r does not match any check in the play record"
                    % row["check_id"]
                )
    tp = fp = fn = tn = 0
    labeled = 0
    for row in rows:
        human = row.get("human_completed")
        if human is None:
            continue
        labeled += 1
        model = bool(row["model_completed"])
        if model and human:
            tp += 1
        elif model and not human:
            fp += 1
        elif not model and human:
            fn += 1
        else:
            tn += 1
    degenerate = (tp + fp == 0) or (tp + fn == 0)
    if degenerate:
        return CheckScore(tp, fp, fn, tn, 0.0, 0.0, 0.0, labeled, True)
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    # tp can be zero with both classes present; F1 is zero, not undefined
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0.0
        else 0.0
    )
    return CheckScore(tp, fp, fn, tn, precision, recall, f1, labeled, False)


# ------------------------------------------------------------------- judging

JUDGE_SCALE = (1, 4)


@dataclass(frozen=True)
class JudgeResult:
    storyline_logicality: int
    storyline_coherence: int
    character_consistency: int
    reasked: bool = False
    clamped: bool = False

    def mean(self) -> float:
        return (
            self.storyline_logicality
            + self.storyline_coherence
            + self.character_consistency
        ) / 3.0


def _script_text(play: dict) -> str:
    blocks = []
    for act in play.get("acts", []):
        lines = ["[%s]" % act.get("id", "")]
        for turn in act.get("log", []):
            lines.append("%s: %s" % (turn.get("role", ""), turn.get("text", "")))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def judge_play(setting: ScriptSetting, play: dict, gateway: GatewayClient) -> JudgeResult:
    """Rate the finished script; out-of-range scores are re-asked then clamped."""
    lo, hi = JUDGE_SCALE
    descriptions = "\n" + "\n".join(
        "%s: %s" % (profile.role, profile.description) for profile in setting.characters
    )
    bindings = {"descriptions": descriptions, "script": _script_text(play)}
    scores = gateway.request_parsed(TemplateId.JUDGE_STORYLINE, bindings, parse_judge)
    reasked = False
    clamped = False
    if any(not lo <= value <= hi for value in scores.values()):
        reasked = True
        scores = gateway.request_parsed(
            TemplateId.JUDGE_STORYLINE,
            bindings,
            parse_judge,
            corrective_note=(
                "Every score must be an integer from %d to %d. Answer again." % (lo, hi)
            ),
        )
        if any(not lo <= value <= hi for value in scores.values()):
            clamped = True
            scores = {key: min(hi, max(lo, value)) for key, value in scores.items()}
    return JudgeResult(
        storyline_logicality=scores["storyline_logicality"],
        storyline_coherence=scores["storyline_coherence"],
        character_consistency=scores["character_consistency"],
        reasked=reasked,
        clamped=clamped,
    )


# ------------------------------------------------------------------ ablation

ABLATION_VARIANTS = {
    "full": {},
    "no_instruction": {"instruction_enabled": False},
    "no_monologue": {"monologue_enabled": False},
    "neither": {"instruction_enabled": False, "monologue_enabled": False},
}


def run_ablation(
    setting: ScriptSetting,
    base_config: EngineConfig | None = None,
    seeds: tuple[int, ...] = (0, 1, 2),
    check_policy: str = "after:2",
    backend_factory=None,
    judge_backend: Backend | None = None,
    max_ticks: int = 5000,
) -> dict:
    """Run every feature-toggle variant over the seeds and judge each play."""
    base = base_config if base_config is not None else EngineConfig()
    if backend_factory is None:

        def backend_factory(cfg: EngineConfig) -> Backend:
            return ScriptedBackend(seed=cfg.seed, check_policy=check_policy)

    rows = []
    for variant, overrides in ABLATION_VARIANTS.items():
        for seed in seeds:
            config = base.replace(seed=seed, **overrides)
            session = PlaySession(setting, config=config, backend=backend_factory(config))
            session.run_to_completion(max_ticks=max_ticks)
            play = export_play(session)
            stats = compute_stats(play)
            judge_gateway = GatewayClient(
                judge_backend if judge_backend is not None else ScriptedBackend(seed=seed)
            )
            judged = judge_play(setting, play, judge_gateway)
            rows.append(
                {
                    "variant": variant,
                    "seed": seed,
                    "ticks": stats.total_ticks,
                    "llm_calls": stats.llm_calls,
                    "forced": stats.force_completes,
                    "revised": stats.revised_turns,
                    "judge_mean": judged.mean(),
                    "judge": {
                        "storyline_logicality": judged.storyline_logicality,
                        "storyline_coherence": judged.storyline_coherence,
                        "character_consistency": judged.character_consistency,
                    },
                }
            )
    summary = {}
    for variant in ABLATION_VARIANTS:
        subset = [row for row in rows if row["variant"] == variant]
        summary[variant] = {
            "runs": len(subset),
            "mean_ticks": sum(row["ticks"] for row in subset) / len(subset),
            "mean_judge": sum(row["judge_mean"] for row in subset) / len(subset),
            "mean_forced": sum(row["forced"] for row in subset) / len(subset),
        }
    return {"rows": rows, "summary": summary}


def render_ablation(result: dict) -> str:
    lines = ["%-14s %5s %11s %11s %11s" % ("variant", "runs", "mean_ticks", "mean_judge", "mean_forced")]
    for variant, agg in result["summary"].items():
        lines.append(
            "%-14s %5d %11.1f %11.2f %11.1f"
            % (variant, agg["runs"], agg["mean_ticks"], agg["mean_judge"], agg["mean_forced"])
        )
    return "\n".join(lines)
