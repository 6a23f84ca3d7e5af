"""Command line entry points.

``stagecraft run`` plays a script to completion and writes a play record;
the other subcommands analyze records (stats, annotation sheets, check
scoring, judging, ablations), replay them, or serve the HTTP console.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import EngineConfig
from .engine import PlaySession
from .errors import StagecraftError
from .gateway import GatewayClient, HttpBackend, HttpBackendConfig, ScriptedBackend
from .metrics import (
    check_rows,
    compute_stats,
    judge_play,
    read_annotation_sheet,
    render_ablation,
    render_stats,
    run_ablation,
    score_checks,
    write_annotation_sheet,
)
from .record import dump_play, export_play, load_play, verify_replay
from .script import ScriptSetting, load_demo_script, load_script


def _load_setting(script: str | None) -> ScriptSetting:
    if script is None:
        return load_demo_script()
    return load_script(Path(script).read_bytes())


def _make_backend(backend: str, config: EngineConfig, check_policy: str, base_url: str, model: str):
    if backend == "scripted":
        return ScriptedBackend(seed=config.seed, check_policy=check_policy)
    http_config = HttpBackendConfig(base_url=base_url, model=model)
    return HttpBackend(http_config)


def _parse_interjections(raw: tuple[str, ...]) -> dict[int, list[tuple[str, str]]]:
    schedule: dict[int, list[tuple[str, str]]] = {}
    for item in raw:
        parts = item.split(":", 2)
        if len(parts) != 3 or not parts[0].strip().isdigit():
            raise click.BadParameter(
                "expected TICK:ACT_ID:TEXT, got %r" % item, param_hint="--interject"
            )
        tick, act_id, text = int(parts[0]), parts[1].strip(), parts[2]
        schedule.setdefault(tick, []).append((act_id, text))
    return schedule


@click.group()
@click.version_option(package_name="stagecraft")
def main():
    """Interactive drama orchestration."""


@main.command()
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Play definition YAML (defaults to the packaged demo).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the play record JSON here.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--backend", type=click.Choice(["scripted", "http"]), default="scripted",
              show_default=True)
@click.option("--check-policy", default="after:2", show_default=True,
              help="Scripted backend objective-check policy (never, always, after:N).")
@click.option("--base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--model", default="gpt-3.5-turbo-1106", show_default=True)
@click.option("--max-ticks", type=int, default=5000, show_default=True)
@click.option("--call-limit", type=int, default=None, help="Abort after this many model calls.")
@click.option("--no-instruction", is_flag=True, help="Skip director instructions to actors.")
@click.option("--no-monologue", is_flag=True, help="Surface raw memory content, not monologues.")
@click.option("--interject", multiple=True, metavar="TICK:ACT_ID:TEXT",
              help="Queue a player line before the given tick (repeatable).")
def run(script, out, seed, backend, check_policy, base_url, model, max_ticks,
        call_limit, no_instruction, no_monologue, interject):
    """Play a script to completion and report what happened."""
    setting = _load_setting(script)
    config = EngineConfig(
        seed=seed,
        instruction_enabled=not no_instruction,
        monologue_enabled=not no_monologue,
        llm_call_limit=call_limit,
    )
    schedule = _parse_interjections(interject)
    session = PlaySession(
        setting, config=config,
        backend=_make_backend(backend, config, check_policy, base_url, model),
    )
    try:
        while session.status == "running" and session.tick_count < max_ticks:
            for act_id, text in schedule.get(session.tick_count + 1, []):
                session.player_speak(act_id, text)
            session.tick()
    except StagecraftError as exc:
        raise click.ClickException(str(exc)) from exc
    play = export_play(session)
    if out:
        Path(out).write_text(dump_play(play), encoding="utf-8")
    stats = compute_stats(play)
    click.echo(
        "%s: %s after %d ticks, %d turns, %d/%d objectives, %d model calls"
        % (
            session.session_id,
            session.status,
            stats.total_ticks,
            stats.realized_turns,
            stats.objectives_advanced,
            sum(len(act.objectives) for act in setting.acts),
            stats.llm_calls,
        )
    )
    if out:
        click.echo("record written to %s" % out)


@main.command()
@click.option("--record", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None)
def replay(record, script):
    """Re-run a play record against its transcript and verify it matches."""
    setting = _load_setting(script)
    play = load_play(Path(record).read_text(encoding="utf-8"))
    try:
        if verify_replay(setting, play):
            click.echo("replay ok: %s reproduced byte-for-byte" % play["session_id"])
            return
    except StagecraftError as exc:
        raise click.ClickException("replay diverged: %s" % exc) from exc
    raise click.ClickException("replay produced a different record")


@main.command()
@click.option("--record", type=click.Path(exists=True, dir_okay=False), required=True)
def stats(record):
    """Summarize a play record."""
    play = load_play(Path(record).read_text(encoding="utf-8"))
    click.echo(render_stats(compute_stats(play)))


@main.command("annotate-sheet")
@click.option("--record", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def annotate_sheet(record, out):
    """Export the director's objective checks for human annotation."""
    play = load_play(Path(record).read_text(encoding="utf-8"))
    count = write_annotation_sheet(play, out)
    click.echo("wrote %d check rows to %s" % (count, out))


@main.command("score-checks")
@click.option("--sheet", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--record", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Validate sheet rows against this play record's checks.")
def score_checks_cmd(sheet, record):
    """Score annotated checks: precision, recall, F1."""
    try:
        rows = read_annotation_sheet(sheet)
        known_ids = None
        if record is not None:
            play = load_play(Path(record).read_text(encoding="utf-8"))
            known_ids = {row["check_id"] for row in check_rows(play)}
        score = score_checks(rows, known_ids=known_ids)
    except StagecraftError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo("labeled rows: %d (tp=%d fp=%d fn=%d tn=%d)"
               % (score.labeled, score.tp, score.fp, score.fn, score.tn))
    if score.degenerate:
        click.echo("degenerate: one class is empty; scores are not meaningful")
    click.echo("precision %.2f  recall %.2f  f1 %.2f"
               % (score.precision, score.recall, score.f1))


@main.command()
@click.option("--record", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--backend", type=click.Choice(["scripted", "http"]), default="scripted",
              show_default=True)
@click.option("--base-url", default="https://api.openai.com/v1", show_default=True)
@click.option("--model", default="gpt-3.5-turbo-1106", show_default=True)
def judge(record, script, seed, backend, base_url, model):
    """Rate a finished play's storyline on the 1-4 scale."""
    setting = _load_setting(script)
    play = load_play(Path(record).read_text(encoding="utf-8"))
    config = EngineConfig(seed=seed)
    gateway = GatewayClient(_make_backend(backend, config, "after:2", base_url, model))
    try:
        result = judge_play(setting, play, gateway)
    except StagecraftError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo("storyline logicality    %d" % result.storyline_logicality)
    click.echo("storyline coherence     %d" % result.storyline_coherence)
    click.echo("character consistency   %d" % result.character_consistency)
    click.echo("mean                    %.2f" % result.mean())
    if result.clamped:
        click.echo("note: scores were out of range and were clamped")


@main.command()
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--seeds", default="0,1,2", show_default=True,
              help="Comma-separated seeds; each variant runs once per seed.")
@click.option("--check-policy", default="after:2", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write full ablation rows as JSON.")
def ablate(script, seeds, check_policy, out):
    """Compare feature-toggle variants (instructions, monologues) over seeds."""
    setting = _load_setting(script)
    try:
        seed_values = tuple(int(part) for part in seeds.split(",") if part.strip() != "")
    except ValueError:
        raise click.BadParameter("--seeds must be comma-separated integers") from None
    if not seed_values:
        raise click.BadParameter("--seeds must name at least one seed")
    result = run_ablation(setting, seeds=seed_values, check_policy=check_policy)
    click.echo(render_ablation(result))
    if out:
        Path(out).write_text(
            json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        click.echo("rows written to %s" % out)


@main.command()
@click.option("--script", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8023, show_default=True)
@click.option("--console-dir", type=click.Path(file_okay=False), default=None,
              help="Directory of built console assets to serve under /console.")
def serve(script, host, port, console_dir):
    """Serve the play session API (and console, when built)."""
    import uvicorn

    from .service import create_app

    app = create_app(setting=_load_setting(script), console_dir=console_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    sys.exit(main())
