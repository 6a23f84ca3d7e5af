"""Command line workflows: run, replay, analysis subcommands."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from stagecraft.cli import main
from stagecraft.record import load_play

from .conftest import SMALL_PLAY


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def script_file(tmp_path):
    path = tmp_path / "play.yaml"
    path.write_text(SMALL_PLAY, encoding="utf-8")
    return str(path)


def run_record(runner, script_file, tmp_path, *extra):
    out = str(tmp_path / "record.json")
    result = runner.invoke(
        main, ["run", "--script", script_file, "--out", out, *extra]
    )
    assert result.exit_code == 0, result.output
    return out, result


def test_run_writes_a_record_and_summary(runner, script_file, tmp_path):
    out, result = run_record(runner, script_file, tmp_path, "--seed", "3")
    assert "finished" in result.output
    assert "record written to" in result.output
    play = load_play((tmp_path / "record.json").read_text(encoding="utf-8"))
    assert play["status"] == "finished"
    assert play["config"]["seed"] == 3


def test_run_is_deterministic_per_seed(runner, script_file, tmp_path):
    out_a = str(tmp_path / "a.json")
    out_b = str(tmp_path / "b.json")
    for out in (out_a, out_b):
        result = runner.invoke(
            main, ["run", "--script", script_file, "--seed", "5", "--out", out]
        )
        assert result.exit_code == 0, result.output
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_run_applies_interjections(runner, script_file, tmp_path):
    out, _ = run_record(
        runner,
        script_file,
        tmp_path,
        "--check-policy",
        "never",
        "--interject",
        "2:g-1:Let me through, both of you.",
        "--interject",
        "5:g-1:I only came to see the orchids.",
    )
    play = load_play((tmp_path / "record.json").read_text(encoding="utf-8"))
    player_events = [e for e in play["events"] if e["kind"] == "PlayerAction"]
    assert [e["text"] for e in player_events] == [
        "Let me through, both of you.",
        "I only came to see the orchids.",
    ]
    assert [e["tick"] for e in player_events] == [2, 5]


def test_run_rejects_malformed_interjection(runner, script_file):
    result = runner.invoke(
        main, ["run", "--script", script_file, "--interject", "not-a-schedule"]
    )
    assert result.exit_code != 0
    assert "TICK:ACT_ID:TEXT" in result.output


def test_run_ablation_flags_change_the_record(runner, script_file, tmp_path):
    plain = str(tmp_path / "plain.json")
    bare = str(tmp_path / "bare.json")
    runner.invoke(main, ["run", "--script", script_file, "--out", plain])
    runner.invoke(
        main,
        ["run", "--script", script_file, "--out", bare, "--no-instruction", "--no-monologue"],
    )
    play = load_play((tmp_path / "bare.json").read_text(encoding="utf-8"))
    assert play["config"]["instruction_enabled"] is False
    assert play["config"]["monologue_enabled"] is False
    assert (tmp_path / "plain.json").read_bytes() != (tmp_path / "bare.json").read_bytes()


def test_replay_confirms_a_faithful_record(runner, script_file, tmp_path):
    run_record(runner, script_file, tmp_path)
    result = runner.invoke(
        main,
        ["replay", "--record", str(tmp_path / "record.json"), "--script", script_file],
    )
    assert result.exit_code == 0, result.output
    assert "replay ok" in result.output


def test_replay_rejects_a_tampered_record(runner, script_file, tmp_path):
    run_record(runner, script_file, tmp_path)
    record_path = tmp_path / "record.json"
    play = json.loads(record_path.read_text(encoding="utf-8"))
    play["transcript"][0]["response"] = "rewritten"
    record_path.write_text(json.dumps(play), encoding="utf-8")
    result = runner.invoke(
        main, ["replay", "--record", str(record_path), "--script", script_file]
    )
    assert result.exit_code != 0
    assert "diverged" in result.output


def test_stats_renders_counters(runner, script_file, tmp_path):
    run_record(runner, script_file, tmp_path)
    result = runner.invoke(main, ["stats", "--record", str(tmp_path / "record.json")])
    assert result.exit_code == 0, result.output
    assert "realized turns" in result.output
    assert "objective checks" in result.output or "checks" in result.output


def test_annotation_sheet_workflow_scores_checks(runner, script_file, tmp_path):
    run_record(runner, script_file, tmp_path)
    record = str(tmp_path / "record.json")
    sheet = tmp_path / "sheet.csv"
    result = runner.invoke(
        main, ["annotate-sheet", "--record", record, "--out", str(sheet)]
    )
    assert result.exit_code == 0, result.output
    assert "check rows" in result.output
    # annotate: agree with the model on every check
    lines = sheet.read_text(encoding="utf-8").splitlines()
    filled = [lines[0]]
    for line in lines[1:]:
        flag = "true" if ",true," in line else "false"
        filled.append(line + flag)
    sheet.write_text("\n".join(filled) + "\n", encoding="utf-8")
    result = runner.invoke(
        main, ["score-checks", "--sheet", str(sheet), "--record", record]
    )
    assert result.exit_code == 0, result.output
    assert "precision 1.00  recall 1.00  f1 1.00" in result.output


def test_score_checks_flags_rows_from_another_play(runner, script_file, tmp_path):
    run_record(runner, script_file, tmp_path)
    record = str(tmp_path / "record.json")
    sheet = tmp_path / "foreign.csv"
    sheet.write_text(
        "check_id,model_completed,human_completed\nchk-9999,true,true\n",
        encoding="utf-8",
    )
    result = runner.invoke(
        main, ["score-checks", "--sheet", str(sheet), "--record", record]
    )
    assert result.exit_code != 0
    assert "does not match" in result.output


def test_judge_scores_a_record(runner, script_file, tmp_path):
    run_record(runner, script_file, tmp_path)
    result = runner.invoke(
        main,
        ["judge", "--record", str(tmp_path / "record.json"), "--script", script_file],
    )
    assert result.exit_code == 0, result.output
    assert "storyline logicality" in result.output
    assert "mean" in result.output


def test_ablate_summarizes_variants(runner, script_file, tmp_path):
    out = tmp_path / "ablation.json"
    result = runner.invoke(
        main,
        [
            "ablate",
            "--script",
            script_file,
            "--seeds",
            "0,1",
            "--check-policy",
            "after:1",
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    for variant in ("full", "no_instruction", "no_monologue", "neither"):
        assert variant in result.output
    saved = json.loads(out.read_text(encoding="utf-8"))
    assert len(saved["rows"]) == 8


def test_ablate_rejects_bad_seed_list(runner, script_file):
    result = runner.invoke(main, ["ablate", "--script", script_file, "--seeds", "a,b"])
    assert result.exit_code != 0
    assert "comma-separated integers" in result.output


def test_run_call_limit_aborts_cleanly(runner, script_file):
    result = runner.invoke(
        main, ["run", "--script", script_file, "--call-limit", "3"]
    )
    assert result.exit_code != 0
    assert "call budget of 3 exhausted" in result.output
