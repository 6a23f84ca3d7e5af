"""Play records: canonical export, loading, and deterministic replay.

A play record captures everything needed to reproduce a session: config,
events (including player actions and their ticks), per-act logs, director
decisions, and the full model transcript. Serialization is canonical
(sorted keys, fixed separators, no timestamps), so equal plays are equal
bytes. Replay drives a fresh session against a ReplayBackend that serves
the recorded transcript while verifying every rendered prompt.
"""

from __future__ import annotations

import json

from .config import EngineConfig
from .engine import PlaySession
from .errors import ParseError, ValidationError
from .gateway import ReplayBackend, TranscriptRecord
from .script import ScriptSetting

PLAY_FORMAT = "stagecraft-play/1"


def export_play(session: PlaySession) -> dict:
    return {
        "format": PLAY_FORMAT,
        "session_id": session.session_id,
        "title": session.setting.title,
        "config": session.config.to_dict(),
        "status": session.status,
        "total_ticks": session.tick_count,
        "events": [event.to_json_obj() for event in session.events],
        "acts": [
            {
                "id": run.act.id,
                "complete": run.complete,
                "log": [
                    {"role": turn.role, "text": turn.utterance, "tick": turn.tick}
                    for turn in run.log
                ],
            }
            for run in session.acts
        ],
        "decisions": [record.to_json_obj() for record in session.director.decision_log],
        "transcript": [record.to_json_obj() for record in session.gateway.transcript],
        "state_digest": session.state_digest(),
    }


def dump_play(play: dict) -> str:
    """Canonical one-line JSON; equal plays serialize to equal bytes."""
    return json.dumps(play, sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"


def load_play(source: str | bytes | dict) -> dict:
    if isinstance(source, (str, bytes)):
        try:
            play = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError("play record is not valid JSON: %s" % exc) from exc
    else:
        play = source
    if not isinstance(play, dict):
        raise ValidationError("play record must be a JSON object")
    if play.get("format") != PLAY_FORMAT:
        raise ValidationError(
            "unsupported play format %r (expected %r)" % (play.get("format"), PLAY_FORMAT)
        )
    for key in ("config", "total_ticks", "events", "transcript"):
        if key not in play:
            raise ValidationError("play record is missing %r" % key)
    return play


def player_schedule(play: dict) -> dict[int, list[tuple[str, str]]]:
    """Player lines by the tick at which they were played."""
    schedule: dict[int, list[tuple[str, str]]] = {}
    for event in play["events"]:
        if event.get("kind") == "PlayerAction":
            schedule.setdefault(int(event["tick"]), []).append(
                (str(event["act_id"]), str(event["text"]))
            )
    return schedule


def replay_play(setting: ScriptSetting, play: dict) -> PlaySession:
    """Re-run a recorded play against its own transcript."""
    play = load_play(play)
    config = EngineConfig.from_dict(play["config"])
    backend = ReplayBackend(
        [TranscriptRecord.from_json_obj(obj) for obj in play["transcript"]]
    )
    session = PlaySession(setting, config=config, backend=backend)
    schedule = player_schedule(play)
    for tick in range(1, int(play["total_ticks"]) + 1):
        for act_id, text in schedule.get(tick, []):
            session.player_speak(act_id, text)
        session.tick()
    return session


def verify_replay(setting: ScriptSetting, play: dict) -> bool:
    """True when replay reproduces the record byte-for-byte."""
    replayed = replay_play(setting, play)
    return dump_play(export_play(replayed)) == dump_play(load_play(play))
