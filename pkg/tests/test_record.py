"""Play records: export, canonical serialization, deterministic replay."""

from __future__ import annotations

import json

import pytest

from stagecraft.errors import ParseError, ReplayDivergence, ValidationError
from stagecraft.record import (
    PLAY_FORMAT,
    dump_play,
    export_play,
    load_play,
    player_schedule,
    replay_play,
    verify_replay,
)

from .conftest import make_session


@pytest.fixture(scope="module")
def finished_play(small_setting):
    session = make_session(small_setting, seed=4).run_to_completion()
    return export_play(session), session


def test_export_shape(finished_play):
    play, session = finished_play
    assert play["format"] == PLAY_FORMAT
    assert play["session_id"] == session.session_id
    assert play["title"] == "The Locked Greenhouse"
    assert play["status"] == "finished"
    assert play["total_ticks"] == session.tick_count
    assert len(play["events"]) == len(session.events)
    assert [act["id"] for act in play["acts"]] == ["g-1"]
    act = play["acts"][0]
    assert act["complete"] is True
    assert len(act["log"]) == len(session.acts[0].log)
    assert set(act["log"][0]) == {"role", "text", "tick"}
    assert play["state_digest"] == session.state_digest()
    assert play["decisions"] and play["transcript"]


def test_dump_play_is_canonical_one_liner(finished_play):
    play, _ = finished_play
    text = dump_play(play)
    assert text.endswith("\n")
    assert text.count("\n") == 1
    assert json.loads(text) == play
    assert dump_play(json.loads(text)) == text


def test_load_play_round_trip(finished_play):
    play, _ = finished_play
    assert load_play(dump_play(play)) == play
    assert load_play(dump_play(play).encode("utf-8")) == play
    assert load_play(play) is play


def test_load_play_rejects_bad_input():
    with pytest.raises(ParseError):
        load_play("{not json")
    with pytest.raises(ValidationError):
        load_play("[1, 2]")
    with pytest.raises(ValidationError):
        load_play('{"format": "other/9"}')
    broken = {"format": PLAY_FORMAT, "config": {}, "total_ticks": 1, "events": []}
    with pytest.raises(ValidationError):
        load_play(broken)  # transcript missing


def test_replay_reproduces_the_record(small_setting, finished_play):
    play, _ = finished_play
    assert verify_replay(small_setting, play)


def test_replay_reproduces_player_interruptions(small_setting):
    session = make_session(small_setting, seed=6, check_policy="never")
    session.tick()
    session.player_speak("g-1", "I ask about the flagstones, loudly.")
    for _ in range(3):
        session.tick()
    session.player_speak("g-1", "And the brass key?")
    session.run_to_completion()
    play = export_play(session)
    schedule = player_schedule(play)
    assert sum(len(lines) for lines in schedule.values()) == 2
    assert verify_replay(small_setting, play)
    replayed = replay_play(small_setting, play)
    assert replayed.state_digest() == play["state_digest"]


def test_replay_flags_tampered_transcript(small_setting, finished_play):
    play, _ = finished_play
    tampered = json.loads(dump_play(play))
    tampered["transcript"][3]["response"] = "something that was never said"
    with pytest.raises(ReplayDivergence):
        replay_play(small_setting, tampered)


def test_replay_flags_tampered_player_line(small_setting):
    session = make_session(small_setting, seed=6, check_policy="never")
    session.tick()
    session.player_speak("g-1", "Original words.")
    session.tick()
    session.run_to_completion()
    play = json.loads(dump_play(export_play(session)))
    for event in play["events"]:
        if event["kind"] == "PlayerAction":
            event["text"] = "Different words."
    with pytest.raises(ReplayDivergence):
        replay_play(small_setting, play)


def test_player_schedule_indexes_by_tick(small_setting):
    session = make_session(small_setting, check_policy="never")
    session.tick()
    session.player_speak("g-1", "Hello?")
    session.tick()
    play = export_play(session)
    schedule = player_schedule(play)
    assert schedule == {2: [("g-1", "Hello?")]}
