"""Shared fixtures: play settings of various shapes and session builders."""

from __future__ import annotations

import pytest

from stagecraft import EngineConfig, PlaySession, load_demo_script, load_script
from stagecraft.gateway import ScriptedBackend

SMALL_PLAY = """
title: The Locked Greenhouse
characters:
  - name: Alba
    description: A retired botanist who guards the greenhouse keys and her own counsel.
  - name: Bruno
    description: A restless journalist convinced the greenhouse hides a story.
  - name: Piet
    kind: player
    description: A visitor whose reasons for coming are their own.
relations:
  - subject: Alba
    object: Bruno
    content: Alba has read every article Bruno wrote about the estate.
    monologue: I have read everything Bruno printed about us, twice.
  - subject: Bruno
    object: Alba
    content: Bruno believes Alba burned the estate ledgers years ago.
    monologue: I am certain Alba burned those ledgers, whatever she claims.
seed_memories:
  Alba:
    - content: The north bed hides a brass key under the third flagstone.
      monologue: I buried the brass key under the third flagstone myself.
    - content: The orchid house flooded the winter the ledgers vanished.
      monologue: I remember the flood; it came the same winter everything else went wrong.
  Bruno:
    - content: An unsigned letter claimed the greenhouse stayed lit all night.
      monologue: Someone wrote to me that the greenhouse burned its lights till dawn.
acts:
  - id: g-1
    column: 0
    place: The greenhouse door
    background: Evening. Alba blocks the doorway while Bruno presses for entry.
    characters: [Alba, Bruno, Piet]
    objectives:
      - id: g-1/talk
        text: Bruno persuades Alba to discuss the locked greenhouse.
      - id: g-1/key
        text: The location of the brass key comes up in conversation.
"""

TWO_COLUMN_PLAY = """
title: Relay
characters:
  - name: Maren
    description: A harbor pilot who trusts charts over promises.
  - name: Odd
    description: A dockhand who hears every rumor first.
  - name: Sif
    description: A clerk who keeps two sets of arrival times.
  - name: Guest
    kind: player
    description: A traveler with no cargo listed.
acts:
  - id: r-1
    column: 0
    place: Pier three
    background: Fog. A ship is overdue and the pilots keep their own counsel.
    characters: [Maren, Odd]
    objectives:
      - id: r-1/o1
        text: Maren and Odd agree the overdue ship changed course.
  - id: r-2
    column: 0
    place: The harbor office
    background: The clerk compares two arrival ledgers by lamplight.
    characters: [Sif, Guest]
    objectives:
      - id: r-2/o1
        text: Sif admits the ledgers disagree about the overdue ship.
  - id: r-3
    column: 1
    place: The breakwater
    background: Morning. The fog lifts on an empty mooring.
    characters: [Maren, Sif]
    objectives:
      - id: r-3/o1
        text: Maren and Sif decide what to report about the empty mooring.
"""


@pytest.fixture(scope="session")
def demo_setting():
    return load_demo_script()


@pytest.fixture(scope="session")
def small_setting():
    return load_script(SMALL_PLAY)


@pytest.fixture(scope="session")
def two_column_setting():
    return load_script(TWO_COLUMN_PLAY)


def make_session(setting, seed=0, check_policy="after:2", **overrides) -> PlaySession:
    """Deterministic scripted-backend session with config overrides."""
    config = EngineConfig(seed=seed, **overrides)
    backend = ScriptedBackend(seed=seed, check_policy=check_policy)
    return PlaySession(setting, config=config, backend=backend)


@pytest.fixture
def small_session(small_setting):
    return make_session(small_setting)
