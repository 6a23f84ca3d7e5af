"""stagecraft: a director/actor orchestration engine for interactive drama.

A director agent plans storylines and scripts act by act, briefs actor
agents turn by turn, and checks plot objectives; actors answer in persona
backed by monologue-surfaced memory; a human player can interject at any
time and bend the storyline around what they said.
"""

from .actor import ActorAgent, Rejection, RejectionReason, RevisionOutcome
from .config import EngineConfig
from .director import DirectorAgent, Storyline
from .engine import (
    InterviewSession,
    PlaySession,
    TurnEvent,
    TurnEventKind,
    start_session,
)
from .errors import (
    BackendUnavailable,
    BudgetExceeded,
    CooldownViolation,
    DanglingAnnotation,
    GenerationFailed,
    MalformedOutput,
    MissingPlaceholder,
    NotPaused,
    OutOfOrderTick,
    ParseError,
    ReplayDivergence,
    SessionFinished,
    SessionNotRunning,
    StagecraftError,
    UnknownAct,
    UnknownRole,
    UnknownSession,
    ValidationError,
)
from .gateway import (
    GatewayClient,
    HttpBackend,
    HttpBackendConfig,
    ReplayBackend,
    ScriptedBackend,
    ScriptedRule,
    TemplateId,
    load_templates,
)
from .record import dump_play, export_play, load_play, replay_play, verify_replay
from .retrieval import (
    CharacterStore,
    HashedEmbedder,
    MemoryDocument,
    MemoryStore,
    RetrievalScore,
    add_memory,
    retrieve_characters,
    retrieve_memories,
)
from .script import (
    NARRATION,
    Act,
    CharacterKind,
    CharacterProfile,
    DialogueTurn,
    PlannedTurn,
    PlotObjective,
    RelationDoc,
    ScriptSetting,
    SeedMemory,
    dump_script,
    load_demo_script,
    load_script,
)

__version__ = "0.1.0"

__all__ = [
    "ActorAgent",
    "Act",
    "BackendUnavailable",
    "BudgetExceeded",
    "CharacterKind",
    "CharacterProfile",
    "CharacterStore",
    "CooldownViolation",
    "DanglingAnnotation",
    "DialogueTurn",
    "DirectorAgent",
    "EngineConfig",
    "GatewayClient",
    "GenerationFailed",
    "HashedEmbedder",
    "HttpBackend",
    "HttpBackendConfig",
    "InterviewSession",
    "MalformedOutput",
    "MemoryDocument",
    "MemoryStore",
    "MissingPlaceholder",
    "NARRATION",
    "NotPaused",
    "OutOfOrderTick",
    "ParseError",
    "PlannedTurn",
    "PlaySession",
    "PlotObjective",
    "Rejection",
    "RejectionReason",
    "RelationDoc",
    "ReplayBackend",
    "RetrievalScore",
    "ReplayDivergence",
    "RevisionOutcome",
    "ScriptSetting",
    "ScriptedBackend",
    "ScriptedRule",
    "SeedMemory",
    "SessionFinished",
    "SessionNotRunning",
    "StagecraftError",
    "Storyline",
    "TemplateId",
    "TurnEvent",
    "TurnEventKind",
    "UnknownAct",
    "UnknownRole",
    "UnknownSession",
    "ValidationError",
    "add_memory",
    "dump_play",
    "dump_script",
    "export_play",
    "load_demo_script",
    "load_play",
    "load_script",
    "load_templates",
    "retrieve_characters",
    "retrieve_memories",
    "replay_play",
    "start_session",
    "verify_replay",
    "__version__",
]
