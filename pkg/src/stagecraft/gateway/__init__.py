"""Model gateway: prompt templates, backends, and output parsing."""

from .backends import (
    EMPTY_LOG_SENTINEL,
    NO_MEMORIES_SENTINEL,
    Backend,
    DecodeHints,
    GatewayClient,
    HttpBackend,
    HttpBackendConfig,
    LlmRequest,
    ReplayBackend,
    ScriptedBackend,
    ScriptedRule,
    TranscriptRecord,
)
from .parsing import (
    CheckResult,
    InstructionResult,
    OutlineResult,
    extract_json,
    extract_line,
    parse_check,
    parse_instruction,
    parse_judge,
    parse_outline,
    parse_points,
    parse_script,
)
from .templates import (
    ChatMessage,
    PromptTemplate,
    Role,
    TemplateId,
    TemplateSet,
    load_templates,
    parse_templates,
)

__all__ = [
    "Backend",
    "ChatMessage",
    "CheckResult",
    "DecodeHints",
    "EMPTY_LOG_SENTINEL",
    "GatewayClient",
    "HttpBackend",
    "HttpBackendConfig",
    "InstructionResult",
    "LlmRequest",
    "NO_MEMORIES_SENTINEL",
    "OutlineResult",
    "PromptTemplate",
    "ReplayBackend",
    "Role",
    "ScriptedBackend",
    "ScriptedRule",
    "TemplateId",
    "TemplateSet",
    "TranscriptRecord",
    "extract_json",
    "extract_line",
    "parse_check",
    "parse_instruction",
    "parse_judge",
    "parse_outline",
    "parse_points",
    "parse_script",
    "parse_templates",
    "load_templates",
]
