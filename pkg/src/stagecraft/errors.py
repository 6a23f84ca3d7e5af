"""Exception hierarchy shared across the engine."""


class StagecraftError(Exception):
    """Base class for all package errors."""


class ParseError(StagecraftError):
    """A script document is not well-formed."""


class ValidationError(StagecraftError):
    """A script document violates a structural invariant."""


class MissingPlaceholder(StagecraftError):
    """A template binding set does not cover the template's placeholders."""


class BackendUnavailable(StagecraftError):
    """The completion backend could not be reached or refused the request."""


class BudgetExceeded(StagecraftError):
    """The per-session completion call cap was hit."""


class MalformedOutput(StagecraftError):
    """A completion could not be parsed, even after the repair pass."""


class GenerationFailed(StagecraftError):
    """Retries exhausted without a usable completion."""


class ReplayDivergence(StagecraftError):
    """A replayed request does not line up with the recorded transcript."""


class EmbedderUnavailable(StagecraftError):
    """The remote embedding provider could not be reached."""


class OutOfOrderTick(StagecraftError):
    """A dialogue turn arrived with a tick not greater than the last one."""


class CooldownViolation(StagecraftError):
    """The player attempted consecutive actions inside the cooldown window."""


class UnknownAct(StagecraftError):
    """The referenced act does not exist or is not in the current column."""


class UnknownSession(StagecraftError):
    """The referenced session id is not known to the service."""


class UnknownRole(StagecraftError):
    """The referenced role is not an interviewable character."""


class SessionFinished(StagecraftError):
    """The session has already played out all acts."""


class SessionNotRunning(StagecraftError):
    """The session is paused (or finished) and cannot advance."""


class NotPaused(StagecraftError):
    """Resume/interview was requested while the session is not paused."""


class DanglingAnnotation(StagecraftError):
    """An annotation references a check event that does not exist."""
