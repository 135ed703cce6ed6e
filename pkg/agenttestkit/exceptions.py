from __future__ import annotations

from typing import Optional, TYPE_CHECKING

if TYPE_CHECKING:
    from .trace import Trace

# ---------------------------------------------------------------------------- #
# Error hierarchy shared by all agenttestkit modules                           #
# ---------------------------------------------------------------------------- #

class AgentTestkitError(Exception):
    """Base class for all errors raised by agenttestkit.

    Attributes:
        trace (Optional[Trace]): Partial trace of the turn during which the error occurred, when one exists.
    """
    trace: Optional[Trace] = None


# trace model & store
class MalformedSpan(AgentTestkitError, ValueError):
    """A span (or serialized span line) violates the span invariants."""
    def __init__(self, field: str, reason: str, line_number: Optional[int] = None):
        self.field = field
        self.reason = reason
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}invalid span field '{field}': {reason}")

    def at_line(self, line_number: int) -> MalformedSpan:
        """Return a copy of this error citing `line_number`."""
        return MalformedSpan(self.field, self.reason, line_number=line_number)


class MalformedTrace(AgentTestkitError, ValueError):
    """A group of spans cannot form a trace (no root, several roots, mixed conversations)."""


class CollectorClosed(AgentTestkitError, RuntimeError):
    """A turn was started on a closed trace collector."""


class TurnEnded(AgentTestkitError, RuntimeError):
    """A span was emitted to, or an end requested for, a turn that has already ended."""


class TraceMismatch(AgentTestkitError, ValueError):
    """A span does not belong to the turn it was emitted through."""


class IoFailure(AgentTestkitError, OSError):
    """Reading or writing a trace, report or recording file failed."""


# llm interface
class MockExhausted(AgentTestkitError, RuntimeError):
    """The mock LLM was invoked with an empty script queue."""
    def __init__(self, consumed: int, last_user_text: str):
        self.consumed = consumed
        self.last_user_text = last_user_text
        super().__init__(
            f"MockLlm exhausted: {consumed} scripted responses consumed; "
            f"no response left for request with final user text {last_user_text!r}"
        )


class NoRealClient(AgentTestkitError, RuntimeError):
    """A passthrough item was consumed while no real client was bound."""


class ReplayExhausted(AgentTestkitError, RuntimeError):
    """A replay client was asked for more responses than were recorded."""


class ReplayMismatch(AgentTestkitError, ValueError):
    """The request digest differs from the recorded digest at the same position."""
    def __init__(self, position: int, recorded: str, actual: str):
        self.position = position
        self.recorded = recorded
        self.actual = actual
        super().__init__(f"request {position} diverges from recording: recorded digest {recorded}, actual digest {actual}")


class LlmFailure(AgentTestkitError, RuntimeError):
    """The LLM client failed to produce a response."""


# agent core
class DuplicateToolName(AgentTestkitError, ValueError):
    """A tool with the same name is already registered."""


class ToolNotFound(AgentTestkitError, KeyError):
    """The requested tool is not registered."""
    def __str__(self):
        return str(self.args[0]) if self.args else ''


class SchemaViolation(AgentTestkitError, ValueError):
    """Tool input does not satisfy the tool's parameter schema."""
    def __init__(self, tool_name: str, property_name: str, message: str):
        self.tool_name = tool_name
        self.property_name = property_name
        super().__init__(f"tool '{tool_name}': property '{property_name}' {message}")


class HandlerError(AgentTestkitError, RuntimeError):
    """A tool handler raised; the original exception is available as `__cause__`."""


class LoopGuardTripped(AgentTestkitError, RuntimeError):
    """A turn exceeded the configured number of LLM invocations."""


class AgentUnconfigured(AgentTestkitError, RuntimeError):
    """The agent has no LLM client or no trace collector."""


# cases & pyramid
class VariantLengthMismatch(AgentTestkitError, ValueError):
    """A language variant does not have as many inputs as the base case."""


class ConfigError(AgentTestkitError, ValueError):
    """A configuration, case or suite file is malformed."""
    def __init__(self, message: str, path: Optional[str] = None, line_number: Optional[int] = None):
        self.path = path
        self.line_number = line_number
        location = ''
        if path:
            location = f"{path}:{line_number}: " if line_number is not None else f"{path}: "
        super().__init__(f"{location}{message}")


class ExpectationFailed(AgentTestkitError, AssertionError):
    """Raised by strict expectations; carries the failing outcome."""
    def __init__(self, outcome):
        self.outcome = outcome
        super().__init__(f"{outcome.expectation_text}: {outcome.detail}")
