from __future__ import annotations

import json

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

from .collector import TraceCollector, TurnHandle
from .exceptions import (
    AgentTestkitError, AgentUnconfigured, ConfigError, HandlerError, IoFailure,
    LlmFailure, LoopGuardTripped, SchemaViolation, ToolNotFound,
)
from .ids import ConversationId, new_conversation_id
from .llm_client import LlmClient, record_llm_span
from .memory import ConversationMemory
from .message import LlmRequest, LlmResponse, Message, StopReason, ToolResultBlock, ToolUseBlock
from .span import SpanAttributes, SpanKind, SpanStatus, canonical_json
from .tool import ToolHandler, ToolRegistry, ToolSpec, execute_tool
from .trace import Trace

VERBOSE = False

DEFAULT_MAX_ITERATIONS = 10


@dataclass
class AgentConfig:
    """Agent settings.

    Attributes:
        system_prompt (str): System prompt sent with every LLM request.
        max_iterations_per_turn (int): Loop guard; maximum LLM invocations per turn.
        parallel_tools (bool): Run the tool uses of one response concurrently.
        trace_memory (bool): Emit memory_access spans for history reads and writes.
        llm (dict): Endpoint settings for a real client (`endpoint`, `model`, `timeout`).
    """
    system_prompt: str = ''
    max_iterations_per_turn: int = DEFAULT_MAX_ITERATIONS
    parallel_tools: bool = False
    trace_memory: bool = False
    llm: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.max_iterations_per_turn, bool) or not isinstance(self.max_iterations_per_turn, int) \
                or self.max_iterations_per_turn < 1:
            raise ConfigError(f"max_iterations_per_turn must be a positive integer, got {self.max_iterations_per_turn!r}")

    @classmethod
    def from_dict(cls, d: dict, path: Optional[str] = None) -> AgentConfig:
        known = {'system_prompt', 'max_iterations_per_turn', 'parallel_tools', 'trace_memory', 'llm'}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown agent config keys: {', '.join(sorted(unknown))}", path=path)
        try:
            return cls(**d)
        except ConfigError as e:
            raise ConfigError(str(e), path=path) from None

    @classmethod
    def from_file(cls, path: str) -> AgentConfig:
        """Load an agent configuration JSON file.

        Raises:
            ConfigError: Invalid JSON (with line number) or invalid values.
            IoFailure: The file cannot be read.
        """
        try:
            with open(path, encoding='utf-8') as fh:
                d = json.load(fh)
        except OSError as e:
            raise IoFailure(f"cannot read agent config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", path=path, line_number=e.lineno) from None
        if not isinstance(d, dict):
            raise ConfigError('agent config must be a JSON object', path=path)
        return cls.from_dict(d, path=path)


@dataclass(frozen=True)
class AgentReply:
    text: str
    trace: Trace


class Agent:
    """Minimal tool-calling agent: perceive, ask the brain, act, repeat.

    Attributes:
        name (str): Agent name, used in reports.
        config (AgentConfig): Agent settings.
        llm (Optional[LlmClient]): The brain, mock or real.
        collector (Optional[TraceCollector]): Trace collector receiving every span.
        registry (ToolRegistry): Registered tools.
        memory (Optional[ConversationMemory]): History of the current conversation.
    """
    def __init__(self, config: Optional[AgentConfig] = None, llm: Optional[LlmClient] = None,
                 collector: Optional[TraceCollector] = None, name: str = 'agent'):
        self.name = name
        self.config = config or AgentConfig()
        self.llm = llm
        self.collector = collector
        self.registry = ToolRegistry()
        self.memory: Optional[ConversationMemory] = None

    def __str__(self):
        return f"Agent(name={self.name}, tools={self.registry.names()}, llm={type(self.llm).__name__ if self.llm else None})"

    @property
    def conversation_id(self) -> Optional[str]:
        return self.memory.conversation_id if self.memory else None

    def register_tool(self, spec: ToolSpec, handler: ToolHandler) -> None:
        """Make a tool available in every subsequent LlmRequest.

        Raises:
            DuplicateToolName: The name is already registered.
        """
        self.registry.register(spec, handler)

    def bind_llm(self, llm: LlmClient) -> None:
        self.llm = llm

    def bind_collector(self, collector: TraceCollector) -> None:
        self.collector = collector

    def start_conversation(self, conversation_id: Optional[ConversationId] = None) -> ConversationMemory:
        """Start a new conversation with empty memory."""
        if conversation_id is None:
            conversation_id = self.collector.ids.new_conversation_id() if self.collector else new_conversation_id()
        self.memory = ConversationMemory(conversation_id)
        return self.memory

    def restore_memory(self, memory: ConversationMemory) -> None:
        """Continue a previously exported conversation."""
        self.memory = memory

    def converse(self, user_input: str) -> AgentReply:
        """Run one turn for `user_input`.

        A turn that raises is traced with an error root span and leaves the
        conversation memory unchanged.

        Args:
            user_input (str): The user's message.

        Returns:
            AgentReply with the reply text and the turn's trace.

        Raises:
            AgentUnconfigured: No LLM client or collector is bound.
            LoopGuardTripped: The turn needed more than `max_iterations_per_turn` LLM invocations.
            LlmFailure: The LLM client failed.
        """
        if self.llm is None or self.collector is None:
            raise AgentUnconfigured(f"agent '{self.name}' needs an LLM client and a trace collector before it can converse")
        if self.memory is None:
            self.start_conversation()

        turn = self.collector.begin_turn(self.memory.conversation_id, user_input)
        if self.config.trace_memory:
            self._record_memory(turn, 'read', len(self.memory))
        pending = [Message.user(user_input)]
        try:
            text = self._loop(turn, pending)
        except Exception as e:
            trace = self.collector.end_turn(turn, '', status=SpanStatus.ERROR, error=f"{type(e).__name__}: {e}")
            print(f"[agent] turn {turn.turn_index} failed: {e}") if VERBOSE else None
            if isinstance(e, AgentTestkitError):
                e.trace = trace
            raise

        self._commit(turn, pending)
        trace = self.collector.end_turn(turn, text)
        return AgentReply(text, trace)

    def _commit(self, turn: TurnHandle, pending: list[Message]) -> None:
        self.memory.extend(pending)
        if self.config.trace_memory:
            self._record_memory(turn, 'write', len(pending))

    def _record_memory(self, turn: TurnHandle, operation: str, count: int) -> None:
        start = turn.now()
        turn.record(f"memory.{operation}", SpanKind.MEMORY_ACCESS, start, turn.now(), attributes={
            SpanAttributes.MEMORY_OPERATION: operation,
            SpanAttributes.MEMORY_MESSAGE_COUNT: count,
        })

    def _loop(self, turn: TurnHandle, pending: list[Message]) -> str:
        limit = self.config.max_iterations_per_turn
        for iteration in range(1, limit + 1):
            request = LlmRequest(self.config.system_prompt, self.memory.messages + tuple(pending), self.registry.specs())
            response = self._invoke(request, turn)
            pending.append(Message.assistant(response.content))
            print(f"[agent] iteration {iteration}: {response.stop_reason.value}") if VERBOSE else None
            if response.stop_reason is StopReason.END_TURN:
                return response.text
            pending.append(Message.tool_results(self._run_tools(turn, response)))
        raise LoopGuardTripped(f"turn {turn.turn_index} exceeded {limit} LLM invocations")

    def _invoke(self, request: LlmRequest, turn: TurnHandle) -> LlmResponse:
        before = turn.count(SpanKind.LLM_INVOCATION)
        start = turn.now()
        try:
            response = self.llm.invoke(request, turn=turn)
        except AgentTestkitError:
            raise
        except Exception as e:
            raise LlmFailure(f"LLM client {type(self.llm).__name__} failed: {type(e).__name__}: {e}") from e
        # clients that do not record their own span
        if turn.count(SpanKind.LLM_INVOCATION) == before:
            record_llm_span(turn, response, start, mocked=response.mocked)
        return response

    def _run_tools(self, turn: TurnHandle, response: LlmResponse) -> list[ToolResultBlock]:
        uses = response.tool_uses
        llm_span = turn.latest(SpanKind.LLM_INVOCATION)
        group = llm_span.span_id if llm_span else ''
        parallel = self.config.parallel_tools and len(uses) > 1
        if not parallel:
            return [self._run_tool(turn, use, group, False) for use in uses]
        with ThreadPoolExecutor(max_workers=len(uses)) as executor:
            return list(executor.map(lambda use: self._run_tool(turn, use, group, True), uses))

    def _run_tool(self, turn: TurnHandle, use: ToolUseBlock, group: str, parallel: bool) -> ToolResultBlock:
        start = turn.now()
        is_error = False
        try:
            output: Any = execute_tool(self.registry, use.name, use.input)
            output_json = canonical_json(output)
        except (ToolNotFound, SchemaViolation, HandlerError) as e:
            is_error = True
            output = {'error': str(e)}
        except (TypeError, ValueError) as e:
            is_error = True
            output = {'error': f"tool '{use.name}' returned a value that is not JSON: {e}"}
        if is_error:
            output_json = canonical_json(output)
        end = turn.now()

        turn.record(
            f"execute_tool {use.name}", SpanKind.TOOL_INVOCATION, start, end,
            status=SpanStatus.ERROR if is_error else SpanStatus.OK,
            attributes={
                SpanAttributes.TOOL_NAME: use.name,
                SpanAttributes.TOOL_INPUT: canonical_json(use.input),
                SpanAttributes.TOOL_OUTPUT: output_json,
                SpanAttributes.TOOL_USE_ID: use.tool_use_id,
                SpanAttributes.TOOL_IS_ERROR: is_error,
                SpanAttributes.TOOL_GROUP: group,
                SpanAttributes.TOOL_PARALLEL: parallel,
            },
        )
        return ToolResultBlock(use.tool_use_id, output, is_error=is_error)
