from __future__ import annotations

import threading

from collections import deque
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Union, TYPE_CHECKING

from .exceptions import AgentTestkitError, LlmFailure, MockExhausted, NoRealClient
from .llm_client import LlmClient, record_llm_span
from .message import LlmRequest, LlmResponse, StopReason, TextBlock, ToolUseBlock

if TYPE_CHECKING:
    from .collector import TurnHandle

VERBOSE = False

# ---------------------------------------------------------------------------- #
# Scripted responses                                                           #
# ---------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ScriptedText:
    """End-of-turn reply made of one or more text blocks."""
    texts: tuple

    def __init__(self, texts: Union[str, Iterable[str]]):
        texts = (texts,) if isinstance(texts, str) else tuple(texts)
        if not texts:
            raise ValueError('ScriptedText needs at least one text')
        if any(not isinstance(t, str) or t == '' for t in texts):
            raise ValueError('ScriptedText texts must be non-empty strings')
        object.__setattr__(self, 'texts', texts)

    def to_dict(self) -> dict:
        return {'text': list(self.texts)}


@dataclass(frozen=True)
class ScriptedToolUse:
    """Tool-use reply; `requests` is a list of `{"name": ..., "input": ...}`."""
    requests: tuple

    def __init__(self, requests: Iterable[dict]):
        requests = tuple(requests) if not isinstance(requests, dict) else (requests,)
        if not requests:
            raise ValueError('ScriptedToolUse needs at least one request')
        normalized = []
        for r in requests:
            if not isinstance(r, dict) or not r.get('name'):
                raise ValueError(f"tool-use request {r!r} must be a map with a name")
            normalized.append({'name': r['name'], 'input': r.get('input', {})})
        object.__setattr__(self, 'requests', tuple(normalized))

    def to_dict(self) -> dict:
        return {'tool_use': [dict(r) for r in self.requests]}


@dataclass(frozen=True)
class Passthrough:
    """Delegates one invocation to the bound real client."""

    def to_dict(self) -> dict:
        return {'passthrough': True}


ScriptedResponse = Union[ScriptedText, ScriptedToolUse, Passthrough]

def scripted_from_dict(d: Any) -> ScriptedResponse:
    """Parse a mock script item: `{"text": [...]}`, `{"tool_use": [...]}` or `{"passthrough": true}`."""
    if isinstance(d, dict):
        if 'text' in d:
            return ScriptedText(d['text'])
        if 'tool_use' in d:
            return ScriptedToolUse(d['tool_use'])
        if d.get('passthrough') is True:
            return Passthrough()
    raise ValueError(f"unknown mock script item {d!r}")


# ---------------------------------------------------------------------------- #
# The mock                                                                     #
# ---------------------------------------------------------------------------- #

class MockLlm:
    """LLM test double answering from a FIFO queue of scripted responses.

    Every invoke consumes exactly the front item. Tool-use ids are issued as
    `tooluse-1`, `tooluse-2`, ... per instance.

    Attributes:
        real_client (Optional[LlmClient]): Client serving Passthrough items.
        tool_use_counter (int): Next tool-use id number.
        call_log (list[LlmRequest]): Every request received, in order.
        consumed (int): Number of queue items consumed.
    """
    def __init__(self, real_client: Optional[LlmClient] = None, script: Iterable[ScriptedResponse] = ()):
        self.real_client = real_client
        self.tool_use_counter = 1
        self.call_log: list[LlmRequest] = []
        self.consumed = 0
        self._queue: deque = deque()
        self._lock = threading.Lock()
        for item in script:
            self._enqueue(item)

    def __str__(self):
        return f"MockLlm(queued={len(self._queue)}, consumed={self.consumed}, real_client={self.real_client})"

    def __len__(self):
        return len(self._queue)

    @property
    def queue(self) -> tuple:
        return tuple(self._queue)

    def _enqueue(self, item: ScriptedResponse) -> None:
        if not isinstance(item, (ScriptedText, ScriptedToolUse, Passthrough)):
            item = scripted_from_dict(item)
        with self._lock:
            self._queue.append(item)

    def add_output(self, scripted: Optional[ScriptedResponse] = None, text_output: Optional[Union[str, list]] = None,
                   tool_use_output: Optional[list] = None) -> None:
        """Append a scripted text or tool-use response to the queue.

        Args:
            scripted (Optional[ScriptedResponse], optional): A ScriptedText or ScriptedToolUse.
            text_output (Optional[Union[str, list]], optional): Text(s) for an end-of-turn reply.
            tool_use_output (Optional[list], optional): `[{"name": ..., "input": {...}}, ...]`.
        """
        given = [x for x in (scripted, text_output, tool_use_output) if x is not None]
        if len(given) != 1:
            raise ValueError('add_output takes exactly one of scripted, text_output, tool_use_output')
        if text_output is not None:
            scripted = ScriptedText(text_output)
        elif tool_use_output is not None:
            scripted = ScriptedToolUse(tool_use_output)
        if isinstance(scripted, Passthrough):
            raise ValueError('use add_real_response() to schedule a passthrough')
        self._enqueue(scripted)

    def add_real_response(self) -> None:
        """Schedule one invocation to be served by the real client."""
        self._enqueue(Passthrough())

    def bind_real_client(self, client: LlmClient) -> None:
        self.real_client = client

    def invoke(self, request: LlmRequest, turn: Optional[TurnHandle] = None) -> LlmResponse:
        """Answer with the front queue item.

        Args:
            request (LlmRequest): The agent's request.
            turn (Optional[TurnHandle], optional): Turn to record the llm_invocation span into.

        Returns:
            The scripted (or delegated) LlmResponse.

        Raises:
            MockExhausted: The queue is empty.
            NoRealClient: A Passthrough item was reached with no real client bound.
        """
        start_time = turn.now() if turn is not None else 0
        with self._lock:
            self.call_log.append(request)
            if not self._queue:
                raise MockExhausted(self.consumed, request.final_user_text)
            item = self._queue.popleft()
            self.consumed += 1
            if isinstance(item, ScriptedText):
                response = LlmResponse(StopReason.END_TURN, [TextBlock(t) for t in item.texts], mocked=True)
            elif isinstance(item, ScriptedToolUse):
                blocks = []
                for r in item.requests:
                    blocks.append(ToolUseBlock(f"tooluse-{self.tool_use_counter}", r['name'], r['input']))
                    self.tool_use_counter += 1
                response = LlmResponse(StopReason.TOOL_USE, blocks, mocked=True)
            else:
                response = None
        print(f"[mock] served item {self.consumed} ({type(item).__name__})") if VERBOSE else None

        if response is None:
            response = self._passthrough(request)
        if turn is not None:
            record_llm_span(turn, response, start_time, mocked=response.mocked)
        return response

    def _passthrough(self, request: LlmRequest) -> LlmResponse:
        if self.real_client is None:
            raise NoRealClient(f"queue item {self.consumed} is a passthrough but no real client is bound")
        try:
            response = self.real_client.invoke(request)
        except AgentTestkitError:
            raise
        except Exception as e:
            raise LlmFailure(f"real client failed on passthrough: {e}") from e
        return LlmResponse(response.stop_reason, response.content, mocked=False)
