from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Optional, Union

from .span import canonical_json

# ---------------------------------------------------------------------------- #
# Converse-style request/response shapes shared by the mock and real clients   #
# ---------------------------------------------------------------------------- #

@dataclass(frozen=True)
class TextBlock:
    text: str

    def to_dict(self) -> dict:
        return {'text': self.text}


@dataclass(frozen=True)
class ToolUseBlock:
    """A request from the LLM to run one tool.

    Attributes:
        tool_use_id (str): Identifier echoed back by the matching ToolResultBlock.
        name (str): Registered tool name.
        input (Any): JSON input for the tool.
    """
    tool_use_id: str
    name: str
    input: Any = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {'tool_use': {'tool_use_id': self.tool_use_id, 'name': self.name, 'input': self.input}}


@dataclass(frozen=True)
class ToolResultBlock:
    tool_use_id: str
    output: Any
    is_error: bool = False

    def to_dict(self) -> dict:
        return {'tool_result': {'tool_use_id': self.tool_use_id, 'output': self.output, 'is_error': self.is_error}}


ContentBlock = Union[TextBlock, ToolUseBlock, ToolResultBlock]

def block_from_dict(d: dict) -> ContentBlock:
    """Build a content block from its dict form (`{"text": ...}`, `{"tool_use": {...}}` or `{"tool_result": {...}}`)."""
    if 'text' in d:
        return TextBlock(d['text'])
    if 'tool_use' in d:
        t = d['tool_use']
        return ToolUseBlock(t['tool_use_id'], t['name'], t.get('input', {}))
    if 'tool_result' in d:
        t = d['tool_result']
        return ToolResultBlock(t['tool_use_id'], t.get('output'), bool(t.get('is_error', False)))
    raise ValueError(f"unknown content block {d!r}")


class Role(str, Enum):
    USER = 'user'
    ASSISTANT = 'assistant'
    TOOL_RESULT = 'tool_result'


@dataclass(frozen=True)
class Message:
    """One entry of the conversation history.

    Attributes:
        role (Role): Who produced the message.
        content (tuple[ContentBlock, ...]): Non-empty list of content blocks.
    """
    role: Role
    content: tuple

    def __init__(self, role: Union[Role, str], content: Iterable[ContentBlock]):
        object.__setattr__(self, 'role', Role(role))
        object.__setattr__(self, 'content', tuple(content))
        if not self.content:
            raise ValueError('message content must not be empty')

    @classmethod
    def user(cls, text: str) -> Message:
        return cls(Role.USER, [TextBlock(text)])

    @classmethod
    def assistant(cls, content: Iterable[ContentBlock]) -> Message:
        return cls(Role.ASSISTANT, content)

    @classmethod
    def tool_results(cls, results: Iterable[ToolResultBlock]) -> Message:
        return cls(Role.TOOL_RESULT, results)

    @property
    def text(self) -> str:
        return ''.join(b.text for b in self.content if isinstance(b, TextBlock))

    def to_dict(self) -> dict:
        return {'role': self.role.value, 'content': [b.to_dict() for b in self.content]}

    @classmethod
    def from_dict(cls, d: dict) -> Message:
        return cls(d['role'], [block_from_dict(b) for b in d['content']])


class StopReason(str, Enum):
    END_TURN = 'end_turn'
    TOOL_USE = 'tool_use'


@dataclass(frozen=True)
class LlmRequest:
    """Everything the brain sees for one invocation.

    Attributes:
        system_prompt (str): Agent system prompt.
        messages (tuple[Message, ...]): History, beginning with a user message.
        tool_specs (tuple[ToolSpec, ...]): Tools the LLM may request.
    """
    system_prompt: str
    messages: tuple
    tool_specs: tuple = ()

    def __init__(self, system_prompt: str, messages: Iterable[Message], tool_specs: Iterable = ()):
        object.__setattr__(self, 'system_prompt', system_prompt)
        object.__setattr__(self, 'messages', tuple(messages))
        object.__setattr__(self, 'tool_specs', tuple(tool_specs))
        self._validate()

    def _validate(self):
        if not self.messages:
            raise ValueError('request must contain at least one message')
        if self.messages[0].role is not Role.USER:
            raise ValueError(f"request must begin with a user message, not {self.messages[0].role.value}")
        issued = set()
        previous = None
        for m in self.messages:
            for b in m.content:
                if isinstance(b, ToolUseBlock):
                    issued.add(b.tool_use_id)
                elif isinstance(b, ToolResultBlock):
                    if b.tool_use_id not in issued:
                        raise ValueError(f"tool result {b.tool_use_id} has no preceding tool use")
            if m.role is Role.TOOL_RESULT and (previous is None or previous.role is not Role.ASSISTANT):
                raise ValueError('tool_result messages must follow an assistant message')
            previous = m

    @property
    def final_user_text(self) -> str:
        """Text of the last user message in the history."""
        for m in reversed(self.messages):
            if m.role is Role.USER:
                return m.text
        return ''

    def to_dict(self) -> dict:
        return {
            'system_prompt': self.system_prompt,
            'messages': [m.to_dict() for m in self.messages],
            'tool_specs': [s.to_dict() for s in self.tool_specs],
        }


@dataclass(frozen=True)
class LlmResponse:
    """What the brain returns for one invocation.

    `mocked` records whether a scripted item produced the response; it is not
    part of response equality.
    """
    stop_reason: StopReason
    content: tuple
    mocked: bool = field(default=False, compare=False)

    def __init__(self, stop_reason: Union[StopReason, str], content: Iterable[ContentBlock], mocked: bool = False):
        object.__setattr__(self, 'stop_reason', StopReason(stop_reason))
        object.__setattr__(self, 'content', tuple(content))
        object.__setattr__(self, 'mocked', mocked)

        has_text = any(isinstance(b, TextBlock) for b in self.content)
        has_tool_use = any(isinstance(b, ToolUseBlock) for b in self.content)
        if any(isinstance(b, ToolResultBlock) for b in self.content):
            raise ValueError('an LLM response cannot contain tool results')
        if self.stop_reason is StopReason.TOOL_USE and not has_tool_use:
            raise ValueError('stop_reason tool_use requires at least one tool use block')
        if self.stop_reason is StopReason.END_TURN and (not has_text or has_tool_use):
            raise ValueError('stop_reason end_turn requires text blocks and no tool use block')

    def __str__(self):
        return f"LlmResponse(stop_reason={self.stop_reason.value}, blocks={len(self.content)}, mocked={self.mocked})"

    @property
    def text(self) -> str:
        return ''.join(b.text for b in self.content if isinstance(b, TextBlock))

    @property
    def tool_uses(self) -> list[ToolUseBlock]:
        return [b for b in self.content if isinstance(b, ToolUseBlock)]

    def to_dict(self) -> dict:
        return {'stop_reason': self.stop_reason.value, 'content': [b.to_dict() for b in self.content]}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict, mocked: bool = False) -> LlmResponse:
        return cls(d['stop_reason'], [block_from_dict(b) for b in d['content']], mocked=mocked)

    @classmethod
    def end_turn(cls, *texts: str, mocked: bool = False) -> LlmResponse:
        return cls(StopReason.END_TURN, [TextBlock(t) for t in texts], mocked=mocked)
