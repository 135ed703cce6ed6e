from __future__ import annotations

import json
import math

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Mapping, Optional, Union

from .exceptions import MalformedSpan
from .ids import is_valid_span_id, is_valid_trace_id

AttributeValue = Union[str, int, float, bool]


class SpanKind(str, Enum):
    """Closed taxonomy of recorded agent operations."""
    AGENT_TURN = 'agent_turn'
    LLM_INVOCATION = 'llm_invocation'
    TOOL_INVOCATION = 'tool_invocation'
    MEMORY_ACCESS = 'memory_access'
    KB_QUERY = 'kb_query'


class SpanStatus(str, Enum):
    OK = 'ok'
    ERROR = 'error'


class SpanAttributes:
    """Attribute keys of the `ai.` namespace. See docs/trace_schema.md."""
    CONVERSATION_ID = 'ai.conversation.id'

    TURN_USER_INPUT = 'ai.turn.user_input'
    TURN_AGENT_REPLY = 'ai.turn.agent_reply'
    TURN_INDEX = 'ai.turn.index'
    TURN_ERROR = 'ai.turn.error'
    TURN_OPEN = 'ai.turn.open'

    LLM_STOP_REASON = 'ai.llm.stop_reason'
    LLM_MOCKED = 'ai.llm.mocked'
    LLM_RESPONSE = 'ai.llm.response'
    LLM_ITERATION = 'ai.llm.iteration'

    TOOL_NAME = 'ai.tool.name'
    TOOL_INPUT = 'ai.tool.input'
    TOOL_OUTPUT = 'ai.tool.output'
    TOOL_USE_ID = 'ai.tool.use_id'
    TOOL_IS_ERROR = 'ai.tool.is_error'
    TOOL_GROUP = 'ai.tool.group'
    TOOL_PARALLEL = 'ai.tool.parallel'

    MEMORY_OPERATION = 'ai.memory.operation'
    MEMORY_MESSAGE_COUNT = 'ai.memory.message_count'


# attributes each kind must carry on top of the conversation id
_required_by_kind = {
    SpanKind.TOOL_INVOCATION: (SpanAttributes.TOOL_NAME, SpanAttributes.TOOL_INPUT, SpanAttributes.TOOL_OUTPUT),
    SpanKind.LLM_INVOCATION: (SpanAttributes.LLM_STOP_REASON, SpanAttributes.LLM_MOCKED),
}
_stop_reasons = ('end_turn', 'tool_use')
_span_fields = ('attributes', 'end_time', 'kind', 'name', 'parent_span_id', 'span_id', 'start_time', 'status', 'trace_id')

def canonical_json(value: Any) -> str:
    """Serialize `value` with sorted keys and no insignificant whitespace."""
    return json.dumps(value, sort_keys=True, separators=(',', ':'), ensure_ascii=False, allow_nan=False)

def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


@dataclass(frozen=True, eq=False)
class Span:
    """One recorded agent action.

    Spans are immutable; construction validates every invariant and raises
    `MalformedSpan` naming the offending field. Two spans are equal when
    their canonical serializations are equal, so `1`, `1.0` and `True` are
    distinct attribute values.

    Attributes:
        trace_id (str): 32-hex trace identifier.
        span_id (str): 16-hex span identifier.
        parent_span_id (Optional[str]): Parent span id, `None` for the turn root.
        name (str): Human readable operation name.
        kind (SpanKind): Operation kind.
        start_time (int): Start, nanoseconds since Unix epoch.
        end_time (int): End, nanoseconds since Unix epoch.
        status (SpanStatus): `ok` or `error`.
        attributes (Mapping[str, AttributeValue]): Flat attribute map.
    """
    trace_id: str
    span_id: str
    parent_span_id: Optional[str]
    name: str
    kind: SpanKind
    start_time: int
    end_time: int
    status: SpanStatus = SpanStatus.OK
    attributes: Mapping[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        if not is_valid_trace_id(self.trace_id):
            raise MalformedSpan('trace_id', f"expected 32 lowercase hex characters (not all zero), got {self.trace_id!r}")
        if not is_valid_span_id(self.span_id):
            raise MalformedSpan('span_id', f"expected 16 lowercase hex characters (not all zero), got {self.span_id!r}")
        if self.parent_span_id is not None and not is_valid_span_id(self.parent_span_id):
            raise MalformedSpan('parent_span_id', f"expected 16 lowercase hex characters or null, got {self.parent_span_id!r}")
        if not isinstance(self.name, str):
            raise MalformedSpan('name', 'must be a string')

        try:
            object.__setattr__(self, 'kind', SpanKind(self.kind))
        except ValueError:
            raise MalformedSpan('kind', f"unknown span kind {self.kind!r}") from None
        try:
            object.__setattr__(self, 'status', SpanStatus(self.status))
        except ValueError:
            raise MalformedSpan('status', f"unknown span status {self.status!r}") from None

        if not _is_int(self.start_time):
            raise MalformedSpan('start_time', 'must be integer nanoseconds')
        if not _is_int(self.end_time):
            raise MalformedSpan('end_time', 'must be integer nanoseconds')
        if self.end_time < self.start_time:
            raise MalformedSpan('end_time', f"end_time {self.end_time} precedes start_time {self.start_time}")

        if not isinstance(self.attributes, Mapping):
            raise MalformedSpan('attributes', 'must be a map')
        for k, v in self.attributes.items():
            if not isinstance(k, str):
                raise MalformedSpan('attributes', f"key {k!r} is not a string")
            if not isinstance(v, (str, int, float, bool)):
                raise MalformedSpan(k, f"attribute value of type {type(v).__name__} is not string, integer, float or boolean")
            if isinstance(v, float) and not math.isfinite(v):
                raise MalformedSpan(k, 'attribute value must be finite')
        object.__setattr__(self, 'attributes', MappingProxyType(dict(self.attributes)))

        conversation_id = self.attributes.get(SpanAttributes.CONVERSATION_ID)
        if not isinstance(conversation_id, str) or not conversation_id:
            raise MalformedSpan(SpanAttributes.CONVERSATION_ID, 'every span requires a non-empty conversation id attribute')

        for key in _required_by_kind.get(self.kind, ()):
            if key not in self.attributes:
                raise MalformedSpan(key, f"required on {self.kind.value} spans")
        if self.kind is SpanKind.TOOL_INVOCATION:
            for key in _required_by_kind[self.kind]:
                if not isinstance(self.attributes[key], str):
                    raise MalformedSpan(key, 'must be a string')
            for key in (SpanAttributes.TOOL_INPUT, SpanAttributes.TOOL_OUTPUT):
                try:
                    json.loads(self.attributes[key])
                except ValueError:
                    raise MalformedSpan(key, 'must be JSON text') from None
        elif self.kind is SpanKind.LLM_INVOCATION:
            if self.attributes[SpanAttributes.LLM_STOP_REASON] not in _stop_reasons:
                raise MalformedSpan(SpanAttributes.LLM_STOP_REASON, f"must be one of {', '.join(_stop_reasons)}")
            if not isinstance(self.attributes[SpanAttributes.LLM_MOCKED], bool):
                raise MalformedSpan(SpanAttributes.LLM_MOCKED, 'must be a boolean')

    def __str__(self):
        return f"Span(name={self.name}, kind={self.kind.value}, span_id={self.span_id}, status={self.status.value})"

    def __eq__(self, other):
        if not isinstance(other, Span):
            return NotImplemented
        return serialize_span(self) == serialize_span(other)

    def __hash__(self):
        return hash(serialize_span(self))

    @property
    def duration_ns(self) -> int:
        return self.end_time - self.start_time

    @property
    def is_root(self) -> bool:
        return self.parent_span_id is None

    @property
    def conversation_id(self) -> str:
        return self.attributes[SpanAttributes.CONVERSATION_ID]

    def attr(self, key: str, default: Any = None) -> Any:
        return self.attributes.get(key, default)

    def json_attr(self, key: str, default: Any = None) -> Any:
        """Decode an attribute stored as canonical JSON text."""
        raw = self.attributes.get(key)
        return default if raw is None else json.loads(raw)

    def to_dict(self) -> dict:
        return {
            'trace_id': self.trace_id, 'span_id': self.span_id, 'parent_span_id': self.parent_span_id,
            'name': self.name, 'kind': self.kind.value, 'start_time': self.start_time, 'end_time': self.end_time,
            'status': self.status.value, 'attributes': dict(self.attributes),
        }

    def sort_key(self) -> tuple:
        """Canonical file order: start_time, then span_id."""
        return (self.start_time, self.span_id)


def serialize_span(span: Span) -> str:
    """Serialize a span to its canonical single-line JSON form.

    Args:
        span (Span): The span to serialize.

    Returns:
        One JSON object with sorted keys and no insignificant whitespace.
    """
    return canonical_json(span.to_dict())

def parse_span(line: str, line_number: Optional[int] = None) -> Span:
    """Parse one serialized span line.

    Args:
        line (str): A single JSON object.
        line_number (Optional[int], optional): Line number to cite in errors.

    Returns:
        The parsed Span.

    Raises:
        MalformedSpan: Bad JSON, missing or unknown field, bad id, end before start.
    """
    try:
        obj = json.loads(line)
    except ValueError as e:
        raise MalformedSpan('json', f"not valid JSON ({e.msg})", line_number=line_number) from None
    if not isinstance(obj, dict):
        raise MalformedSpan('json', 'expected a JSON object', line_number=line_number)

    for f in _span_fields:
        if f not in obj and f != 'parent_span_id':
            raise MalformedSpan(f, 'missing', line_number=line_number)
    for k in obj:
        if k not in _span_fields:
            raise MalformedSpan(k, 'unknown field', line_number=line_number)

    try:
        return Span(
            trace_id=obj['trace_id'], span_id=obj['span_id'], parent_span_id=obj.get('parent_span_id'),
            name=obj['name'], kind=obj['kind'], start_time=obj['start_time'], end_time=obj['end_time'],
            status=obj['status'], attributes=obj['attributes'],
        )
    except MalformedSpan as e:
        raise (e.at_line(line_number) if line_number is not None else e) from None
