from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .exceptions import MalformedTrace
from .span import Span, SpanAttributes, SpanKind, SpanStatus


@dataclass(frozen=True)
class Trace:
    """The complete record of one agent turn.

    Spans are kept in canonical order (start_time, then span_id). Construction
    checks that the spans share one trace id and one conversation id, that
    exactly one root agent_turn span exists, and that every parent link
    resolves within the trace.

    Attributes:
        trace_id (str): Trace identifier shared by all spans.
        spans (tuple[Span, ...]): Spans ordered by start_time.
    """
    trace_id: str
    spans: tuple

    def __init__(self, trace_id: str, spans: Iterable[Span]):
        object.__setattr__(self, 'trace_id', trace_id)
        object.__setattr__(self, 'spans', tuple(sorted(spans, key=lambda s: s.sort_key())))
        self._validate()

    def _validate(self):
        if not self.spans:
            raise MalformedTrace(f"trace {self.trace_id} has no spans")

        roots = [s for s in self.spans if s.is_root]
        if len(roots) != 1:
            raise MalformedTrace(f"trace {self.trace_id} has {len(roots)} root spans, expected exactly 1")
        root = roots[0]
        if root.kind is not SpanKind.AGENT_TURN:
            raise MalformedTrace(f"trace {self.trace_id}: root span {root.span_id} has kind {root.kind.value}, expected agent_turn")
        for key in (SpanAttributes.TURN_USER_INPUT, SpanAttributes.TURN_AGENT_REPLY):
            if key not in root.attributes:
                raise MalformedTrace(f"trace {self.trace_id}: root span is missing attribute '{key}'")

        span_ids = set()
        for s in self.spans:
            if s.trace_id != self.trace_id:
                raise MalformedTrace(f"span {s.span_id} has trace_id {s.trace_id}, expected {self.trace_id}")
            if s.conversation_id != root.conversation_id:
                raise MalformedTrace(f"span {s.span_id} belongs to conversation {s.conversation_id}, root belongs to {root.conversation_id}")
            span_ids.add(s.span_id)
        for s in self.spans:
            if s.parent_span_id is not None and s.parent_span_id not in span_ids:
                raise MalformedTrace(f"span {s.span_id} refers to parent {s.parent_span_id} outside trace {self.trace_id}")

    def __str__(self):
        return f"Trace(trace_id={self.trace_id}, conversation_id={self.conversation_id}, spans={len(self.spans)}, status={self.status.value})"

    @property
    def root(self) -> Span:
        return next(s for s in self.spans if s.is_root)

    @property
    def conversation_id(self) -> str:
        return self.root.conversation_id

    @property
    def user_input(self) -> str:
        return self.root.attributes[SpanAttributes.TURN_USER_INPUT]

    @property
    def agent_reply(self) -> str:
        return self.root.attributes[SpanAttributes.TURN_AGENT_REPLY]

    @property
    def status(self) -> SpanStatus:
        return self.root.status

    @property
    def start_time(self) -> int:
        return self.root.start_time

    def spans_of_kind(self, kind: SpanKind) -> list[Span]:
        """Return the spans of `kind` in chronological order."""
        kind = SpanKind(kind)
        return [s for s in self.spans if s.kind is kind]

    def span(self, span_id: str) -> Optional[Span]:
        return next((s for s in self.spans if s.span_id == span_id), None)

    def children(self, span_id: str) -> list[Span]:
        return [s for s in self.spans if s.parent_span_id == span_id]
