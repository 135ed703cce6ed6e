from __future__ import annotations

import os
import threading
import time

from collections import defaultdict
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Union

from .exceptions import CollectorClosed, TraceMismatch, TurnEnded
from .ids import ConversationId, IdGenerator, default_generator
from .span import AttributeValue, Span, SpanAttributes, SpanKind, SpanStatus
from .trace import Trace
from .utils_jsonl import append_turn

VERBOSE = False

TRACE_DIR_ENV = 'TESTKIT_TRACE_DIR'


@dataclass(frozen=True)
class TraceSnapshot:
    """Immutable view of collected traces.

    Attributes:
        traces (tuple[Trace, ...]): Traces ordered by root start_time.
        conversation_index (Mapping[str, tuple[str, ...]]): Conversation id to trace ids in turn order.
    """
    traces: tuple
    conversation_index: Mapping

    def __init__(self, traces: Iterable[Trace] = ()):
        ordered = tuple(sorted(traces, key=lambda t: (t.start_time, t.trace_id)))
        index = defaultdict(list)
        for t in ordered:
            index[t.conversation_id].append(t.trace_id)
        object.__setattr__(self, 'traces', ordered)
        object.__setattr__(self, 'conversation_index', MappingProxyType({k: tuple(v) for k, v in index.items()}))

    @classmethod
    def from_spans(cls, spans: Iterable[Span]) -> TraceSnapshot:
        """Group spans by trace id into traces."""
        grouped = defaultdict(list)
        for s in spans:
            grouped[s.trace_id].append(s)
        return cls(Trace(trace_id, group) for trace_id, group in grouped.items())

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)

    def __str__(self):
        return f"TraceSnapshot(traces={len(self.traces)}, conversations={len(self.conversation_index)})"

    def traces_for_conversation(self, conversation_id: str) -> list[Trace]:
        """Return the traces of one conversation in turn order; empty for unknown ids."""
        return [t for t in self.traces if t.conversation_id == conversation_id]

    def trace(self, trace_id: str) -> Optional[Trace]:
        return next((t for t in self.traces if t.trace_id == trace_id), None)

    def all_spans(self) -> list[Span]:
        return [s for t in self.traces for s in t.spans]


class TurnHandle:
    """Open turn returned by `TraceCollector.begin_turn`.

    Spans emitted through the handle become direct children of the turn's root
    span. Emission is thread-safe so tools running in parallel can record
    their spans concurrently.
    """
    def __init__(self, collector: TraceCollector, conversation_id: str, user_input: str, trace_id: str,
                 root_span_id: str, turn_index: int, start_time: int, sequence: int):
        self.collector = collector
        self.conversation_id = conversation_id
        self.user_input = user_input
        self.trace_id = trace_id
        self.root_span_id = root_span_id
        self.turn_index = turn_index
        self.start_time = start_time
        self.sequence = sequence
        self.trace: Optional[Trace] = None
        self._spans: list[Span] = []
        self._lock = threading.Lock()

    def __str__(self):
        return f"TurnHandle(conversation_id={self.conversation_id}, trace_id={self.trace_id}, turn_index={self.turn_index}, ended={self.ended})"

    @property
    def ended(self) -> bool:
        return self.trace is not None

    def now(self) -> int:
        return self.collector.now()

    def new_span_id(self) -> str:
        return self.collector.ids.new_span_id()

    def emit(self, span: Span) -> None:
        self.collector.emit(self, span)

    def record(self, name: str, kind: SpanKind, start_time: int, end_time: int,
               attributes: Optional[Mapping[str, AttributeValue]] = None, status: SpanStatus = SpanStatus.OK) -> Span:
        """Build a child span of this turn's root and emit it.

        Args:
            name (str): Span name.
            kind (SpanKind): Span kind.
            start_time (int): Start in nanoseconds (use `now()`).
            end_time (int): End in nanoseconds.
            attributes (Optional[Mapping], optional): Attributes; the conversation id is added.
            status (SpanStatus, optional): Span status.

        Returns:
            The emitted Span.
        """
        attrs = dict(attributes or {})
        attrs[SpanAttributes.CONVERSATION_ID] = self.conversation_id
        span = Span(
            trace_id=self.trace_id, span_id=self.new_span_id(), parent_span_id=self.root_span_id,
            name=name, kind=kind, start_time=start_time, end_time=end_time, status=status, attributes=attrs,
        )
        self.emit(span)
        return span

    def spans(self) -> list[Span]:
        with self._lock:
            return list(self._spans)

    def count(self, kind: SpanKind) -> int:
        with self._lock:
            return sum(1 for s in self._spans if s.kind is kind)

    def latest(self, kind: SpanKind) -> Optional[Span]:
        """Return the most recently started child span of `kind`."""
        with self._lock:
            matching = [s for s in self._spans if s.kind is kind]
        return max(matching, key=lambda s: s.sort_key()) if matching else None

    def _root(self, end_time: int, agent_reply: str, status: SpanStatus, error: Optional[str], open_turn: bool) -> Span:
        attrs = {
            SpanAttributes.CONVERSATION_ID: self.conversation_id,
            SpanAttributes.TURN_USER_INPUT: self.user_input,
            SpanAttributes.TURN_AGENT_REPLY: agent_reply,
            SpanAttributes.TURN_INDEX: self.turn_index,
        }
        if error:
            attrs[SpanAttributes.TURN_ERROR] = error
        if open_turn:
            attrs[SpanAttributes.TURN_OPEN] = True
        return Span(
            trace_id=self.trace_id, span_id=self.root_span_id, parent_span_id=None, name='agent_turn',
            kind=SpanKind.AGENT_TURN, start_time=self.start_time, end_time=end_time, status=status, attributes=attrs,
        )

    def provisional_trace(self) -> Trace:
        """Trace of a still-open turn; its root is marked with `ai.turn.open`."""
        children = self.spans()
        end_time = max([self.start_time] + [s.end_time for s in children])
        return Trace(self.trace_id, [self._root(end_time, '', SpanStatus.OK, None, open_turn=True)] + children)


class TraceCollector:
    """Collects spans during agent execution and groups them into traces.

    When a trace directory is configured (argument or `TESTKIT_TRACE_DIR`),
    every completed turn is appended to `<dir>/<conversation_id>.spans.jsonl`.

    Attributes:
        trace_dir (Optional[str]): Directory completed turns are persisted to.
        ids (IdGenerator): Identifier source.
        closed (bool): Whether the collector accepts new turns.
    """
    def __init__(self, trace_dir: Optional[str] = None, ids: Optional[IdGenerator] = None, debug: bool = False):
        self.trace_dir = trace_dir or os.environ.get(TRACE_DIR_ENV) or None
        self.ids = ids or default_generator()
        self.debug = debug
        self.closed = False
        self._turns: list[TurnHandle] = []
        self._turn_counts: dict[str, int] = defaultdict(int)
        self._lock = threading.Lock()
        self._clock_lock = threading.Lock()
        self._last_ns = 0

    def __str__(self):
        return f"TraceCollector(turns={len(self._turns)}, trace_dir={self.trace_dir}, closed={self.closed})"

    def now(self) -> int:
        """Wall-clock nanoseconds, strictly increasing across calls on this collector."""
        with self._clock_lock:
            t = max(time.time_ns(), self._last_ns + 1)
            self._last_ns = t
            return t

    def begin_turn(self, conversation_id: ConversationId, user_input: str) -> TurnHandle:
        """Open a new trace for one user input.

        Args:
            conversation_id (ConversationId): Conversation the turn belongs to.
            user_input (str): The user's input for this turn.

        Returns:
            A TurnHandle for emitting spans and ending the turn.

        Raises:
            CollectorClosed: The collector has been closed.
        """
        if not conversation_id:
            raise ValueError('conversation_id must be a non-empty string')
        with self._lock:
            if self.closed:
                raise CollectorClosed('cannot begin a turn on a closed collector')
            turn_index = self._turn_counts[conversation_id]
            self._turn_counts[conversation_id] += 1
            handle = TurnHandle(
                self, conversation_id, user_input, trace_id=self.ids.new_trace_id(), root_span_id=self.ids.new_span_id(),
                turn_index=turn_index, start_time=self.now(), sequence=len(self._turns),
            )
            self._turns.append(handle)
        print(f"[trace] begin turn {turn_index} of {conversation_id} (trace {handle.trace_id})") if VERBOSE else None
        return handle

    def emit(self, handle: TurnHandle, span: Span) -> None:
        """Record a span in an open turn.

        Raises:
            TurnEnded: The turn has already ended.
            TraceMismatch: The span belongs to another trace, conversation or parent.
        """
        if span.trace_id != handle.trace_id:
            raise TraceMismatch(f"span {span.span_id} has trace_id {span.trace_id}, turn has {handle.trace_id}")
        if span.conversation_id != handle.conversation_id:
            raise TraceMismatch(f"span {span.span_id} belongs to conversation {span.conversation_id}, turn belongs to {handle.conversation_id}")
        if span.parent_span_id != handle.root_span_id:
            raise TraceMismatch(f"span {span.span_id} has parent {span.parent_span_id}, spans of a turn must be children of root {handle.root_span_id}")
        with handle._lock:
            if handle.trace is not None:
                raise TurnEnded(f"turn {handle.trace_id} has already ended")
            handle._spans.append(span)

    def end_turn(self, handle: TurnHandle, agent_reply: str, status: SpanStatus = SpanStatus.OK, error: Optional[str] = None) -> Trace:
        """Close the turn's root span and return the completed trace.

        Args:
            handle (TurnHandle): The open turn.
            agent_reply (str): The agent's reply text.
            status (SpanStatus, optional): Root status; `error` for failed turns.
            error (Optional[str], optional): Error description stored on the root.

        Returns:
            The completed Trace.

        Raises:
            TurnEnded: The turn was already ended.
        """
        with handle._lock:
            if handle.trace is not None:
                raise TurnEnded(f"turn {handle.trace_id} has already ended")
            children = list(handle._spans)
            end_time = max([self.now()] + [s.end_time for s in children])
            root = handle._root(end_time, agent_reply, SpanStatus(status), error, open_turn=False)
            handle.trace = Trace(handle.trace_id, [root] + children)

        print(f"[trace] end turn {handle.turn_index} of {handle.conversation_id}: {len(children)} child spans, status {root.status.value}") if VERBOSE else None
        if self.trace_dir:
            append_turn(self.trace_dir, handle.conversation_id, handle.trace.spans, debug=self.debug)
        return handle.trace

    def close(self) -> None:
        with self._lock:
            self.closed = True

    def snapshot(self) -> TraceSnapshot:
        """Return an immutable snapshot; open turns appear with a provisional root."""
        with self._lock:
            turns = list(self._turns)
        return TraceSnapshot(h.trace if h.trace is not None else h.provisional_trace() for h in turns)

    def traces_for_conversation(self, conversation_id: str) -> list[Trace]:
        return self.snapshot().traces_for_conversation(conversation_id)


def traces_for_conversation(store: Union[TraceCollector, TraceSnapshot], conversation_id: str) -> list[Trace]:
    """Return the traces of a conversation in turn order.

    Args:
        store (Union[TraceCollector, TraceSnapshot]): Collector or snapshot to query.
        conversation_id (str): Conversation to look up.

    Returns:
        List of Trace objects, empty for unknown ids.
    """
    return store.traces_for_conversation(conversation_id)
