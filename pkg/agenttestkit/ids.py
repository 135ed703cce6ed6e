from __future__ import annotations

import re
import random
import secrets
import threading
import uuid

from typing import NewType, Optional

TraceId = NewType('TraceId', str)
SpanId = NewType('SpanId', str)
ConversationId = NewType('ConversationId', str)

_TRACE_ID_RE = re.compile(r'^[0-9a-f]{32}$')
_SPAN_ID_RE = re.compile(r'^[0-9a-f]{16}$')

def is_valid_trace_id(value: object) -> bool:
    """Return `True` if `value` is 32 lowercase hex characters and not all zeros."""
    return isinstance(value, str) and bool(_TRACE_ID_RE.match(value)) and value.strip('0') != ''

def is_valid_span_id(value: object) -> bool:
    """Return `True` if `value` is 16 lowercase hex characters and not all zeros."""
    return isinstance(value, str) and bool(_SPAN_ID_RE.match(value)) and value.strip('0') != ''


class IdGenerator:
    """Source of trace, span and conversation identifiers.

    In random mode (no seed) identifiers come from `secrets`. With a seed, the
    generator produces a reproducible sequence, which keeps golden traces stable
    in tests.

    Attributes:
        seed (Optional[int]): Seed for deterministic mode, `None` for random mode.
    """
    def __init__(self, seed: Optional[int] = None):
        self.seed = seed
        self._rng = random.Random(seed) if seed is not None else None
        self._lock = threading.Lock()

    def _bits(self, n: int) -> int:
        # zero ids are invalid; draw again on the (vanishingly rare) zero
        while True:
            if self._rng is None:
                value = secrets.randbits(n)
            else:
                with self._lock:
                    value = self._rng.getrandbits(n)
            if value:
                return value

    def new_trace_id(self) -> TraceId:
        return TraceId(f"{self._bits(128):032x}")

    def new_span_id(self) -> SpanId:
        return SpanId(f"{self._bits(64):016x}")

    def new_conversation_id(self) -> ConversationId:
        """Return a 36-character UUID4-formatted conversation identifier."""
        if self._rng is None:
            return ConversationId(str(uuid.uuid4()))
        return ConversationId(str(uuid.UUID(int=self._bits(128), version=4)))


_default_generator = IdGenerator()

def seed_ids(seed: Optional[int]) -> IdGenerator:
    """Reset the module-level generator, deterministic when `seed` is given.

    Args:
        seed (Optional[int]): Seed for deterministic mode, or `None` to return to random mode.

    Returns:
        The new module-level IdGenerator.
    """
    global _default_generator
    _default_generator = IdGenerator(seed)
    return _default_generator

def default_generator() -> IdGenerator:
    return _default_generator

def new_trace_id() -> TraceId:
    """Return a fresh 128-bit trace id from the module-level generator."""
    return _default_generator.new_trace_id()

def new_span_id() -> SpanId:
    """Return a fresh 64-bit span id from the module-level generator."""
    return _default_generator.new_span_id()

def new_conversation_id() -> ConversationId:
    """Return a fresh conversation id from the module-level generator."""
    return _default_generator.new_conversation_id()
