from __future__ import annotations

import json
import threading

from typing import Iterable

from .exceptions import ConfigError, IoFailure
from .message import Message


class ConversationMemory:
    """Append-only message history of one conversation.

    Attributes:
        conversation_id (str): Conversation the history belongs to.
    """
    def __init__(self, conversation_id: str, messages: Iterable[Message] = ()):
        self.conversation_id = conversation_id
        self._messages: list[Message] = list(messages)
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._messages)

    def __str__(self):
        return f"ConversationMemory(conversation_id={self.conversation_id}, messages={len(self._messages)})"

    @property
    def messages(self) -> tuple:
        return tuple(self._messages)

    def append(self, message: Message) -> None:
        with self._lock:
            self._messages.append(message)

    def extend(self, messages: Iterable[Message]) -> None:
        with self._lock:
            self._messages.extend(messages)

    def to_dict(self) -> dict:
        return {'conversation_id': self.conversation_id, 'messages': [m.to_dict() for m in self._messages]}

    def export_json(self, path: str, debug: bool = False) -> None:
        """Write the history to a JSON file so a restarted agent can continue the conversation."""
        if debug:
            print(f"--> Exporting {len(self._messages)} messages of {self.conversation_id} to {path}")
        try:
            with open(path, 'w', encoding='utf-8') as fh:
                json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)
        except OSError as e:
            raise IoFailure(f"cannot write memory to {path}: {e}") from e

    @classmethod
    def import_json(cls, path: str) -> ConversationMemory:
        """Load a history written by `export_json`.

        Raises:
            IoFailure: The file cannot be read.
            ConfigError: The file is not a memory export.
        """
        try:
            with open(path, encoding='utf-8') as fh:
                d = json.load(fh)
        except OSError as e:
            raise IoFailure(f"cannot read memory from {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON: {e.msg}", path=path, line_number=e.lineno) from None
        try:
            return cls(d['conversation_id'], [Message.from_dict(m) for m in d['messages']])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"not a conversation memory export ({e})", path=path) from None
