from __future__ import annotations

import hashlib
import json
import os
import threading

from typing import Optional, Protocol, TYPE_CHECKING, runtime_checkable

from .exceptions import AgentTestkitError, IoFailure, LlmFailure, ReplayExhausted, ReplayMismatch
from .message import LlmRequest, LlmResponse, TextBlock, ToolUseBlock
from .span import SpanAttributes, SpanKind, canonical_json

if TYPE_CHECKING:
    from .collector import TurnHandle

VERBOSE = False

REPLAY_MODE_ENV = 'TESTKIT_REPLAY_MODE'
LLM_SPAN_NAME = 'invoke_llm'


@runtime_checkable
class LlmClient(Protocol):
    """Interface shared by the mock and every real client.

    When `turn` is given the client records one llm_invocation span in it.
    """
    def invoke(self, request: LlmRequest, turn: Optional[TurnHandle] = None) -> LlmResponse:
        ...


def record_llm_span(turn: TurnHandle, response: LlmResponse, start_time: int, mocked: bool) -> None:
    """Emit the llm_invocation span for one completed invocation.

    Args:
        turn (TurnHandle): Open turn to record into.
        response (LlmResponse): The response returned to the agent.
        start_time (int): Nanosecond timestamp taken before the invocation.
        mocked (bool): Whether a scripted item produced the response.
    """
    turn.record(
        LLM_SPAN_NAME, SpanKind.LLM_INVOCATION, start_time, turn.now(),
        attributes={
            SpanAttributes.LLM_STOP_REASON: response.stop_reason.value,
            SpanAttributes.LLM_MOCKED: mocked,
            SpanAttributes.LLM_RESPONSE: response.to_json(),
            SpanAttributes.LLM_ITERATION: turn.count(SpanKind.LLM_INVOCATION) + 1,
        },
    )

def request_digest(request: LlmRequest) -> str:
    """Hash of the request's semantic content.

    Covers role, text, tool names and tool inputs of every message; ids and
    timestamps are excluded so the digest is stable across runs.

    Args:
        request (LlmRequest): The request to digest.

    Returns:
        Hex SHA-256 digest.
    """
    summary = []
    for m in request.messages:
        texts = [b.text for b in m.content if isinstance(b, TextBlock)]
        tools = [[b.name, b.input] for b in m.content if isinstance(b, ToolUseBlock)]
        summary.append([m.role.value, texts, tools])
    return hashlib.sha256(canonical_json(summary).encode('utf-8')).hexdigest()


class HttpLlmClient:
    """Real client posting Converse-style JSON to an HTTPS endpoint.

    Attributes:
        endpoint (str): Endpoint URL.
        model (Optional[str]): Model identifier forwarded in the payload.
        timeout (float): Per-request timeout in seconds.
    """
    def __init__(self, endpoint: str, api_key: Optional[str] = None, model: Optional[str] = None, timeout: float = 60):
        from tkutils.converse_api import new_session

        if not endpoint:
            raise ValueError('HttpLlmClient requires an endpoint')
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.session = new_session(api_key)

    def __str__(self):
        return f"HttpLlmClient(endpoint={self.endpoint}, model={self.model})"

    @classmethod
    def from_settings(cls, settings) -> HttpLlmClient:
        return cls(settings.llm_endpoint, settings.llm_api_key, settings.llm_model, settings.llm_timeout)

    def invoke(self, request: LlmRequest, turn: Optional[TurnHandle] = None) -> LlmResponse:
        import requests
        from tkutils.converse_api import post_converse

        start_time = turn.now() if turn is not None else 0
        payload = request.to_dict()
        if self.model:
            payload['model'] = self.model
        try:
            body = post_converse(self.session, self.endpoint, payload, timeout=self.timeout)
            response = LlmResponse.from_dict(body)
        except (requests.RequestException, ValueError, KeyError, TypeError) as e:
            raise LlmFailure(f"LLM endpoint {self.endpoint} failed: {e}") from e
        if turn is not None:
            record_llm_span(turn, response, start_time, mocked=False)
        return response


class RecordReplayClient:
    """Adapter that records real responses once and replays them later.

    In record mode every request is forwarded to `inner` and the pair
    (request digest, response) is appended to the recording. In replay mode
    requests are matched by position; a recorded entry whose digest is `null`
    matches any request.

    Attributes:
        recording_path (str): JSON Lines recording file.
        mode (str): `record` or `replay`.
        position (int): Number of requests served so far.
    """
    def __init__(self, recording_path: str, mode: str = 'replay', inner: Optional[LlmClient] = None):
        if mode not in ('record', 'replay'):
            raise ValueError(f"unknown record/replay mode {mode!r}")
        if mode == 'record' and inner is None:
            raise ValueError('record mode requires an inner client')
        self.recording_path = recording_path
        self.mode = mode
        self.inner = inner
        self.position = 0
        self._lock = threading.Lock()
        self._entries = self._load() if mode == 'replay' else []

    def __str__(self):
        return f"RecordReplayClient(path={self.recording_path}, mode={self.mode}, position={self.position})"

    def _load(self) -> list[dict]:
        entries = []
        try:
            with open(self.recording_path, encoding='utf-8') as fh:
                for line_number, line in enumerate(fh, start=1):
                    if not line.strip():
                        continue
                    try:
                        entries.append(json.loads(line))
                    except ValueError as e:
                        raise IoFailure(f"{self.recording_path}:{line_number}: invalid recording entry ({e})") from None
        except OSError as e:
            raise IoFailure(f"cannot read recording {self.recording_path}: {e}") from e
        print(f"[replay] loaded {len(entries)} entries from {self.recording_path}") if VERBOSE else None
        return entries

    def invoke(self, request: LlmRequest, turn: Optional[TurnHandle] = None) -> LlmResponse:
        start_time = turn.now() if turn is not None else 0
        digest = request_digest(request)
        with self._lock:
            position = self.position
            self.position += 1
            if self.mode == 'replay':
                response = self._replay(position, digest)
            else:
                response = self._record(request, digest)
        if turn is not None:
            record_llm_span(turn, response, start_time, mocked=False)
        return response

    def _replay(self, position: int, digest: str) -> LlmResponse:
        if position >= len(self._entries):
            raise ReplayExhausted(f"recording {self.recording_path} holds {len(self._entries)} responses; request {position + 1} has none")
        entry = self._entries[position]
        recorded = entry.get('digest')
        if recorded is not None and recorded != digest:
            raise ReplayMismatch(position + 1, recorded, digest)
        return LlmResponse.from_dict(entry['response'])

    def _record(self, request: LlmRequest, digest: str) -> LlmResponse:
        try:
            response = self.inner.invoke(request)
        except AgentTestkitError:
            raise
        except Exception as e:
            raise LlmFailure(f"inner client failed while recording: {e}") from e
        line = canonical_json({'digest': digest, 'response': response.to_dict()})
        try:
            parent = os.path.dirname(self.recording_path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(self.recording_path, 'a', encoding='utf-8', newline='\n') as fh:
                fh.write(line + '\n')
        except OSError as e:
            raise IoFailure(f"cannot append to recording {self.recording_path}: {e}") from e
        return response


def record_replay_client(recording_path: str, inner: Optional[LlmClient] = None, mode: Optional[str] = None) -> RecordReplayClient:
    """Build a record/replay client.

    Args:
        recording_path (str): JSON Lines recording file.
        inner (Optional[LlmClient], optional): Live client used in record mode.
        mode (Optional[str], optional): `record` or `replay`; defaults to `TESTKIT_REPLAY_MODE`, then `replay`.

    Returns:
        A RecordReplayClient.
    """
    mode = mode or os.environ.get(REPLAY_MODE_ENV) or 'replay'
    return RecordReplayClient(recording_path, mode=mode, inner=inner)


def start_record(recording_path: str) -> None:
    """Truncate a recording before a fresh record session."""
    try:
        parent = os.path.dirname(recording_path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        open(recording_path, 'w', encoding='utf-8').close()
    except OSError as e:
        raise IoFailure(f"cannot reset recording {recording_path}: {e}") from e
