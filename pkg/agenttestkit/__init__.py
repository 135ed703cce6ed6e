from __future__ import annotations

from .ids import IdGenerator, seed_ids, new_trace_id, new_span_id, new_conversation_id
from .span import Span, SpanKind, SpanStatus, SpanAttributes, serialize_span, parse_span
from .trace import Trace
from .collector import TraceCollector, TraceSnapshot, TurnHandle, traces_for_conversation
from .message import Message, Role, TextBlock, ToolUseBlock, ToolResultBlock, LlmRequest, LlmResponse, StopReason
from .mock_llm import MockLlm, ScriptedText, ScriptedToolUse, Passthrough
from .llm_client import LlmClient, HttpLlmClient, RecordReplayClient, record_replay_client, request_digest
from .tool import ToolSpec, ToolRegistry, execute_tool, tool
from .memory import ConversationMemory
from .agent import Agent, AgentConfig, AgentReply
from .matching import deep_subset_match, first_mismatch, Mismatch
from .expect import Expect, AssertionOutcome, InvocationView
from .case import Case, CaseResult, CaseStatus, with_variants, mock_script_from_traces
from .suite import Layer, Suite, CaseCheck, ComponentCheck, discover
from .pyramid import RunReport, SuiteReport, ToolCoverage, run_pyramid, tool_coverage
from .report import emit_report

from .utils_jsonl import export_jsonl, import_jsonl, read_spans, write_spans
from .utils_case_file import load_case_file, apply_assertions

from .exceptions import (
    AgentTestkitError, MalformedSpan, MalformedTrace, CollectorClosed, TurnEnded, TraceMismatch, IoFailure,
    MockExhausted, NoRealClient, ReplayExhausted, ReplayMismatch, LlmFailure, DuplicateToolName, ToolNotFound,
    SchemaViolation, HandlerError, LoopGuardTripped, AgentUnconfigured, VariantLengthMismatch, ConfigError,
    ExpectationFailed,
)

__all__ = [
    # trace model & store
    'IdGenerator',
    'seed_ids',
    'new_trace_id',
    'new_span_id',
    'new_conversation_id',
    'Span',
    'SpanKind',
    'SpanStatus',
    'SpanAttributes',
    'serialize_span',
    'parse_span',
    'Trace',
    'TraceCollector',
    'TraceSnapshot',
    'TurnHandle',
    'traces_for_conversation',

    # llm interface
    'Message',
    'Role',
    'TextBlock',
    'ToolUseBlock',
    'ToolResultBlock',
    'LlmRequest',
    'LlmResponse',
    'StopReason',
    'MockLlm',
    'ScriptedText',
    'ScriptedToolUse',
    'Passthrough',
    'LlmClient',
    'HttpLlmClient',
    'RecordReplayClient',
    'record_replay_client',
    'request_digest',

    # agent core
    'ToolSpec',
    'ToolRegistry',
    'execute_tool',
    'tool',
    'ConversationMemory',
    'Agent',
    'AgentConfig',
    'AgentReply',

    # expectations
    'deep_subset_match',
    'first_mismatch',
    'Mismatch',
    'Expect',
    'AssertionOutcome',
    'InvocationView',

    # cases & pyramid
    'Case',
    'CaseResult',
    'CaseStatus',
    'with_variants',
    'mock_script_from_traces',
    'Layer',
    'Suite',
    'CaseCheck',
    'ComponentCheck',
    'discover',
    'RunReport',
    'SuiteReport',
    'ToolCoverage',
    'run_pyramid',
    'tool_coverage',
    'emit_report',

    # file utils
    'export_jsonl',
    'import_jsonl',
    'read_spans',
    'write_spans',
    'load_case_file',
    'apply_assertions',

    # errors
    'AgentTestkitError',
    'MalformedSpan',
    'MalformedTrace',
    'CollectorClosed',
    'TurnEnded',
    'TraceMismatch',
    'IoFailure',
    'MockExhausted',
    'NoRealClient',
    'ReplayExhausted',
    'ReplayMismatch',
    'LlmFailure',
    'DuplicateToolName',
    'ToolNotFound',
    'SchemaViolation',
    'HandlerError',
    'LoopGuardTripped',
    'AgentUnconfigured',
    'VariantLengthMismatch',
    'ConfigError',
    'ExpectationFailed',
]
