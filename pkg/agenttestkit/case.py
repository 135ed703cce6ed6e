from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Union, TYPE_CHECKING

from .exceptions import AgentUnconfigured, VariantLengthMismatch
from .expect import AssertionOutcome, Expect
from .llm_client import LlmClient
from .message import LlmResponse, StopReason
from .mock_llm import MockLlm, ScriptedResponse, ScriptedText, ScriptedToolUse
from .span import SpanAttributes, SpanKind
from .trace import Trace

if TYPE_CHECKING:
    from .agent import Agent

VERBOSE = False


class CaseStatus(str, Enum):
    PASSED = 'passed'
    FAILED = 'failed'
    ERRORED = 'errored'
    SKIPPED = 'skipped'


@dataclass
class CaseResult:
    """Outcome of running one Case.

    `traces` holds one trace per completed turn. When a turn errors, the
    run stops; `failed_turn` is its 1-based index and `error_trace` its
    partial trace.

    Attributes:
        case_name (str): Name of the case.
        conversation_id (str): Conversation id allocated for this run.
        traces (list[Trace]): Completed turn traces in order.
        assertions (list[AssertionOutcome]): Outcomes of the expectations evaluated on this result.
        error (Optional[str]): Error of the failing turn.
        failed_turn (Optional[int]): 1-based index of the failing turn.
        error_trace (Optional[Trace]): Partial trace of the failing turn.
        registered_tools (list[str]): Tools the agent offered during the run.
        language_tag (Optional[str]): Language of the case.
        skipped (bool): The case was not executed.
        suite (str): Name of the suite the case ran in.
    """
    case_name: str
    conversation_id: str = ''
    traces: list = field(default_factory=list)
    assertions: list = field(default_factory=list)
    error: Optional[str] = None
    failed_turn: Optional[int] = None
    error_trace: Optional[Trace] = None
    registered_tools: list = field(default_factory=list)
    language_tag: Optional[str] = None
    skipped: bool = False
    suite: str = ''

    def __str__(self):
        return f"CaseResult(case_name={self.case_name}, status={self.status.value}, traces={len(self.traces)}, assertions={len(self.assertions)})"

    @classmethod
    def skipped_case(cls, case_name: str, language_tag: Optional[str] = None, suite: str = '') -> CaseResult:
        return cls(case_name=case_name, language_tag=language_tag, skipped=True, suite=suite)

    @property
    def status(self) -> CaseStatus:
        if self.skipped:
            return CaseStatus.SKIPPED
        if self.error is not None:
            return CaseStatus.ERRORED
        if any(not a.passed for a in self.assertions):
            return CaseStatus.FAILED
        return CaseStatus.PASSED

    @property
    def passed_assertions(self) -> list[AssertionOutcome]:
        return [a for a in self.assertions if a.passed]

    @property
    def failed_assertions(self) -> list[AssertionOutcome]:
        return [a for a in self.assertions if not a.passed]

    @property
    def replies(self) -> list[str]:
        return [t.agent_reply for t in self.traces]

    def all_traces(self) -> list[Trace]:
        """Completed traces plus the partial trace of a failing turn."""
        return self.traces + ([self.error_trace] if self.error_trace is not None else [])

    def expect(self, raise_on_failure: bool = False) -> Expect:
        """Start an expectation chain whose outcomes are recorded on this result."""
        return Expect(self, raise_on_failure=raise_on_failure, recorder=self.assertions)

    def to_dict(self) -> dict:
        d = {
            'suite': self.suite,
            'name': self.case_name,
            'status': self.status.value,
            'assertions': [a.to_dict() for a in self.assertions],
        }
        if self.language_tag:
            d['language_tag'] = self.language_tag
        if self.failed_turn is not None:
            d['failed_turn'] = self.failed_turn
        if self.error is not None:
            d['error'] = self.error
        return d


class Case:
    """An ordered list of user inputs run turn by turn against an agent.

    Attributes:
        name (str): Case name.
        user_inputs (tuple[str, ...]): Non-empty list of inputs.
        language_tag (Optional[str]): BCP-47 style tag such as `en`, `de` or `zh`.
    """
    def __init__(self, user_inputs: Iterable[str], name: str = 'case', language_tag: Optional[str] = None):
        if isinstance(user_inputs, str):
            user_inputs = [user_inputs]
        self.user_inputs = tuple(user_inputs)
        if not self.user_inputs:
            raise ValueError(f"case '{name}' needs at least one user input")
        self.name = name
        self.language_tag = language_tag
        self.mock_script: Optional[tuple] = None
        self.real_client: Optional[LlmClient] = None

    def __str__(self):
        return f"Case(name={self.name}, inputs={len(self.user_inputs)}, language_tag={self.language_tag}, scripted={self.mock_script is not None})"

    def attach_mock_script(self, script: Iterable[ScriptedResponse], real_client: Optional[LlmClient] = None) -> None:
        """Use a fresh MockLlm built from `script` on every run.

        Args:
            script (Iterable[ScriptedResponse]): Queue items, one per LLM invocation.
            real_client (Optional[LlmClient], optional): Client serving Passthrough items, or a
                zero-argument factory returning one (for stateful clients such as replay).
        """
        self.mock_script = tuple(script)
        self.real_client = real_client

    def build_mock(self) -> Optional[MockLlm]:
        """Fresh MockLlm for one run; a real-client factory is called once per run."""
        if self.mock_script is None:
            return None
        client = self.real_client
        if client is not None and not hasattr(client, 'invoke') and callable(client):
            client = client()
        return MockLlm(real_client=client, script=self.mock_script)

    def run(self, agent: Agent) -> CaseResult:
        """Run every input against `agent` in a fresh conversation.

        Turn errors are captured in the result, not raised.

        Raises:
            AgentUnconfigured: The agent has no collector, or neither the agent nor the case supplies an LLM.
        """
        mock = self.build_mock()
        if mock is not None:
            agent.bind_llm(mock)
        if agent.llm is None or agent.collector is None:
            raise AgentUnconfigured(f"case '{self.name}' cannot run: agent '{agent.name}' has no LLM client or trace collector")

        memory = agent.start_conversation()
        result = CaseResult(
            case_name=self.name, conversation_id=memory.conversation_id,
            registered_tools=agent.registry.names(), language_tag=self.language_tag,
        )
        for turn_number, user_input in enumerate(self.user_inputs, start=1):
            try:
                reply = agent.converse(user_input)
            except AgentUnconfigured:
                raise
            except Exception as e:
                result.error = f"{type(e).__name__}: {e}"
                result.failed_turn = turn_number
                result.error_trace = getattr(e, 'trace', None)
                print(f"[case] {self.name}: turn {turn_number} errored: {e}") if VERBOSE else None
                break
            result.traces.append(reply.trace)
        return result

    def with_variants(self, variants: Mapping[str, Union[str, Iterable[str]]]) -> list[Case]:
        return with_variants(self, variants)

    @classmethod
    def from_traces(cls, name: str, traces: Iterable[Trace]) -> Case:
        """Rebuild a case, mock script included, from recorded traces of one conversation."""
        ordered = sorted(traces, key=lambda t: (t.start_time, t.trace_id))
        case = cls([t.user_input for t in ordered], name=name)
        case.attach_mock_script(mock_script_from_traces(ordered))
        return case


def with_variants(base: Case, variants: Mapping[str, Union[str, Iterable[str]]]) -> list[Case]:
    """Expand a case into language variants.

    Args:
        base (Case): The base case.
        variants (Mapping[str, Union[str, Iterable[str]]]): Language tag to inputs in that language.

    Returns:
        `[base]` followed by one case per tag, named `base[tag]` and sharing the base's mock script.

    Raises:
        VariantLengthMismatch: A variant's input count differs from the base.
    """
    cases = [base]
    for tag, inputs in variants.items():
        inputs = [inputs] if isinstance(inputs, str) else list(inputs)
        if len(inputs) != len(base.user_inputs):
            raise VariantLengthMismatch(
                f"variant '{tag}' of case '{base.name}' has {len(inputs)} inputs, base has {len(base.user_inputs)}"
            )
        variant = Case(inputs, name=f"{base.name}[{tag}]", language_tag=tag)
        if base.mock_script is not None:
            variant.attach_mock_script(base.mock_script, base.real_client)
        cases.append(variant)
    return cases


def mock_script_from_traces(traces: Iterable[Trace]) -> list[ScriptedResponse]:
    """Turn the recorded LLM responses of `traces` into a mock script.

    Args:
        traces (Iterable[Trace]): Traces in turn order.

    Returns:
        One ScriptedText or ScriptedToolUse per recorded llm_invocation span.

    Raises:
        ValueError: An llm_invocation span lacks the recorded response.
    """
    script: list[ScriptedResponse] = []
    for trace in traces:
        for span in trace.spans_of_kind(SpanKind.LLM_INVOCATION):
            raw = span.json_attr(SpanAttributes.LLM_RESPONSE)
            if raw is None:
                raise ValueError(f"span {span.span_id} has no '{SpanAttributes.LLM_RESPONSE}' attribute")
            response = LlmResponse.from_dict(raw)
            if response.stop_reason is StopReason.TOOL_USE:
                script.append(ScriptedToolUse([{'name': u.name, 'input': u.input} for u in response.tool_uses]))
            else:
                script.append(ScriptedText([b.text for b in response.content]))
    return script
