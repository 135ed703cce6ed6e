from __future__ import annotations

import json

from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Union

from .collector import TraceSnapshot
from .exceptions import ExpectationFailed
from .matching import first_mismatch, mismatch_count
from .span import Span, SpanAttributes, SpanKind
from .trace import Trace

# ---------------------------------------------------------------------------- #
# Fluent assertions over traces                                                #
# ---------------------------------------------------------------------------- #

@dataclass(frozen=True)
class AssertionOutcome:
    """Verdict of one expectation.

    Attributes:
        passed (bool): Whether the expectation holds.
        expectation_text (str): Human readable restatement, e.g. `tool_invocations.to_include('x')`.
        detail (str): Diagnostic detail; never empty for a failure.
    """
    passed: bool
    expectation_text: str
    detail: str = ''

    def __post_init__(self):
        if not self.passed and not self.detail:
            raise ValueError('a failing outcome needs a detail')

    def __bool__(self):
        return self.passed

    def __str__(self):
        verdict = 'PASS' if self.passed else 'FAIL'
        return f"[{verdict}] {self.expectation_text}" + (f": {self.detail}" if self.detail else '')

    def to_dict(self) -> dict:
        return {'expectation_text': self.expectation_text, 'passed': self.passed, 'detail': self.detail}


def _show(value: Any) -> str:
    try:
        return json.dumps(value, ensure_ascii=False, sort_keys=True)
    except (TypeError, ValueError):
        return repr(value)


@dataclass(frozen=True)
class InvocationView:
    """Tool invocation as seen by assertions, derived from one tool_invocation span."""
    tool_name: str
    input: Any
    output: Any
    span_ref: str
    timestamp: int
    trace_id: str
    is_error: bool = False
    group: str = ''
    parallel: bool = False

    @classmethod
    def from_span(cls, span: Span) -> InvocationView:
        return cls(
            tool_name=span.attributes[SpanAttributes.TOOL_NAME],
            input=span.json_attr(SpanAttributes.TOOL_INPUT),
            output=span.json_attr(SpanAttributes.TOOL_OUTPUT),
            span_ref=span.span_id,
            timestamp=span.start_time,
            trace_id=span.trace_id,
            is_error=bool(span.attr(SpanAttributes.TOOL_IS_ERROR, False)),
            group=span.attr(SpanAttributes.TOOL_GROUP, ''),
            parallel=bool(span.attr(SpanAttributes.TOOL_PARALLEL, False)),
        )


class Expect:
    """Entry point of the assertion DSL.

    Example:
        `Expect(traces).tool_invocations.to_include('update_customer_information').with_input({'ucid': '1'})`

    Args:
        traces: A TraceSnapshot, a CaseResult, a list of Trace or a single Trace.
        raise_on_failure (bool, optional): Raise ExpectationFailed as soon as an expectation fails.
        recorder (Optional[list], optional): List every outcome is appended to.
    """
    def __init__(self, traces: Union[TraceSnapshot, Trace, Iterable[Trace], Any], raise_on_failure: bool = False,
                 recorder: Optional[list] = None):
        if isinstance(traces, Trace):
            collected = [traces]
        elif isinstance(traces, TraceSnapshot):
            collected = list(traces.traces)
        elif hasattr(traces, 'all_traces'):
            collected = list(traces.all_traces())
        else:
            collected = list(traces)
        self.traces: tuple = tuple(sorted(collected, key=lambda t: (t.start_time, t.trace_id)))
        self.raise_on_failure = raise_on_failure
        self.recorder = recorder
        self.outcomes: list[AssertionOutcome] = []

    def __str__(self):
        return f"Expect(traces={len(self.traces)}, outcomes={len(self.outcomes)})"

    def _outcome(self, passed: bool, text: str, detail: str = '') -> AssertionOutcome:
        outcome = AssertionOutcome(passed, text, detail)
        self.outcomes.append(outcome)
        if self.recorder is not None:
            self.recorder.append(outcome)
        if self.raise_on_failure and not passed:
            raise ExpectationFailed(outcome)
        return outcome

    def that(self, condition: bool, expectation_text: str, detail: str = '') -> AssertionOutcome:
        """Record a custom check in this scope.

        Args:
            condition (bool): Verdict.
            expectation_text (str): What was expected.
            detail (str, optional): Diagnostic used when the check fails.
        """
        if condition:
            return self._outcome(True, expectation_text)
        return self._outcome(False, expectation_text, detail or 'condition is false')

    def spans(self, kind: Union[SpanKind, str]) -> list[Span]:
        """All spans of `kind` across the traces, chronological."""
        kind = SpanKind(kind)
        return sorted((s for t in self.traces for s in t.spans_of_kind(kind)), key=lambda s: s.sort_key())

    @property
    def tool_invocations(self) -> ToolInvocations:
        return ToolInvocations(self, [InvocationView.from_span(s) for s in self.spans(SpanKind.TOOL_INVOCATION)])

    @property
    def llm_invocations(self) -> LlmInvocations:
        return LlmInvocations(self, self.spans(SpanKind.LLM_INVOCATION))

    @property
    def reply(self) -> ReplyExpectation:
        return ReplyExpectation(self)

    @property
    def turns(self) -> int:
        return len(self.traces)


class ToolInvocations(Sequence):
    """Chronological tool invocations of a scope."""
    def __init__(self, expect: Expect, views: list[InvocationView]):
        self._expect = expect
        self._views = tuple(views)

    def __getitem__(self, index):
        return self._views[index]

    def __len__(self):
        return len(self._views)

    def __repr__(self):
        return f"ToolInvocations({self.names})"

    @property
    def names(self) -> list[str]:
        return [v.tool_name for v in self._views]

    def _absent_detail(self, tool_name: str) -> str:
        if not self._views:
            return 'no tool invocations recorded'
        invoked = ', '.join(dict.fromkeys(self.names))
        return f"'{tool_name}' was not invoked; invoked tools: {invoked}"

    def to_include(self, tool_name: str) -> ToolInvocationMatch:
        """Pass if at least one invocation of `tool_name` exists; the result narrows to those invocations."""
        matches = [v for v in self._views if v.tool_name == tool_name]
        text = f"tool_invocations.to_include('{tool_name}')"
        if matches:
            outcome = self._expect._outcome(True, text)
        else:
            outcome = self._expect._outcome(False, text, self._absent_detail(tool_name))
        return ToolInvocationMatch(self._expect, tool_name, matches, outcome, self._absent_detail(tool_name))

    def times(self, tool_name: str, n: int) -> AssertionOutcome:
        """Pass if `tool_name` was invoked exactly `n` times."""
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise ValueError(f"times expects a non-negative integer, got {n!r}")
        count = self.names.count(tool_name)
        text = f"tool_invocations.times('{tool_name}', {n})"
        if count == n:
            return self._expect._outcome(True, text)
        return self._expect._outcome(False, text, f"expected {n}, found {count} invocations of '{tool_name}'")

    def _groups(self) -> list[list[str]]:
        # tools requested by one LLM response and run in parallel form one unordered group
        groups: list[list[str]] = []
        previous: Optional[InvocationView] = None
        for v in self._views:
            same_group = previous is not None and v.parallel and previous.parallel and v.group and v.group == previous.group
            if same_group:
                groups[-1].append(v.tool_name)
            else:
                groups.append([v.tool_name])
            previous = v
        return groups

    def in_order(self, names: Iterable[str]) -> AssertionOutcome:
        """Pass if `names` is a subsequence of the invocation sequence.

        Gaps are allowed. Invocations run in parallel from one LLM response may
        satisfy the names in any order.
        """
        names = list(names)
        text = f"tool_invocations.in_order({names})"
        matched = 0
        for group in self._groups():
            remaining = Counter(group)
            while matched < len(names) and remaining[names[matched]] > 0:
                remaining[names[matched]] -= 1
                matched += 1
        if matched == len(names):
            return self._expect._outcome(True, text)
        actual = f"actual sequence: [{', '.join(self.names)}]" if self._views else 'no tool invocations recorded'
        return self._expect._outcome(False, text, f"{actual}; first unmatched name: '{names[matched]}' (position {matched + 1})")


class ToolInvocationMatch:
    """Invocations of one tool, narrowed by `to_include`, for chaining input and output checks.

    Truthy when the underlying `to_include` passed.
    """
    def __init__(self, expect: Expect, tool_name: str, matches: list[InvocationView], outcome: AssertionOutcome, absent_detail: str):
        self._expect = expect
        self.tool_name = tool_name
        self.matches = tuple(matches)
        self.outcome = outcome
        self._absent_detail = absent_detail

    def __bool__(self):
        return self.outcome.passed

    def __len__(self):
        return len(self.matches)

    def __str__(self):
        return f"ToolInvocationMatch(tool={self.tool_name}, matches={len(self.matches)}, passed={self.outcome.passed})"

    @property
    def passed(self) -> bool:
        return self.outcome.passed

    @property
    def detail(self) -> str:
        return self.outcome.detail

    def _match(self, field_name: str, expected: Any, exact: bool) -> AssertionOutcome:
        mode = ', exact=True' if exact else ''
        text = f"tool_invocations.to_include('{self.tool_name}').with_{field_name}({_show(expected)}{mode})"
        if not self.matches:
            return self._expect._outcome(False, text, self._absent_detail)

        candidates = [(getattr(v, field_name), v) for v in self.matches]
        if any(first_mismatch(expected, value, exact=exact) is None for value, _ in candidates):
            return self._expect._outcome(True, text)

        value, closest = min(candidates, key=lambda c: mismatch_count(expected, c[0], exact=exact))
        mismatch = first_mismatch(expected, value, exact=exact)
        actual = '<missing>' if mismatch.reason == 'key is missing' else _show(mismatch.actual)
        detail = (
            f"none of {len(self.matches)} invocation(s) of '{self.tool_name}' matches; closest candidate (span {closest.span_ref}) "
            f"differs at path '{mismatch.path or '$'}': expected {_show(mismatch.expected)}, actual {actual}"
        )
        # structural mismatches need the reason; scalar ones are clear from the two values
        if mismatch.reason.startswith(('unexpected keys', 'expected an object', 'expected a list')) or 'elements' in mismatch.reason:
            detail += f" ({mismatch.reason})"
        return self._expect._outcome(False, text, detail)

    def with_input(self, expected: Any, exact: bool = False) -> AssertionOutcome:
        """Pass if some bound invocation's input deep-subset-matches `expected` (exact key sets with `exact=True`)."""
        return self._match('input', expected, exact)

    def with_output(self, expected: Any, exact: bool = False) -> AssertionOutcome:
        """Pass if some bound invocation's output deep-subset-matches `expected`."""
        return self._match('output', expected, exact)


class LlmInvocations(Sequence):
    """llm_invocation spans of a scope, filterable by mocked flag and stop reason."""
    def __init__(self, expect: Expect, spans: list[Span], filters: str = ''):
        self._expect = expect
        self._spans = tuple(spans)
        self._filters = filters

    def __getitem__(self, index):
        return self._spans[index]

    def __len__(self):
        return len(self._spans)

    def __repr__(self):
        return f"LlmInvocations(count={len(self._spans)}{self._filters})"

    @property
    def count(self) -> int:
        return len(self._spans)

    @property
    def stop_reasons(self) -> list[str]:
        return [s.attributes[SpanAttributes.LLM_STOP_REASON] for s in self._spans]

    def where(self, mocked: Optional[bool] = None, stop_reason: Optional[str] = None) -> LlmInvocations:
        spans = self._spans
        filters = self._filters
        if mocked is not None:
            spans = [s for s in spans if s.attributes[SpanAttributes.LLM_MOCKED] is mocked]
            filters += f", mocked={mocked}"
        if stop_reason is not None:
            spans = [s for s in spans if s.attributes[SpanAttributes.LLM_STOP_REASON] == stop_reason]
            filters += f", stop_reason={stop_reason}"
        return LlmInvocations(self._expect, list(spans), filters)

    def to_have_count(self, n: int) -> AssertionOutcome:
        text = f"llm_invocations{'.where(' + self._filters.lstrip(', ') + ')' if self._filters else ''}.to_have_count({n})"
        if self.count == n:
            return self._expect._outcome(True, text)
        detail = f"expected {n}, found {self.count}"
        if not self._spans:
            detail += '; no llm invocations recorded'
        return self._expect._outcome(False, text, detail)


class ReplyExpectation:
    """Substring checks on the agent's replies."""
    def __init__(self, expect: Expect):
        self._expect = expect

    @property
    def texts(self) -> list[str]:
        return [t.agent_reply for t in self._expect.traces]

    def to_contain(self, substring: str) -> AssertionOutcome:
        text = f"reply.to_contain({substring!r})"
        texts = self.texts
        if any(substring in t for t in texts):
            return self._expect._outcome(True, text)
        if not texts:
            return self._expect._outcome(False, text, 'no replies recorded')
        return self._expect._outcome(False, text, f"no reply contains {substring!r}; replies: {texts}")
