from __future__ import annotations

import sys
import time

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from tqdm import tqdm

from .case import CaseResult, CaseStatus
from .collector import TraceCollector
from .span import SpanAttributes, SpanKind
from .suite import Layer, Suite
from .tool import ToolRegistry

VERBOSE = False

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG_ERROR = 2


@dataclass(frozen=True)
class ToolCoverage:
    """Share of registered tools exercised by a run.

    Attributes:
        invoked_tools (frozenset[str]): Tool names found in the run's tool spans.
        registered_tools (frozenset[str]): Tools the agents offered.
        ratio (float): |invoked ∩ registered| / |registered|; 1 when nothing is registered.
    """
    invoked_tools: frozenset
    registered_tools: frozenset

    @property
    def ratio(self) -> float:
        if not self.registered_tools:
            return 1.0
        return len(self.invoked_tools & self.registered_tools) / len(self.registered_tools)

    @property
    def untested_tools(self) -> list[str]:
        return sorted(self.registered_tools - self.invoked_tools)

    def to_dict(self) -> dict:
        return {
            'invoked_tools': sorted(self.invoked_tools),
            'registered_tools': sorted(self.registered_tools),
            'ratio': self.ratio,
        }


@dataclass
class SuiteReport:
    """Results of one pyramid layer.

    Attributes:
        layer (Layer): The layer.
        cases (list[CaseResult]): One result per discovered case, in discovery order.
        duration_ms (int): Wall time spent running the layer.
    """
    layer: Layer
    cases: list = field(default_factory=list)
    duration_ms: int = 0

    @property
    def counts(self) -> dict:
        counts = {s.value: 0 for s in (CaseStatus.PASSED, CaseStatus.FAILED, CaseStatus.ERRORED, CaseStatus.SKIPPED)}
        for c in self.cases:
            counts[c.status.value] += 1
        return counts

    @property
    def passed(self) -> bool:
        return all(c.status in (CaseStatus.PASSED, CaseStatus.SKIPPED) for c in self.cases)

    @property
    def tool_coverage(self) -> ToolCoverage:
        return tool_coverage(self)

    def to_dict(self) -> dict:
        return {
            'layer': self.layer.value,
            'duration_ms': self.duration_ms,
            'counts': self.counts,
            'tool_coverage': self.tool_coverage.to_dict(),
            'cases': [c.to_dict() for c in self.cases],
        }


@dataclass
class RunReport:
    layers: list = field(default_factory=list)
    gate_stopped_at: Optional[Layer] = None

    @property
    def exit_code(self) -> int:
        return EXIT_OK if all(l.passed for l in self.layers) else EXIT_FAILED

    @property
    def cases(self) -> list[CaseResult]:
        return [c for l in self.layers for c in l.cases]

    @property
    def tool_coverage(self) -> ToolCoverage:
        return tool_coverage(self)

    def layer(self, layer: Union[Layer, str]) -> Optional[SuiteReport]:
        layer = Layer(layer)
        return next((l for l in self.layers if l.layer is layer), None)

    def to_dict(self) -> dict:
        d = {'exit_code': self.exit_code, 'layers': [l.to_dict() for l in self.layers]}
        if self.gate_stopped_at is not None:
            d['gate_stopped_at'] = self.gate_stopped_at.value
        return d


def tool_coverage(report: Union[RunReport, SuiteReport], registry: Optional[Union[ToolRegistry, Iterable[str]]] = None) -> ToolCoverage:
    """Compute tool coverage over the traces of a report.

    Args:
        report (Union[RunReport, SuiteReport]): Whole run or one layer.
        registry (Optional[Union[ToolRegistry, Iterable[str]]], optional): Registered tools; defaults to
            the tools the agents of the report's cases offered.

    Returns:
        The ToolCoverage record.
    """
    cases = report.cases
    invoked = {
        s.attributes[SpanAttributes.TOOL_NAME]
        for c in cases for t in c.all_traces() for s in t.spans_of_kind(SpanKind.TOOL_INVOCATION)
    }
    if registry is None:
        registered = {name for c in cases for name in c.registered_tools}
    elif isinstance(registry, ToolRegistry):
        registered = set(registry.names())
    else:
        registered = set(registry)
    return ToolCoverage(frozenset(invoked), frozenset(registered))


def _run_check(check, suite: Suite, collector: TraceCollector) -> CaseResult:
    try:
        result = check.run(collector)
    except Exception as e:
        sys.stderr.write(f"[ERROR] {suite.name}/{check.name}: {type(e).__name__}: {e}\n")
        result = CaseResult(case_name=check.name, error=f"{type(e).__name__}: {e}")
    result.suite = suite.name
    return result

def _run_layer(layer: Layer, suites: list[Suite], collector: TraceCollector, jobs: int, fail_fast_within_layer: bool,
               progress: bool) -> SuiteReport:
    work = [(suite, check) for suite in suites for check in suite.checks]
    report = SuiteReport(layer)
    started = time.perf_counter()
    with tqdm(total=len(work), desc=f"{layer.value:<11}", unit='case', disable=not progress) as bar:
        if fail_fast_within_layer or jobs <= 1:
            stopped = False
            for suite, check in work:
                if stopped:
                    report.cases.append(CaseResult.skipped_case(check.name, suite=suite.name))
                else:
                    result = _run_check(check, suite, collector)
                    report.cases.append(result)
                    stopped = fail_fast_within_layer and result.status in (CaseStatus.FAILED, CaseStatus.ERRORED)
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as executor:
                futures = [executor.submit(_run_check, check, suite, collector) for suite, check in work]
                for f in futures:
                    report.cases.append(f.result())
                    bar.update(1)
    report.duration_ms = int((time.perf_counter() - started) * 1000)
    return report

def run_pyramid(suites: Iterable[Suite], jobs: int = 1, fail_fast_within_layer: bool = False, progress: bool = False,
                collector: Optional[TraceCollector] = None, trace_dir: Optional[str] = None) -> RunReport:
    """Run suites layer by layer, stopping at the first failing layer.

    All cases of a layer run (in parallel with `jobs > 1`) before the gate is
    checked; when any case fails or errors, every higher layer is reported
    as skipped.

    Args:
        suites (Iterable[Suite]): Discovered suites.
        jobs (int, optional): Worker threads per layer.
        fail_fast_within_layer (bool, optional): Skip the rest of a layer after its first failure (runs sequentially).
        progress (bool, optional): Show a progress bar per layer.
        collector (Optional[TraceCollector], optional): Collector shared by all cases; a new one by default.
        trace_dir (Optional[str], optional): Directory completed turns are persisted to.

    Returns:
        The RunReport.
    """
    suites = list(suites)
    collector = collector or TraceCollector(trace_dir=trace_dir)
    report = RunReport()
    for layer in Layer.ordered():
        layer_suites = sorted((s for s in suites if s.layer is layer), key=lambda s: s.name)
        if report.gate_stopped_at is not None:
            skipped = SuiteReport(layer, [
                CaseResult.skipped_case(check.name, suite=s.name) for s in layer_suites for check in s.checks
            ])
            report.layers.append(skipped)
            continue

        layer_report = _run_layer(layer, layer_suites, collector, max(1, jobs), fail_fast_within_layer, progress)
        report.layers.append(layer_report)
        print(f"[pyramid] {layer.value}: {layer_report.counts}") if VERBOSE else None
        if not layer_report.passed:
            report.gate_stopped_at = layer
    return report
