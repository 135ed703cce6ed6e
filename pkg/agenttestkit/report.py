from __future__ import annotations

import json
import sys

from typing import IO, Optional, Union

import pandas as pd

from .exceptions import IoFailure
from .pyramid import RunReport

REPORT_FORMATS = ('text', 'json')


def report_json(report: RunReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)

def report_text(report: RunReport) -> str:
    """Human readable layer-by-layer summary listing every failing assertion."""
    lines = []
    for layer in report.layers:
        counts = layer.counts
        coverage = layer.tool_coverage
        lines.append(f"== {layer.layer.value} ({layer.duration_ms} ms) ==")
        if layer.cases:
            df = pd.DataFrame([{
                'suite': c.suite,
                'case': c.case_name,
                'status': c.status.value,
                'assertions': f"{len(c.passed_assertions)}/{len(c.assertions)}",
            } for c in layer.cases])
            lines.append(df.to_string(index=False))
        else:
            lines.append('no cases')
        lines.append(', '.join(f"{k}: {v}" for k, v in counts.items()))
        lines.append(
            f"tool coverage: {coverage.ratio:.2f} ({len(coverage.invoked_tools & coverage.registered_tools)} of {len(coverage.registered_tools)} registered tools)"
            + (f"; untested: {', '.join(coverage.untested_tools)}" if coverage.untested_tools else '')
        )
        for c in layer.cases:
            if c.error is not None:
                where = f" at turn {c.failed_turn}" if c.failed_turn is not None else ''
                lines.append(f"  ERROR {c.suite}/{c.case_name}{where}: {c.error}")
            for a in c.failed_assertions:
                lines.append(f"  FAIL  {c.suite}/{c.case_name}: {a.expectation_text}: {a.detail}")
        lines.append('')

    if report.gate_stopped_at is not None:
        lines.append(f"gate stopped at layer '{report.gate_stopped_at.value}'; higher layers skipped")
    lines.append(f"exit code {report.exit_code}")
    return '\n'.join(lines) + '\n'

def emit_report(report: RunReport, format: str = 'text', destination: Optional[Union[str, IO[str]]] = None) -> int:
    """Write the report and return the run's exit code.

    Args:
        report (RunReport): The run report.
        format (str, optional): `text` or `json`.
        destination (Optional[Union[str, IO[str]]], optional): File path or stream; stdout by default.

    Returns:
        The report's exit code.

    Raises:
        IoFailure: The destination cannot be written.
    """
    if format not in REPORT_FORMATS:
        raise ValueError(f"unknown report format {format!r}; expected one of {', '.join(REPORT_FORMATS)}")
    body = report_json(report) + '\n' if format == 'json' else report_text(report)

    if destination is None:
        destination = sys.stdout
    try:
        if hasattr(destination, 'write'):
            destination.write(body)
        else:
            with open(destination, 'w', encoding='utf-8', newline='\n') as fh:
                fh.write(body)
    except OSError as e:
        raise IoFailure(f"cannot write report to {destination}: {e}") from e
    return report.exit_code
