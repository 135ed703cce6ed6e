import io
import json
import pytest

import agenttestkit as tk
from agenttestkit.report import report_text
from sample_agents import driver_assistance_agent

def gated_report():
    passing = tk.Case('Hi', name='greeting')
    passing.attach_mock_script([tk.ScriptedText('Hello John Doe.')])
    failing = tk.Case('Change my number', name='phone_change')
    failing.attach_mock_script([
        tk.ScriptedToolUse({'name': 'update_customer_information', 'input': {'ucid': '1', 'phoneNr': '+555-98765'}}),
        tk.ScriptedText('Done.'),
    ])
    errored = tk.Case(['Hi', 'And now?'], name='short_script')
    errored.attach_mock_script([tk.ScriptedText('Hello.')])

    def expect_other_number(expect):
        expect.tool_invocations.to_include('update_customer_information').with_input({'phoneNr': '+555-00000'})

    suites = [
        tk.Suite('unit_suite', 'unit', [tk.CaseCheck(passing, driver_assistance_agent)]),
        tk.Suite('integration_suite', 'integration', [
            tk.CaseCheck(failing, driver_assistance_agent, expect_other_number),
            tk.CaseCheck(errored, driver_assistance_agent),
        ]),
        tk.Suite('acceptance_suite', 'acceptance', [tk.CaseCheck(passing, driver_assistance_agent)]),
    ]
    return tk.run_pyramid(suites, collector=tk.TraceCollector(ids=tk.IdGenerator(51)))

def test_text_report_lists_failures_and_gate():
    text = report_text(gated_report())
    assert '== unit (' in text
    assert "FAIL  integration_suite/phone_change: tool_invocations.to_include('update_customer_information')" in text
    assert "at path '.phoneNr'" in text
    assert 'ERROR integration_suite/short_script at turn 2: MockExhausted' in text
    assert "gate stopped at layer 'integration'; higher layers skipped" in text
    assert text.rstrip().endswith('exit code 1')
    assert 'tool coverage: 0.20 (1 of 5 registered tools)' in text

def test_json_report_structure(tmp_path):
    path = tmp_path / 'report.json'
    assert tk.emit_report(gated_report(), format='json', destination=str(path)) == 1
    d = json.loads(path.read_text(encoding='utf-8'))

    assert d['exit_code'] == 1
    assert d['gate_stopped_at'] == 'integration'
    assert [l['layer'] for l in d['layers']] == ['unit', 'integration', 'acceptance']
    integration = d['layers'][1]
    assert integration['counts'] == {'passed': 0, 'failed': 1, 'errored': 1, 'skipped': 0}
    errored = integration['cases'][1]
    assert errored['failed_turn'] == 2
    assert errored['error'].startswith('MockExhausted')
    assert d['layers'][2]['cases'][0]['status'] == 'skipped'
    assert 'conversation_id' not in json.dumps(d)

def test_emit_report_to_stream_returns_exit_code():
    buffer = io.StringIO()
    report = tk.run_pyramid([])
    assert tk.emit_report(report, destination=buffer) == 0
    assert buffer.getvalue().endswith('exit code 0\n')
    assert 'no cases' in buffer.getvalue()

def test_emit_report_rejects_unknown_format():
    with pytest.raises(ValueError):
        tk.emit_report(tk.run_pyramid([]), format='xml', destination=io.StringIO())

def test_unwritable_destination_is_an_io_failure(tmp_path):
    with pytest.raises(tk.IoFailure):
        tk.emit_report(tk.run_pyramid([]), destination=str(tmp_path))
