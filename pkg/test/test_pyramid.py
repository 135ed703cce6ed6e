import json
import re
import pytest

import agenttestkit as tk
from agenttestkit.pyramid import EXIT_FAILED, EXIT_OK
from agenttestkit.report import report_json
from sample_agents import driver_assistance_agent

def case_check(name, script, assertions=None, inputs=('Hi',)):
    case = tk.Case(list(inputs), name=name)
    case.attach_mock_script(script)
    return tk.CaseCheck(case, driver_assistance_agent, assertions)

def greeting(name='greeting', reply='Hello John Doe.'):
    return case_check(name, [tk.ScriptedText(reply)], lambda e: e.reply.to_contain('Hello'))

def vehicle_lookup(name='vehicle_lookup'):
    return case_check(name, [
        tk.ScriptedToolUse({'name': 'get_vehicle_status', 'input': {'vin': 'XXX'}}),
        tk.ScriptedText('Fine.'),
    ], lambda e: e.tool_invocations.to_include('get_vehicle_status').with_output({'found': True}))

def three_layers(integration_reply='Hello John Doe.'):
    return [
        tk.Suite('unit_suite', 'unit', [greeting()]),
        tk.Suite('integration_suite', 'integration', [greeting('integration_greeting', integration_reply), vehicle_lookup()]),
        tk.Suite('acceptance_suite', 'acceptance', [vehicle_lookup('acceptance_lookup')]),
    ]

def test_all_layers_pass():
    report = tk.run_pyramid(three_layers(), collector=tk.TraceCollector(ids=tk.IdGenerator(41)))
    assert report.exit_code == EXIT_OK
    assert report.gate_stopped_at is None
    assert [l.layer.value for l in report.layers] == ['unit', 'integration', 'acceptance']
    assert report.layer('acceptance').counts == {'passed': 1, 'failed': 0, 'errored': 0, 'skipped': 0}

def test_failing_layer_gates_the_layers_above():
    report = tk.run_pyramid(three_layers(integration_reply='Goodbye.'), collector=tk.TraceCollector(ids=tk.IdGenerator(42)))

    assert report.exit_code == EXIT_FAILED
    assert report.gate_stopped_at is tk.Layer.INTEGRATION
    assert report.layer('unit').counts['passed'] == 1
    assert report.layer('integration').counts == {'passed': 1, 'failed': 1, 'errored': 0, 'skipped': 0}
    assert report.layer('acceptance').counts == {'passed': 0, 'failed': 0, 'errored': 0, 'skipped': 1}
    assert report.to_dict()['gate_stopped_at'] == 'integration'

def test_errored_case_also_gates():
    suites = [
        tk.Suite('unit_suite', 'unit', [case_check('exhausted', [], None)]),
        tk.Suite('integration_suite', 'integration', [greeting()]),
    ]
    report = tk.run_pyramid(suites)
    assert report.gate_stopped_at is tk.Layer.UNIT
    assert report.layer('unit').counts['errored'] == 1
    assert report.layer('integration').counts['skipped'] == 1

def test_empty_layers_are_reported():
    report = tk.run_pyramid([tk.Suite('only_unit', 'unit', [greeting()])])
    assert [l.layer.value for l in report.layers] == ['unit', 'integration', 'acceptance']
    assert report.layer('acceptance').cases == []
    assert report.exit_code == EXIT_OK

def test_tool_coverage_counts_registered_tools():
    report = tk.run_pyramid(three_layers(), collector=tk.TraceCollector(ids=tk.IdGenerator(43)))
    coverage = report.tool_coverage
    assert coverage.invoked_tools == {'get_vehicle_status'}
    assert len(coverage.registered_tools) == 5
    assert coverage.ratio == pytest.approx(0.2)
    assert 'book_appointment' in coverage.untested_tools

def coverage_suite():
    calls = {
        'get_customer_information': {'phoneNr': '+555-12345'},
        'get_vehicle_status': {'vin': 'XXX'},
        'list_available_appointments': {},
    }
    return [tk.Suite('coverage', 'integration', [
        case_check(f"call_{name}", [tk.ScriptedToolUse({'name': name, 'input': tool_input}), tk.ScriptedText('ok')])
        for name, tool_input in calls.items()
    ])]

def without_durations(text):
    return re.sub(r'"duration_ms": \d+', '"duration_ms": 0', text)

def test_coverage_of_three_of_five_tools_is_stable():
    runs = [
        report_json(tk.run_pyramid(coverage_suite(), collector=tk.TraceCollector(ids=tk.IdGenerator(seed))))
        for seed in (44, 45)
    ]
    assert without_durations(runs[0]) == without_durations(runs[1])
    coverage = json.loads(runs[0])['layers'][1]['tool_coverage']
    assert coverage['ratio'] == 0.6
    assert coverage['invoked_tools'] == ['get_customer_information', 'get_vehicle_status', 'list_available_appointments']

def test_explicit_registry_for_coverage():
    report = tk.run_pyramid(coverage_suite())
    assert tk.tool_coverage(report, ['get_vehicle_status', 'book_appointment']).ratio == 0.5
    assert tk.tool_coverage(report, []).ratio == 1.0

def test_fail_fast_within_layer_skips_the_rest():
    suite = tk.Suite('unit_suite', 'unit', [greeting('first', 'Bye.'), greeting('second'), greeting('third')])
    report = tk.run_pyramid([suite], fail_fast_within_layer=True)
    assert [c.status.value for c in report.layer('unit').cases] == ['failed', 'skipped', 'skipped']

def test_parallel_jobs_keep_discovery_order():
    suite = tk.Suite('unit_suite', 'unit', [greeting(f"case_{i}") for i in range(8)] + [vehicle_lookup()])
    collector = tk.TraceCollector(ids=tk.IdGenerator(46))
    report = tk.run_pyramid([suite], jobs=4, collector=collector)
    assert [c.case_name for c in report.cases] == [f"case_{i}" for i in range(8)] + ['vehicle_lookup']
    assert report.exit_code == EXIT_OK
    assert len(collector.snapshot()) == 9

def test_component_checks_run_without_an_llm():
    def check():
        scope = tk.Expect([])
        return [scope.that(1 + 1 == 2, 'arithmetic')]

    def broken():
        raise RuntimeError('fixture missing')

    suite = tk.Suite('components', 'unit', [tk.ComponentCheck('ok', check), tk.ComponentCheck('broken', broken)])
    report = tk.run_pyramid([suite])
    assert [c.status.value for c in report.layer('unit').cases] == ['passed', 'errored']

def test_lint_rejects_passthrough_below_acceptance():
    case = tk.Case('Hi', name='live')
    case.attach_mock_script([tk.Passthrough()])
    check = tk.CaseCheck(case, driver_assistance_agent)
    with pytest.raises(tk.ConfigError):
        tk.Suite('live_suite', 'integration', [check]).lint()
    tk.Suite('live_suite', 'acceptance', [check]).lint()

def test_unknown_layer_is_a_config_error():
    with pytest.raises(tk.ConfigError):
        tk.Suite('x', 'smoke')

def test_plain_assert_in_assertions_becomes_a_failed_outcome():
    def assertions(expect):
        assert expect.turns == 2, 'expected two turns'

    suite = tk.Suite('unit_suite', 'unit', [case_check('asserting', [tk.ScriptedText('Hi')], assertions)])
    [result] = tk.run_pyramid([suite]).cases
    assert result.status is tk.CaseStatus.FAILED
    assert result.assertions[0].detail == 'expected two turns'
    assert '\n' not in result.assertions[0].detail

def test_trace_dir_receives_every_conversation(tmp_path):
    tk.run_pyramid(three_layers(), trace_dir=str(tmp_path))
    assert len(list(tmp_path.glob('*.spans.jsonl'))) == 4

def test_crashing_assertions_error_one_case_and_the_run_continues():
    def assertions(expect):
        return {}['missing']

    suite = tk.Suite('unit_suite', 'unit', [case_check('crashing', [tk.ScriptedText('Hi')], assertions), greeting()])
    report = tk.run_pyramid([suite])
    crashing, greeted = report.layer('unit').cases
    assert crashing.status is tk.CaseStatus.ERRORED
    assert 'KeyError' in crashing.error and 'missing' in crashing.error
    assert greeted.status is tk.CaseStatus.PASSED
    assert report.exit_code == EXIT_FAILED
    assert report.gate_stopped_at is tk.Layer.UNIT

def test_failing_agent_factory_errors_the_case():
    def factory():
        raise ValueError('unknown incident')

    case = tk.Case('Hi', name='no_agent')
    case.attach_mock_script([tk.ScriptedText('Hi')])
    suite = tk.Suite('unit_suite', 'unit', [tk.CaseCheck(case, factory), greeting()])
    report = tk.run_pyramid([suite], jobs=2)
    assert [c.status.value for c in report.cases] == ['errored', 'passed']
    assert report.cases[0].error == 'ValueError: unknown incident'
    assert report.cases[0].suite == 'unit_suite'

def test_check_that_raises_is_recorded_not_propagated():
    class ExplodingCheck:
        name = 'exploding'

        def run(self, collector):
            raise RuntimeError('boom')

    report = tk.run_pyramid([tk.Suite('unit_suite', 'unit', [ExplodingCheck()])])
    [result] = report.cases
    assert result.status is tk.CaseStatus.ERRORED
    assert result.error == 'RuntimeError: boom'
