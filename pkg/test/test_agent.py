import json
import pytest

import agenttestkit as tk

ECHO = tk.tool('echo', 'Echo the given text', {'text': 'string'}, ['text'])
BROKEN = tk.tool('broken', 'Always fails')

def new_agent(script, **config):
    collector = tk.TraceCollector(ids=tk.IdGenerator(7))
    agent = tk.Agent(tk.AgentConfig(system_prompt='test agent', **config), tk.MockLlm(script=script), collector)
    agent.register_tool(ECHO, lambda i: {'echo': i['text']})
    agent.register_tool(BROKEN, lambda i: 1 / 0)
    return agent

def tool_spans(trace):
    return trace.spans_of_kind(tk.SpanKind.TOOL_INVOCATION)

def test_turn_runs_tools_and_returns_final_text():
    agent = new_agent([
        tk.ScriptedToolUse([{'name': 'echo', 'input': {'text': 'ping'}}]),
        tk.ScriptedText('pong'),
    ])
    reply = agent.converse('say ping')
    assert reply.text == 'pong'
    assert reply.trace.agent_reply == 'pong'

    [span] = tool_spans(reply.trace)
    assert span.json_attr('ai.tool.input') == {'text': 'ping'}
    assert span.json_attr('ai.tool.output') == {'echo': 'ping'}
    assert span.attributes['ai.tool.is_error'] is False
    assert span.attributes['ai.tool.use_id'] == 'tooluse-1'
    assert len(reply.trace.spans_of_kind(tk.SpanKind.LLM_INVOCATION)) == 2
    assert len(agent.memory) == 4

def test_llm_request_carries_history_and_tool_specs():
    agent = new_agent([tk.ScriptedText('first'), tk.ScriptedText('second')])
    agent.converse('one')
    agent.converse('two')
    last = agent.llm.call_log[-1]
    assert [m.role.value for m in last.messages] == ['user', 'assistant', 'user']
    assert last.system_prompt == 'test agent'
    assert [s.name for s in last.tool_specs] == ['echo', 'broken']

def test_loop_guard_trips_after_max_iterations():
    agent = new_agent([tk.ScriptedToolUse([{'name': 'echo', 'input': {'text': 'again'}}])] * 11)
    with pytest.raises(tk.LoopGuardTripped) as e:
        agent.converse('loop forever')

    trace = e.value.trace
    assert trace is not None
    assert trace.status is tk.SpanStatus.ERROR
    assert len(trace.spans_of_kind(tk.SpanKind.LLM_INVOCATION)) == 10
    assert len(agent.llm) == 1
    assert 'LoopGuardTripped' in trace.root.attributes['ai.turn.error']

def test_loop_guard_is_configurable():
    agent = new_agent([tk.ScriptedToolUse([{'name': 'echo', 'input': {'text': 'x'}}])] * 3,
                      max_iterations_per_turn=2)
    with pytest.raises(tk.LoopGuardTripped):
        agent.converse('hi')
    assert agent.llm.consumed == 2

@pytest.mark.parametrize('use, fragment', [
    ({'name': 'unknown_tool', 'input': {}}, "tool 'unknown_tool' is not registered"),
    ({'name': 'echo', 'input': {}}, "property 'text' is required but missing"),
    ({'name': 'echo', 'input': {'text': 3}}, 'expected string'),
    ({'name': 'broken', 'input': {}}, 'ZeroDivisionError'),
])
def test_tool_errors_are_returned_to_the_llm(use, fragment):
    agent = new_agent([tk.ScriptedToolUse([use]), tk.ScriptedText('sorry')])
    reply = agent.converse('try it')

    [span] = tool_spans(reply.trace)
    assert span.status is tk.SpanStatus.ERROR
    assert span.attributes['ai.tool.is_error'] is True
    assert fragment in span.json_attr('ai.tool.output')['error']

    results = agent.llm.call_log[1].messages[-1]
    assert results.role is tk.Role.TOOL_RESULT
    assert results.content[0].is_error is True
    assert reply.text == 'sorry'

def test_tool_returning_non_json_value_is_an_error():
    agent = new_agent([tk.ScriptedToolUse([{'name': 'raw', 'input': {}}]), tk.ScriptedText('ok')])
    agent.register_tool(tk.tool('raw'), lambda i: {'when': object()})
    [span] = tool_spans(agent.converse('go').trace)
    assert span.attributes['ai.tool.is_error'] is True

def test_parallel_tools_share_a_group_and_keep_result_order():
    uses = [{'name': 'echo', 'input': {'text': str(i)}} for i in range(5)]
    agent = new_agent([tk.ScriptedToolUse(uses), tk.ScriptedText('done')], parallel_tools=True)
    reply = agent.converse('fan out')

    spans = tool_spans(reply.trace)
    assert len(spans) == 5
    assert {s.attributes['ai.tool.group'] for s in spans} == {reply.trace.spans_of_kind('llm_invocation')[0].span_id}
    assert all(s.attributes['ai.tool.parallel'] is True for s in spans)
    results = agent.llm.call_log[1].messages[-1].content
    assert [r.output for r in results] == [{'echo': str(i)} for i in range(5)]

def test_sequential_tools_are_not_marked_parallel():
    uses = [{'name': 'echo', 'input': {'text': 'a'}}, {'name': 'echo', 'input': {'text': 'b'}}]
    agent = new_agent([tk.ScriptedToolUse(uses), tk.ScriptedText('done')])
    spans = tool_spans(agent.converse('two tools').trace)
    assert [s.json_attr('ai.tool.input')['text'] for s in spans] == ['a', 'b']
    assert all(s.attributes['ai.tool.parallel'] is False for s in spans)

def test_converse_requires_llm_and_collector():
    with pytest.raises(tk.AgentUnconfigured):
        tk.Agent().converse('hi')
    agent = tk.Agent(llm=tk.MockLlm(script=[tk.ScriptedText('x')]))
    with pytest.raises(tk.AgentUnconfigured):
        agent.converse('hi')

def test_duplicate_tool_names_are_rejected():
    agent = new_agent([])
    with pytest.raises(tk.DuplicateToolName):
        agent.register_tool(ECHO, lambda i: i)

@pytest.mark.parametrize('value', [0, -1, True, '10'])
def test_config_rejects_bad_iteration_limits(value):
    with pytest.raises(tk.ConfigError):
        tk.AgentConfig(max_iterations_per_turn=value)

def test_config_file_errors_cite_the_line(tmp_path):
    path = tmp_path / 'agent.json'
    path.write_text('{\n  "system_prompt": "x",\n  "trace_memory": tru\n}\n', encoding='utf-8')
    with pytest.raises(tk.ConfigError) as e:
        tk.AgentConfig.from_file(str(path))
    assert e.value.line_number == 3

    path.write_text(json.dumps({'system_prompt': 'x', 'temperature': 0.2}), encoding='utf-8')
    with pytest.raises(tk.ConfigError):
        tk.AgentConfig.from_file(str(path))

def test_trace_memory_records_reads_and_writes():
    agent = new_agent([
        tk.ScriptedText('hello'),
        tk.ScriptedToolUse([{'name': 'echo', 'input': {'text': 'x'}}]),
        tk.ScriptedText('done'),
    ], trace_memory=True)
    agent.converse('hi')
    second = agent.converse('echo x')

    memory_spans = second.trace.spans_of_kind(tk.SpanKind.MEMORY_ACCESS)
    assert [s.attributes['ai.memory.operation'] for s in memory_spans] == ['read', 'write']
    assert [s.attributes['ai.memory.message_count'] for s in memory_spans] == [2, 4]

def test_failed_llm_client_ends_the_turn_with_an_error():
    class Broken:
        def invoke(self, request, turn=None):
            raise TimeoutError('no answer')

    collector = tk.TraceCollector(ids=tk.IdGenerator(8))
    agent = tk.Agent(llm=Broken(), collector=collector)
    with pytest.raises(tk.LlmFailure) as e:
        agent.converse('hi')
    assert e.value.trace.status is tk.SpanStatus.ERROR
    assert len(collector.snapshot()) == 1

def test_memory_export_lets_a_new_agent_continue(tmp_path):
    agent = new_agent([tk.ScriptedText('hello')])
    agent.start_conversation('conv-restore')
    agent.converse('hi')
    path = tmp_path / 'memory.json'
    agent.memory.export_json(str(path))

    restored = new_agent([tk.ScriptedText('welcome back')])
    restored.restore_memory(tk.ConversationMemory.import_json(str(path)))
    reply = restored.converse('still there?')
    assert reply.trace.conversation_id == 'conv-restore'
    assert len(restored.llm.call_log[0].messages) == 3

def test_memory_import_rejects_other_json(tmp_path):
    path = tmp_path / 'memory.json'
    path.write_text('{"messages": []}', encoding='utf-8')
    with pytest.raises(tk.ConfigError):
        tk.ConversationMemory.import_json(str(path))

def test_failed_turn_leaves_memory_unchanged():
    agent = new_agent([tk.ScriptedText('hello')])
    agent.converse('hi')
    with pytest.raises(tk.MockExhausted):
        agent.converse('are you there?')
    assert len(agent.memory) == 2

    agent.llm.add_output(text_output='yes')
    assert agent.converse('still there?').text == 'yes'
    assert [m.role.value for m in agent.llm.call_log[-1].messages] == ['user', 'assistant', 'user']
    assert len(agent.memory) == 4
