import os
import threading
import pytest

import agenttestkit as tk

def new_collector(**kwargs):
    return tk.TraceCollector(ids=tk.IdGenerator(1), **kwargs)

def record_tool(turn, name='get_logs'):
    start = turn.now()
    return turn.record(f"execute_tool {name}", tk.SpanKind.TOOL_INVOCATION, start, turn.now(), attributes={
        'ai.tool.name': name, 'ai.tool.input': '{}', 'ai.tool.output': '{}',
    })

def test_turn_produces_one_trace_with_root_and_children():
    collector = new_collector()
    turn = collector.begin_turn('conv-1', 'What happened?')
    record_tool(turn)
    record_tool(turn, 'get_metrics')
    trace = collector.end_turn(turn, 'The ingress rule was removed.')

    assert len(trace.spans) == 3
    assert trace.root.kind is tk.SpanKind.AGENT_TURN
    assert trace.user_input == 'What happened?'
    assert trace.agent_reply == 'The ingress rule was removed.'
    assert all(s.parent_span_id == trace.root.span_id for s in trace.spans if not s.is_root)
    assert trace.root.end_time >= max(s.end_time for s in trace.spans)
    assert trace.root.attributes['ai.turn.index'] == 0

def test_turn_indexes_count_per_conversation():
    collector = new_collector()
    for _ in range(2):
        collector.end_turn(collector.begin_turn('conv-a', 'hi'), 'hello')
    trace = collector.end_turn(collector.begin_turn('conv-b', 'hi'), 'hello')
    assert trace.root.attributes['ai.turn.index'] == 0
    assert [t.root.attributes['ai.turn.index'] for t in collector.traces_for_conversation('conv-a')] == [0, 1]

def test_emit_after_end_raises_turn_ended():
    collector = new_collector()
    turn = collector.begin_turn('conv-1', 'hi')
    collector.end_turn(turn, 'hello')
    with pytest.raises(tk.TurnEnded):
        record_tool(turn)
    with pytest.raises(tk.TurnEnded):
        collector.end_turn(turn, 'again')

def test_emit_rejects_spans_of_other_turns():
    collector = new_collector()
    first = collector.begin_turn('conv-1', 'one')
    second = collector.begin_turn('conv-1', 'two')
    span = record_tool(first)
    with pytest.raises(tk.TraceMismatch):
        collector.emit(second, span)

def test_closed_collector_refuses_new_turns():
    collector = new_collector()
    collector.close()
    with pytest.raises(tk.CollectorClosed):
        collector.begin_turn('conv-1', 'hi')

def test_empty_user_input_is_recorded():
    collector = new_collector()
    trace = collector.end_turn(collector.begin_turn('conv-1', ''), '')
    assert trace.user_input == ''

def test_error_turn_keeps_status_and_error():
    collector = new_collector()
    turn = collector.begin_turn('conv-1', 'hi')
    trace = collector.end_turn(turn, '', status=tk.SpanStatus.ERROR, error='LlmFailure: timeout')
    assert trace.status is tk.SpanStatus.ERROR
    assert trace.root.attributes['ai.turn.error'] == 'LlmFailure: timeout'

def test_snapshot_is_immutable_and_shows_open_turns():
    collector = new_collector()
    turn = collector.begin_turn('conv-1', 'hi')
    record_tool(turn)
    snapshot = collector.snapshot()
    assert len(snapshot) == 1
    provisional = snapshot.traces[0]
    assert provisional.root.attributes['ai.turn.open'] is True
    assert len(provisional.spans) == 2

    collector.end_turn(turn, 'hello')
    assert snapshot.traces[0].root.attributes['ai.turn.open'] is True
    assert 'ai.turn.open' not in collector.snapshot().traces[0].root.attributes

def test_unknown_conversation_has_no_traces():
    collector = new_collector()
    assert collector.traces_for_conversation('nope') == []
    assert tk.traces_for_conversation(collector.snapshot(), 'nope') == []

def test_concurrent_emission_loses_no_spans():
    collector = new_collector()
    turn = collector.begin_turn('conv-1', 'parallel tools')
    workers, per_worker = 8, 50

    def work():
        for _ in range(per_worker):
            record_tool(turn)

    threads = [threading.Thread(target=work) for _ in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    trace = collector.end_turn(turn, 'done')

    assert len(trace.spans) == workers * per_worker + 1
    assert len({s.span_id for s in trace.spans}) == len(trace.spans)

def test_clock_is_strictly_increasing():
    collector = new_collector()
    stamps = [collector.now() for _ in range(1000)]
    assert all(b > a for a, b in zip(stamps, stamps[1:]))

def test_trace_dir_receives_completed_turns(tmp_path):
    collector = new_collector(trace_dir=str(tmp_path))
    for text in ('one', 'two'):
        turn = collector.begin_turn('conv-1', text)
        record_tool(turn)
        collector.end_turn(turn, text.upper())

    path = tmp_path / 'conv-1.spans.jsonl'
    assert path.exists()
    restored = tk.import_jsonl(str(path))
    assert restored == collector.snapshot()

def test_trace_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv('TESTKIT_TRACE_DIR', str(tmp_path))
    collector = new_collector()
    collector.end_turn(collector.begin_turn('conv-env', 'hi'), 'hello')
    assert os.path.exists(tmp_path / 'conv-env.spans.jsonl')
