"""Unit layer: agent components checked in isolation, without an LLM.

Covers memory write-then-read, knowledge base queries on awkward strings
and plausibility of every sample tool's output.
"""
from __future__ import annotations

import os
import tempfile

from agenttestkit import ComponentCheck, ConversationMemory, Expect, Message, Suite, TextBlock, execute_tool
from sample_agents import KnowledgeBase, diagnostic_agent, driver_assistance_agent, events_agent


def memory_write_then_read():
    expect = Expect([])
    memory = ConversationMemory('conv-unit')
    memory.append(Message.user('Hello, can you help me?'))
    memory.append(Message.assistant([TextBlock('Sure.')]))
    expect.that([m.text for m in memory.messages] == ['Hello, can you help me?', 'Sure.'],
                'memory returns written messages in order', f"got {[m.text for m in memory.messages]}")

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'memory.json')
        memory.export_json(path)
        restored = ConversationMemory.import_json(path)
    expect.that(restored.to_dict() == memory.to_dict(), 'exported memory imports unchanged',
                f"got {restored.to_dict()}")
    return expect.outcomes


def knowledge_base_queries():
    expect = Expect([])
    kb = KnowledgeBase()
    expect.that(kb.query('') == [], "query('') returns no documents")
    expect.that(kb.query('!@#$%^&*()[]{}') == [], 'query of symbols only returns no documents')
    long_hits = kb.query('pressure ' * 5000)
    expect.that(bool(long_hits) and long_hits[0]['doc_id'] == 'kb-003', 'very long query still ranks kb-003 first',
                f"got {long_hits}")
    hits = kb.query('Winter TIRES?!')
    expect.that([h['doc_id'] for h in hits] == ['kb-001'], "query('Winter TIRES?!') finds the winter tire document",
                f"got {hits}")
    return expect.outcomes


def driver_tools_are_plausible():
    expect = Expect([])
    agent = driver_assistance_agent()
    registry = agent.registry

    customer = execute_tool(registry, 'get_customer_information', {'phoneNr': '+555-12345'})
    expect.that(customer.get('customer', {}).get('ucid') == '1', 'the registered caller +555-12345 is ucid 1', f"got {customer}")

    updated = execute_tool(registry, 'update_customer_information', {'ucid': '1', 'phoneNr': '+555-98765'})
    expect.that(updated == {'updated': True}, 'update_customer_information reports the update', f"got {updated}")
    reread = execute_tool(registry, 'get_customer_information', {'phoneNr': '+555-98765'})
    expect.that(reread.get('customer', {}).get('ucid') == '1', 'the new phone number resolves to ucid 1', f"got {reread}")

    status = execute_tool(registry, 'get_vehicle_status', {'vin': 'XXX'})
    expect.that(status.get('status', {}).get('lastUpdate') == '2025-08-28', 'vehicle XXX was last updated on 2025-08-28',
                f"got {status}")

    free = [a['appointment_id'] for a in execute_tool(registry, 'list_available_appointments', {})['appointments']]
    expect.that('IX94' in free and 'JB12' not in free, 'only free slots are listed', f"got {free}")
    first = execute_tool(registry, 'book_appointment', {'appointment_id': 'IX94', 'reason': 'install winter tires'})
    second = execute_tool(registry, 'book_appointment', {'appointment_id': 'IX94', 'reason': 'again'})
    expect.that(first['booked'] and not second['booked'], 'a slot can be booked only once', f"got {first}, {second}")
    return expect.outcomes


def diagnostic_tools_are_plausible():
    expect = Expect([])
    registry = diagnostic_agent().registry
    services = [s['name'] for s in execute_tool(registry, 'get_architecture', {})['services']]
    expect.that(services == ['gateway', 'api', 'db', 'cache'], 'architecture lists the four services', f"got {services}")
    lines = execute_tool(registry, 'get_logs', {'service': 'api'})['lines']
    expect.that(any('connectivity' in line for line in lines), 'api logs show the connectivity error', f"got {lines}")
    missing = execute_tool(registry, 'get_metrics', {'service': 'billing'})
    expect.that(missing['found'] is False, 'metrics of an unknown service are reported as not found', f"got {missing}")
    return expect.outcomes


def event_search_is_language_neutral():
    expect = Expect([])
    registry = events_agent().registry
    found = {
        name: [e['event_id'] for e in execute_tool(registry, 'search_events', {'city': name, 'date': '2025-09-20'})['events']]
        for name in ('Munich', 'München', '慕尼黑')
    }
    expect.that(set(map(tuple, found.values())) == {('ev-1',)}, 'every spelling of Munich finds ev-1', f"got {found}")
    return expect.outcomes


SUITE = Suite('components', 'unit', [
    ComponentCheck('memory_write_then_read', memory_write_then_read),
    ComponentCheck('knowledge_base_queries', knowledge_base_queries),
    ComponentCheck('driver_tools_are_plausible', driver_tools_are_plausible),
    ComponentCheck('diagnostic_tools_are_plausible', diagnostic_tools_are_plausible),
    ComponentCheck('event_search_is_language_neutral', event_search_is_language_neutral),
])
