"""Integration layer: the driver assistance agent driven by a scripted mock LLM."""
from __future__ import annotations

from agenttestkit import AgentConfig, Case, CaseCheck, ScriptedText, ScriptedToolUse, SpanAttributes, SpanKind, Suite
from sample_agents import driver_assistance_agent
from sample_agents.driver_assistance import SYSTEM_PROMPT

# ---------------------------------------------------------------------------- #
# Phone number update over two turns                                           #
# ---------------------------------------------------------------------------- #

update_phone_number = Case([
    '<Start conversation><PhoneNr>+555-12345</PhoneNr>',
    'Hi, I am John Doe. My new phone number is +555-98765. Could you please update my data?',
], name='update_phone_number')
update_phone_number.attach_mock_script([
    ScriptedText('Hello John Doe, how can I help you today?'),
    ScriptedToolUse([{'name': 'get_customer_information', 'input': {'phoneNr': '+555-12345'}}]),
    ScriptedToolUse([{'name': 'update_customer_information', 'input': {'ucid': '1', 'phoneNr': '+555-98765'}}]),
    ScriptedText('Done. Your new phone number +555-98765 is saved.'),
])

def check_update_phone_number(expect):
    expect.tool_invocations.to_include('get_customer_information')
    expect.tool_invocations.to_include('update_customer_information').with_input({'ucid': '1', 'phoneNr': '+555-98765'})
    expect.tool_invocations.to_include('update_customer_information').with_output({'updated': True})
    expect.that(expect.turns == 2, 'conversation has two turns', f"got {expect.turns}")

# ---------------------------------------------------------------------------- #
# Follow-up question answered from memory                                      #
# ---------------------------------------------------------------------------- #

memory_follow_up = Case([
    'Please check the status of my car XXX.',
    'And when was that measured?',
], name='memory_follow_up')
memory_follow_up.attach_mock_script([
    ScriptedToolUse([{'name': 'get_vehicle_status', 'input': {'vin': 'XXX'}}]),
    ScriptedText('Your car XXX has no faults.'),
    ScriptedText('The status was measured on 2025-08-28.'),
])

def memory_agent():
    return driver_assistance_agent(config=AgentConfig(system_prompt=SYSTEM_PROMPT, trace_memory=True))

def check_memory_follow_up(expect):
    reads = [s for s in expect.spans(SpanKind.MEMORY_ACCESS) if s.attr(SpanAttributes.MEMORY_OPERATION) == 'read']
    counts = [s.attr(SpanAttributes.MEMORY_MESSAGE_COUNT) for s in reads]
    # turn 1 commits user, tool_use, tool_result and reply
    expect.that(counts == [0, 4], 'second turn starts with the first turn in memory', f"memory read counts: {counts}")
    expect.tool_invocations.times('get_vehicle_status', 1)
    expect.reply.to_contain('2025-08-28')

# ---------------------------------------------------------------------------- #
# Knowledge retrieval                                                          #
# ---------------------------------------------------------------------------- #

winter_tire_advice = Case(['When should I switch to winter tires?'], name='winter_tire_advice')
winter_tire_advice.attach_mock_script([
    ScriptedToolUse([{'name': 'search_knowledge_base', 'input': {'query': 'winter tires'}}]),
    ScriptedText('Winter tires are recommended below 7 degrees Celsius.'),
])

def check_winter_tire_advice(expect):
    match = expect.tool_invocations.to_include('search_knowledge_base')
    match.with_input({'query': 'winter tires'})
    match.with_output({'results': [{'doc_id': 'kb-001', 'title': 'Winter tires'}]})


SUITE = Suite('driver_assistance', 'integration', [
    CaseCheck(update_phone_number, driver_assistance_agent, check_update_phone_number),
    CaseCheck(memory_follow_up, memory_agent, check_memory_follow_up),
    CaseCheck(winter_tire_advice, lambda: driver_assistance_agent(knowledge_base=True), check_winter_tire_advice),
])
