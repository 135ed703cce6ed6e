from __future__ import annotations

import unicodedata

from typing import Optional

from agenttestkit.agent import Agent, AgentConfig
from agenttestkit.collector import TraceCollector
from agenttestkit.llm_client import LlmClient
from agenttestkit.tool import tool

from .records import load_fixture

SYSTEM_PROMPT = (
    "You help users find events in a city. Call search_events with the city name "
    "as the user wrote it and answer in the user's language."
)


def normalize_city(name: str) -> str:
    return unicodedata.normalize('NFC', name or '').strip().casefold()


class EventCalendar:
    """Events by canonical city, searchable by any localized city name."""
    def __init__(self, fixture: Optional[dict] = None):
        fixture = fixture if fixture is not None else load_fixture('events')
        self.aliases = {
            normalize_city(alias): city
            for city, names in fixture['cities'].items()
            for alias in [city, *names]
        }
        self.events = sorted(fixture['events'], key=lambda e: (e['date'], e['event_id']))

    def __str__(self):
        return f"EventCalendar(cities={len(set(self.aliases.values()))}, events={len(self.events)})"

    def search_events(self, tool_input: dict) -> dict:
        city = self.aliases.get(normalize_city(tool_input['city']))
        if city is None:
            return {'city': None, 'events': []}
        date = tool_input.get('date')
        events = [e for e in self.events if e['city'] == city and (not date or e['date'] == date)]
        return {'city': city, 'events': [dict(e) for e in events]}


SEARCH_EVENTS = tool(
    'search_events', 'Find events in a city, optionally on one ISO date',
    {'city': 'string', 'date': 'string'}, ['city'],
)


def events_agent(llm: Optional[LlmClient] = None, collector: Optional[TraceCollector] = None,
                 config: Optional[AgentConfig] = None) -> Agent:
    """Build the events agent used by the multi-language suites."""
    calendar = EventCalendar()
    agent = Agent(config or AgentConfig(system_prompt=SYSTEM_PROMPT), llm=llm, collector=collector, name='events')
    agent.register_tool(SEARCH_EVENTS, calendar.search_events)
    agent.calendar = calendar
    return agent
