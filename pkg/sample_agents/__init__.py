from __future__ import annotations

from .records import CustomerRecord, VehicleStatus, Appointment, load_fixture
from .knowledge import KnowledgeBase
from .driver_assistance import DriverAssistanceStore, driver_assistance_agent
from .diagnostics import IncidentWorld, diagnostic_agent
from .events import EventCalendar, events_agent

# agent name used in case files -> factory
AGENT_FACTORIES = {
    'driver_assistance': driver_assistance_agent,
    'diagnostics': diagnostic_agent,
    'events': events_agent,
}

__all__ = [
    # records
    'CustomerRecord',
    'VehicleStatus',
    'Appointment',
    'load_fixture',

    # agents
    'KnowledgeBase',
    'DriverAssistanceStore',
    'driver_assistance_agent',
    'IncidentWorld',
    'diagnostic_agent',
    'EventCalendar',
    'events_agent',
    'AGENT_FACTORIES',
]
