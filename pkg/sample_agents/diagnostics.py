from __future__ import annotations

import copy

from typing import Optional

from agenttestkit.agent import Agent, AgentConfig
from agenttestkit.collector import TraceCollector
from agenttestkit.llm_client import LlmClient
from agenttestkit.tool import tool

from .records import load_fixture

DEFAULT_INCIDENT = 'ingress_rule_removed'

SYSTEM_PROMPT = (
    "You are a root cause analysis agent for a small service deployment. Always call "
    "get_architecture first to understand how the services depend on each other, then "
    "inspect logs and metrics of the affected services."
)


class IncidentWorld:
    """Read-only view of the service graph and the logs and metrics of one scripted incident."""
    def __init__(self, seed_incident: str = DEFAULT_INCIDENT, fixture: Optional[dict] = None):
        fixture = fixture if fixture is not None else load_fixture('diagnostics')
        incidents = fixture['incidents']
        if seed_incident not in incidents:
            raise ValueError(f"unknown incident {seed_incident!r} (known: {', '.join(sorted(incidents))})")
        self.incident = seed_incident
        self.architecture = fixture['architecture']
        self.logs = incidents[seed_incident].get('logs', {})
        self.metrics = incidents[seed_incident].get('metrics', {})
        self.summary = incidents[seed_incident].get('summary', '')

    def __str__(self):
        return f"IncidentWorld(incident={self.incident}, services={len(self.architecture['services'])})"

    def get_architecture(self, tool_input: dict) -> dict:
        return copy.deepcopy(self.architecture)

    def get_logs(self, tool_input: dict) -> dict:
        service = tool_input['service']
        if service not in self.logs:
            return {'service': service, 'found': False, 'lines': []}
        return {'service': service, 'found': True, 'lines': list(self.logs[service])}

    def get_metrics(self, tool_input: dict) -> dict:
        service = tool_input['service']
        if service not in self.metrics:
            return {'service': service, 'found': False, 'metrics': {}}
        return {'service': service, 'found': True, 'metrics': dict(self.metrics[service])}


GET_ARCHITECTURE = tool('get_architecture', 'Return the service dependency graph of the deployment')
GET_LOGS = tool('get_logs', 'Return recent log lines of one service', {'service': 'string'}, ['service'])
GET_METRICS = tool('get_metrics', 'Return current metrics of one service', {'service': 'string'}, ['service'])


def diagnostic_agent(seed_incident: str = DEFAULT_INCIDENT, llm: Optional[LlmClient] = None,
                     collector: Optional[TraceCollector] = None, config: Optional[AgentConfig] = None) -> Agent:
    """Build the root cause analysis agent for a scripted incident.

    Args:
        seed_incident (str, optional): Incident from `fixtures/diagnostics.json`.
        llm (Optional[LlmClient], optional): Brain to bind.
        collector (Optional[TraceCollector], optional): Trace collector to bind.
        config (Optional[AgentConfig], optional): Agent settings.

    Returns:
        The configured Agent; the incident is available as `agent.world`.

    Raises:
        ValueError: Unknown incident.
    """
    world = IncidentWorld(seed_incident)
    agent = Agent(config or AgentConfig(system_prompt=SYSTEM_PROMPT), llm=llm, collector=collector, name='diagnostics')
    agent.register_tool(GET_ARCHITECTURE, world.get_architecture)
    agent.register_tool(GET_LOGS, world.get_logs)
    agent.register_tool(GET_METRICS, world.get_metrics)
    agent.world = world
    return agent
