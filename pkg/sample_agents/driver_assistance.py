from __future__ import annotations

import threading

from typing import Optional

from agenttestkit.agent import Agent, AgentConfig
from agenttestkit.collector import TraceCollector
from agenttestkit.llm_client import LlmClient
from agenttestkit.tool import tool

from .knowledge import SEARCH_KNOWLEDGE_BASE, KnowledgeBase, knowledge_handler
from .records import Appointment, CustomerRecord, VehicleStatus, index_unique, load_fixture

VERBOSE = False

SYSTEM_PROMPT = (
    "You are a driver assistance agent. You can look up and update customer data, "
    "diagnose the customer's vehicle and book workshop appointments. Use the tools; "
    "never invent customer or vehicle data."
)

# ---------------------------------------------------------------------------- #
# In-memory stores                                                             #
# ---------------------------------------------------------------------------- #

class DriverAssistanceStore:
    """Customers, vehicles and appointment slots of one agent instance.

    Attributes:
        customers (dict[str, CustomerRecord]): By ucid.
        vehicles (dict[str, VehicleStatus]): By vin.
        appointments (dict[str, Appointment]): By appointment id, in slot order.
    """
    def __init__(self, seed_data: Optional[dict] = None):
        seed_data = seed_data or {}
        customers = seed_data.get('customers', load_fixture('customers')['customers'])
        vehicles = seed_data.get('vehicles', load_fixture('vehicles')['vehicles'])
        appointments = seed_data.get('appointments', load_fixture('appointments')['appointments'])

        self.customers = index_unique([CustomerRecord(c) for c in customers], 'ucid', 'customer')
        self.vehicles = index_unique([VehicleStatus(v) for v in vehicles], 'vin', 'vehicle')
        slots = sorted((Appointment(a) for a in appointments), key=lambda a: (a.slot, a.appointment_id))
        self.appointments = index_unique(slots, 'appointment_id', 'appointment')
        self._lock = threading.Lock()

    def __str__(self):
        return f"DriverAssistanceStore(customers={len(self.customers)}, vehicles={len(self.vehicles)}, appointments={len(self.appointments)})"

    def find_customer(self, phoneNr: str) -> Optional[CustomerRecord]:
        return next((c for c in self.customers.values() if c.phoneNr == phoneNr), None)

    def vehicles_of(self, ucid: str) -> list[str]:
        return [v.vin for v in self.vehicles.values() if v.owner_ucid == ucid]

    # tool handlers
    def get_customer_information(self, tool_input: dict) -> dict:
        customer = self.find_customer(tool_input['phoneNr'])
        if customer is None:
            return {'found': False}
        return {'found': True, 'customer': {**customer.to_dict(), 'vins': self.vehicles_of(customer.ucid)}}

    def update_customer_information(self, tool_input: dict) -> dict:
        with self._lock:
            customer = self.customers.get(str(tool_input['ucid']))
            if customer is None:
                return {'updated': False, 'reason': f"unknown ucid {tool_input['ucid']}"}
            phoneNr = tool_input['phoneNr']
            if not phoneNr:
                return {'updated': False, 'reason': 'phoneNr must not be empty'}
            customer.phoneNr = phoneNr
        print(f"[driver_assistance] ucid {customer.ucid} phoneNr -> {phoneNr}") if VERBOSE else None
        return {'updated': True}

    def get_vehicle_status(self, tool_input: dict) -> dict:
        vehicle = self.vehicles.get(tool_input['vin'])
        if vehicle is None:
            return {'found': False}
        return {'found': True, 'status': vehicle.to_dict()}

    def list_available_appointments(self, tool_input: dict) -> dict:
        return {'appointments': [a.to_dict() for a in self.appointments.values() if not a.booked]}

    def book_appointment(self, tool_input: dict) -> dict:
        with self._lock:
            appointment = self.appointments.get(tool_input['appointment_id'])
            if appointment is None:
                return {'booked': False, 'reason': f"unknown appointment {tool_input['appointment_id']}"}
            if appointment.booked:
                return {'booked': False, 'reason': f"appointment {appointment.appointment_id} is already booked"}
            appointment.book(tool_input.get('reason'))
        return {'booked': True, 'appointment': appointment.to_dict()}


# ---------------------------------------------------------------------------- #
# Tools                                                                        #
# ---------------------------------------------------------------------------- #

GET_CUSTOMER_INFORMATION = tool(
    'get_customer_information', 'Look up a customer by phone number',
    {'phoneNr': 'string'}, ['phoneNr'],
)
UPDATE_CUSTOMER_INFORMATION = tool(
    'update_customer_information', "Change a customer's phone number",
    {'ucid': 'string', 'phoneNr': 'string'}, ['ucid', 'phoneNr'],
)
GET_VEHICLE_STATUS = tool(
    'get_vehicle_status', 'Read the latest diagnostic snapshot of a vehicle',
    {'vin': 'string'}, ['vin'],
)
LIST_AVAILABLE_APPOINTMENTS = tool(
    'list_available_appointments', 'List workshop slots that are still free',
)
BOOK_APPOINTMENT = tool(
    'book_appointment', 'Book a free workshop slot',
    {'appointment_id': 'string', 'reason': 'string'}, ['appointment_id'],
)


def driver_assistance_agent(seed_data: Optional[dict] = None, llm: Optional[LlmClient] = None,
                            collector: Optional[TraceCollector] = None, knowledge_base: bool = False,
                            config: Optional[AgentConfig] = None) -> Agent:
    """Build the driver assistance agent with freshly seeded stores.

    Args:
        seed_data (Optional[dict], optional): `customers`, `vehicles` and/or `appointments` lists
            replacing the shipped fixtures.
        llm (Optional[LlmClient], optional): Brain to bind; cases usually bind a MockLlm.
        collector (Optional[TraceCollector], optional): Trace collector to bind.
        knowledge_base (bool, optional): Also register `search_knowledge_base`.
        config (Optional[AgentConfig], optional): Agent settings; the default uses the built-in system prompt.

    Returns:
        The configured Agent; its store is available as `agent.store`.
    """
    store = DriverAssistanceStore(seed_data)
    agent = Agent(config or AgentConfig(system_prompt=SYSTEM_PROMPT), llm=llm, collector=collector, name='driver_assistance')
    agent.register_tool(GET_CUSTOMER_INFORMATION, store.get_customer_information)
    agent.register_tool(UPDATE_CUSTOMER_INFORMATION, store.update_customer_information)
    agent.register_tool(GET_VEHICLE_STATUS, store.get_vehicle_status)
    agent.register_tool(LIST_AVAILABLE_APPOINTMENTS, store.list_available_appointments)
    agent.register_tool(BOOK_APPOINTMENT, store.book_appointment)
    if knowledge_base:
        agent.register_tool(SEARCH_KNOWLEDGE_BASE, knowledge_handler(KnowledgeBase()))
    agent.store = store
    return agent
