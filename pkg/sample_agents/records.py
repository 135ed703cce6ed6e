from __future__ import annotations

import json
import os

from dataclasses import dataclass, field
from typing import Optional

FIXTURE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'fixtures')

def load_fixture(name: str) -> dict:
    """Load `fixtures/<name>.json` shipped with the sample agents."""
    with open(os.path.join(FIXTURE_DIR, f"{name}.json"), encoding='utf-8') as fh:
        return json.load(fh)


@dataclass
class CustomerRecord:
    """ Class representing a customer of the driver assistance service.

    Attributes:
        ucid (str): Unique customer id
        name (str): Full name
        phoneNr (str): Phone number in `+555-NNNNN` form
    """
    ucid: str
    name: str
    phoneNr: str

    def __init__(self, c: dict):
        self.ucid = str(c.get('ucid') or '')
        self.name = c.get('name', '')
        self.phoneNr = c.get('phoneNr') or ''
        if not self.ucid:
            raise ValueError(f"CustomerRecord requires a ucid. Got: {c}")
        if not self.phoneNr:
            raise ValueError(f"CustomerRecord {self.ucid} requires a non-empty phoneNr.")

    def __str__(self):
        return f"CustomerRecord(ucid={self.ucid}, name={self.name}, phoneNr={self.phoneNr})"

    def to_dict(self) -> dict:
        return {'ucid': self.ucid, 'name': self.name, 'phoneNr': self.phoneNr}


@dataclass
class VehicleStatus:
    """ Class representing the last diagnostic snapshot of a vehicle.

    Attributes:
        vin (str): Vehicle identification number
        lastUpdate (str): ISO-8601 date of the snapshot
        fields (dict): Diagnostic values (battery, tirePressure, faults)
        owner_ucid (Optional[str]): Customer owning the vehicle
    """
    vin: str
    lastUpdate: str
    fields: dict = field(default_factory=dict)
    owner_ucid: Optional[str] = None

    def __init__(self, v: dict):
        self.vin = v.get('vin') or ''
        if not self.vin:
            raise ValueError(f"VehicleStatus requires a vin. Got: {v}")
        self.lastUpdate = v.get('lastUpdate', '')
        self.fields = dict(v.get('fields', {}))
        self.owner_ucid = v.get('owner_ucid')

    def __str__(self):
        return f"VehicleStatus(vin={self.vin}, lastUpdate={self.lastUpdate}, fields={sorted(self.fields)})"

    def to_dict(self) -> dict:
        return {'vin': self.vin, 'lastUpdate': self.lastUpdate, **self.fields}


@dataclass
class Appointment:
    """ Class representing a workshop appointment slot.

    Attributes:
        appointment_id (str): Unique slot id
        slot (str): ISO-8601 date and time of the slot
        weekday (str): Day name of the slot
        reason (Optional[str]): Reason given when booking
        booked (bool): Whether the slot is taken
    """
    appointment_id: str
    slot: str
    weekday: str = ''
    reason: Optional[str] = None
    booked: bool = False

    def __init__(self, a: dict):
        self.appointment_id = a.get('appointment_id') or ''
        if not self.appointment_id:
            raise ValueError(f"Appointment requires an appointment_id. Got: {a}")
        self.slot = a.get('slot', '')
        self.weekday = a.get('weekday', '')
        self.reason = a.get('reason')
        self.booked = bool(a.get('booked', False))

    def __str__(self):
        return f"Appointment(appointment_id={self.appointment_id}, slot={self.slot}, booked={self.booked})"

    def book(self, reason: Optional[str]) -> None:
        if self.booked:
            raise ValueError(f"appointment {self.appointment_id} is already booked")
        self.booked = True
        self.reason = reason

    def to_dict(self) -> dict:
        d = {'appointment_id': self.appointment_id, 'slot': self.slot, 'weekday': self.weekday, 'booked': self.booked}
        if self.reason is not None:
            d['reason'] = self.reason
        return d


def index_unique(records: list, key: str, kind: str) -> dict:
    """Index records by `key`, rejecting duplicates."""
    index = {}
    for r in records:
        k = getattr(r, key)
        if k in index:
            raise ValueError(f"duplicate {kind} {key} {k!r}")
        index[k] = r
    return index
