"""Software-only CAN bus laboratory.

A bit-accurate CAN 2.0A frame codec, an in-process virtual bus with
arbitration, a simulated vehicle (tachymeter, doors, blinkers), a traffic
sniffer with candump-style logs, and an attack toolkit for one-shot
injection and map-driven frame flooding.
"""

from canlab.frame import CanFrame, format_frame_text, parse_frame_text
from canlab.bus import BusEvent, NodeHandle, VirtualBus
from canlab.vehicle import BodyComputer, InstrumentCluster, VehicleState, speed_mph

__version__ = "0.1.0"

__all__ = [
    "CanFrame",
    "parse_frame_text",
    "format_frame_text",
    "VirtualBus",
    "NodeHandle",
    "BusEvent",
    "VehicleState",
    "BodyComputer",
    "InstrumentCluster",
    "speed_mph",
]
