"""Composition root: one bus, one vehicle, one sniffer table."""

from __future__ import annotations

from canlab.bus import BusPump, SimClock, VirtualBus
from canlab.sniffer import SnifferTable
from canlab.vehicle import BodyComputer, InstrumentCluster


class Lab:
    """A complete simulated victim wired onto one virtual bus.

    Manual-clock by default (drive with `bus.step` / `SimClock`); call
    `start_pump()` for live wall-clock operation.
    """

    def __init__(self, interface: str = "vcan0", slot_rate: float = 1000.0,
                 accel_step: int | None = None):
        self.bus = VirtualBus(interface, slot_rate=slot_rate)
        kwargs = {} if accel_step is None else {"accel_step": accel_step}
        self.body = BodyComputer(self.bus, **kwargs)
        self.cluster = InstrumentCluster(self.bus)
        self.sniffer = SnifferTable()
        self._sniffer_node = self.bus.attach("sniffer", on_event=self.sniffer.observe)
        self._pump: BusPump | None = None

    @property
    def interface(self) -> str:
        return self.bus.name

    def sim_clock(self) -> SimClock:
        return SimClock(self.bus)

    def start_pump(self, tick: float = 0.005) -> None:
        if self._pump is None:
            self._pump = BusPump(self.bus, tick).start()

    def stop_pump(self) -> None:
        if self._pump is not None:
            self._pump.stop()
            self._pump = None
