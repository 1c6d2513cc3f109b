"""In-process virtual CAN bus.

Replaces the OS `vcan0` interface: nodes attach, transmit, and every
attached node (including the sender) observes the same totally-ordered
multicast event sequence. Contention between pending frames is resolved
per discrete arbitration slot: the dominant-first comparison over the
11-bit identifier and the RTR bit, i.e. lowest ID wins and a data frame
beats a remote frame with the same ID.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from canlab.errors import DetachedNodeError
from canlab.frame import CanFrame

EventCallback = Callable[["BusEvent"], None]


@dataclass(frozen=True)
class NodeHandle:
    """Identity of an attached node; unique per bus for its lifetime."""

    node_id: int
    name: str


@dataclass(frozen=True)
class BusEvent:
    """One delivered frame, stamped with bus time and its sender."""

    frame: CanFrame
    timestamp: float
    sender: NodeHandle


def arbitrate(pending: Iterable[tuple[NodeHandle, CanFrame]]) -> tuple[NodeHandle, CanFrame]:
    """Pick the arbitration winner among simultaneously pending frames.

    Equivalent to comparing the 12-bit (ID, RTR) arbitration field
    bitwise with dominant=0 winning at the first difference. Identical
    fields from different nodes tie-break by attach order.
    """
    contenders = list(pending)
    if not contenders:
        raise ValueError("arbitrate() requires at least one pending frame")
    return min(contenders, key=lambda nf: (nf[1].can_id, nf[1].rtr, nf[0].node_id))


class _NodeState:
    __slots__ = ("handle", "inbox", "callback")

    def __init__(self, handle: NodeHandle, callback: Optional[EventCallback]):
        self.handle = handle
        self.callback = callback
        # Inbox only for poll-style consumers; callback nodes would never
        # drain it.
        self.inbox: Optional[deque[BusEvent]] = None if callback else deque()


class VirtualBus:
    """Shared medium with a discrete-slot scheduler.

    `step(dt)` advances the simulated clock and runs one arbitration per
    elapsed slot (default 1000 slots/second). Losing frames stay queued;
    per-sender FIFO order is preserved. Thread-safe: any thread may
    transmit while another steps.
    """

    def __init__(self, name: str = "vcan0", slot_rate: float = 1000.0):
        if slot_rate <= 0:
            raise ValueError("slot_rate must be positive")
        self.name = name
        self.slot_rate = float(slot_rate)
        self._lock = threading.RLock()
        self._nodes: dict[int, _NodeState] = {}
        self._pending: dict[int, deque[CanFrame]] = {}
        self._next_node_id = 1
        self._slot_index = 0
        self._slot_accum = 0.0
        self._now = 0.0
        self._transmitted = 0
        self._delivered = 0

    # -- attachment -----------------------------------------------------

    def attach(self, name: str, on_event: Optional[EventCallback] = None) -> NodeHandle:
        """Attach a node; it observes every subsequent delivery."""
        with self._lock:
            handle = NodeHandle(self._next_node_id, name)
            self._next_node_id += 1
            self._nodes[handle.node_id] = _NodeState(handle, on_event)
            self._pending[handle.node_id] = deque()
            return handle

    def detach(self, node: NodeHandle) -> None:
        with self._lock:
            self._nodes.pop(node.node_id, None)
            self._pending.pop(node.node_id, None)

    def is_attached(self, node: NodeHandle) -> bool:
        with self._lock:
            return node.node_id in self._nodes

    # -- traffic --------------------------------------------------------

    def transmit(self, node: NodeHandle, frame: CanFrame) -> None:
        """Queue a frame for the next arbitration slot."""
        if not isinstance(frame, CanFrame):
            raise TypeError("transmit() expects a CanFrame")
        with self._lock:
            if node.node_id not in self._nodes:
                raise DetachedNodeError(f"node {node.name!r} is not attached")
            self._pending[node.node_id].append(frame)
            self._transmitted += 1

    def poll(self, node: NodeHandle) -> list[BusEvent]:
        """Drain and return the node's inbox (poll-style nodes only)."""
        with self._lock:
            state = self._nodes.get(node.node_id)
            if state is None:
                raise DetachedNodeError(f"node {node.name!r} is not attached")
            if state.inbox is None:
                return []
            events = list(state.inbox)
            state.inbox.clear()
            return events

    def step(self, dt: float) -> list[BusEvent]:
        """Advance the clock by `dt` seconds, delivering one arbitration
        winner per elapsed slot. Returns the delivered events in order."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        delivered: list[BusEvent] = []
        with self._lock:
            self._now += dt
            self._slot_accum += dt * self.slot_rate
            nslots = int(self._slot_accum)
            self._slot_accum -= nslots
            for _ in range(nslots):
                self._slot_index += 1
                if not any(q for q in self._pending.values()):
                    continue
                contenders = [
                    (self._nodes[nid].handle, q[0])
                    for nid, q in self._pending.items()
                    if q
                ]
                winner_node, winner_frame = arbitrate(contenders)
                self._pending[winner_node.node_id].popleft()
                event = BusEvent(winner_frame, self._slot_index / self.slot_rate, winner_node)
                self._deliver(event)
                delivered.append(event)
        return delivered

    def drain(self, slot_budget: int = 1_000_000) -> list[BusEvent]:
        """Step until no frame is pending (manual-clock mode helper)."""
        delivered: list[BusEvent] = []
        while self.pending_count() and slot_budget > 0:
            chunk = min(slot_budget, 1024)
            delivered.extend(self.step(chunk / self.slot_rate))
            slot_budget -= chunk
        return delivered

    def _deliver(self, event: BusEvent) -> None:
        self._delivered += 1
        for state in list(self._nodes.values()):
            if state.inbox is not None:
                state.inbox.append(event)
            if state.callback is not None:
                state.callback(event)

    # -- introspection ----------------------------------------------------

    @property
    def now(self) -> float:
        with self._lock:
            return self._now

    def pending_count(self) -> int:
        with self._lock:
            return sum(len(q) for q in self._pending.values())

    @property
    def frames_transmitted(self) -> int:
        return self._transmitted

    @property
    def frames_delivered(self) -> int:
        return self._delivered


class RealClock:
    """Wall-clock pacing for live runs."""

    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class SimClock:
    """Deterministic pacing: sleeping advances the bus instead of waiting.

    Gives fully synchronous, reproducible floods and replays in tests.
    """

    def __init__(self, bus: VirtualBus):
        self.bus = bus

    def now(self) -> float:
        return self.bus.now

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self.bus.step(seconds)


class BusPump:
    """Background thread stepping a bus in near real time."""

    def __init__(self, bus: VirtualBus, tick: float = 0.005):
        self.bus = bus
        self.tick = tick
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    def start(self) -> "BusPump":
        if self._thread is not None:
            return self
        self._thread = threading.Thread(target=self._run, name="bus-pump", daemon=True)
        self._thread.start()
        return self

    def _run(self) -> None:
        last = time.monotonic()
        while not self._stop.is_set():
            time.sleep(self.tick)
            now = time.monotonic()
            if now > last:
                self.bus.step(now - last)
                last = now

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None
