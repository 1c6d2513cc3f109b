"""Simulated victim vehicle: body computer and instrument cluster.

Frame semantics reverse-engineered from the simulator's traffic:

    ID    DLC  payload                      device
    0x244  5   00 00 00 HH LL (raw speed)   tachymeter
    0x188  3   0B 00 00 (bit0=L, bit1=R)    blinkers
    0x19B  3   00 00 0M (mask 1/2/4/8)      doors

Raw speed is big-endian over the last two bytes; 0x015D reads as 100 MPH
and the gauge face clamps at 240 MPH. Every other identifier is ignored
by the cluster (receiver-side filtering).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

from canlab.bus import NodeHandle, VirtualBus
from canlab.frame import CanFrame

TACHYMETER_ID = 0x244
BLINKERS_ID = 0x188
DOORS_ID = 0x19B

TACHYMETER_DLC = 5
BLINKERS_DLC = 3
DOORS_DLC = 3

SPEED_RAW_100MPH = 0x015D  # raw value shown as 100 MPH
SPEED_DISPLAY_MAX = 240.0  # gauge face maximum
ACCEL_STEP_DEFAULT = 25    # raw units per button press (~7.2 MPH)


def speed_mph(raw: int) -> float:
    """Displayed MPH for a raw tachymeter value: linear through
    (0x015D, 100), clamped to the 240 gauge maximum."""
    if not 0 <= raw <= 0xFFFF:
        raise ValueError(f"raw speed {raw} outside 0..0xFFFF")
    return min(SPEED_DISPLAY_MAX, raw * 100.0 / SPEED_RAW_100MPH)


@dataclass(frozen=True)
class VehicleState:
    """Instrument-cluster snapshot; immutable, safe to share."""

    speed_raw: int = 0
    doors: tuple[bool, bool, bool, bool] = (False, False, False, False)
    blinker_left: bool = False
    blinker_right: bool = False

    @property
    def speed_display_mph(self) -> float:
        return speed_mph(self.speed_raw)


@dataclass(frozen=True)
class Accelerate:
    pass


@dataclass(frozen=True)
class DoorToggle:
    index: int

    def __post_init__(self):
        if not 0 <= self.index <= 3:
            raise ValueError(f"door index {self.index} outside 0..3")


@dataclass(frozen=True)
class BlinkerSet:
    side: str  # "left" | "right"
    on: bool

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"blinker side must be left or right, got {self.side!r}")


ControlAction = Union[Accelerate, DoorToggle, BlinkerSet]


def apply_frame(state: VehicleState, frame: CanFrame) -> VehicleState:
    """Fold one frame into the cluster state.

    Unknown identifiers (or a known identifier with the wrong DLC) leave
    the state untouched. Door frames toggle the addressed lock.
    """
    if frame.rtr:
        return state
    if frame.can_id == TACHYMETER_ID and frame.dlc == TACHYMETER_DLC:
        raw = (frame.data[3] << 8) | frame.data[4]
        return replace(state, speed_raw=raw)
    if frame.can_id == BLINKERS_ID and frame.dlc == BLINKERS_DLC:
        bits = frame.data[0]
        return replace(
            state,
            blinker_left=bool(bits & 0x01),
            blinker_right=bool(bits & 0x02),
        )
    if frame.can_id == DOORS_ID and frame.dlc == DOORS_DLC:
        mask = frame.data[2]
        doors = tuple(
            (not locked) if (mask >> i) & 1 else locked
            for i, locked in enumerate(state.doors)
        )
        return replace(state, doors=doors)
    return state


def fold_frames(frames, initial: Optional[VehicleState] = None) -> VehicleState:
    """Offline fold of `apply_frame`, the oracle for replay determinism."""
    state = initial or VehicleState()
    for frame in frames:
        state = apply_frame(state, frame)
    return state


class BodyComputer:
    """Driver-input side: each actuation emits one frame on the bus.

    Repeated accelerate presses raise the commanded raw speed by
    `accel_step` and cap it at 0x015D (100 MPH); pressing past the cap
    still emits a frame with the unchanged value.
    """

    def __init__(self, bus: VirtualBus, accel_step: int = ACCEL_STEP_DEFAULT,
                 name: str = "body-computer"):
        self.bus = bus
        self.accel_step = accel_step
        self._raw = 0
        self._left = False
        self._right = False
        self._node = bus.attach(name, on_event=lambda _event: None)

    @property
    def node(self) -> NodeHandle:
        return self._node

    @property
    def commanded_raw(self) -> int:
        return self._raw

    def actuate(self, action: ControlAction) -> CanFrame:
        """Emit the frame for one control actuation and return it."""
        if isinstance(action, Accelerate):
            self._raw = min(SPEED_RAW_100MPH, self._raw + self.accel_step)
            data = b"\x00\x00\x00" + self._raw.to_bytes(2, "big")
            frame = CanFrame.data_frame(TACHYMETER_ID, data)
        elif isinstance(action, BlinkerSet):
            if action.side == "left":
                self._left = action.on
            else:
                self._right = action.on
            bits = (0x01 if self._left else 0) | (0x02 if self._right else 0)
            frame = CanFrame.data_frame(BLINKERS_ID, bytes([bits, 0, 0]))
        elif isinstance(action, DoorToggle):
            frame = CanFrame.data_frame(DOORS_ID, bytes([0, 0, 1 << action.index]))
        else:
            raise TypeError(f"unknown control action {action!r}")
        self.bus.transmit(self._node, frame)
        return frame


class InstrumentCluster:
    """Bus-fed instrument cluster: consumes every event in delivery order
    and folds it into an immutable `VehicleState`.

    Listeners run synchronously on each state *change* with the new
    snapshot; reads of `.state` are safe from any thread.
    """

    def __init__(self, bus: VirtualBus, initial: Optional[VehicleState] = None,
                 name: str = "instrument-cluster"):
        self._state = initial or VehicleState()
        self._listeners: list[Callable[[VehicleState], None]] = []
        self._mutex = threading.Lock()
        self._node = bus.attach(name, on_event=self._on_event)

    @property
    def node(self) -> NodeHandle:
        return self._node

    @property
    def state(self) -> VehicleState:
        return self._state

    def add_listener(self, listener: Callable[[VehicleState], None]) -> None:
        with self._mutex:
            self._listeners.append(listener)

    def _on_event(self, event) -> None:
        new_state = apply_frame(self._state, event.frame)
        if new_state == self._state:
            return
        self._state = new_state
        with self._mutex:
            listeners = list(self._listeners)
        for listener in listeners:
            listener(new_state)
