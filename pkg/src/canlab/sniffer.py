"""Traffic monitor and replayable logs.

The live table keeps one row per identifier with the classic sniffer
columns: last timestamp (seconds), inter-arrival interval (milliseconds,
per identifier), DLC and last payload. Logs are candump-compatible:

    (12.000001) vcan0 244#0000009999

one record per LF-terminated ASCII line, timestamps written with exactly
six fractional digits.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Union

from canlab.bus import BusEvent, SimClock, VirtualBus
from canlab.errors import FrameTextError, LogFormatError
from canlab.frame import CanFrame, format_frame_text, parse_frame_text

_LOG_LINE_RE = re.compile(r"^\((?P<ts>\d+\.\d{1,9})\)\s+(?P<iface>\S+)\s+(?P<frame>\S+)$")


@dataclass
class SnifferRow:
    """Live statistics for one identifier."""

    identifier: int
    timestamp_s: float
    interval_ms: Optional[float]  # absent until the second frame
    dlc: int
    data: bytes

    def formatted(self) -> str:
        interval = f"{self.interval_ms:9.1f}" if self.interval_ms is not None else " " * 9
        ident = f"{self.identifier:03X}"
        return (
            f"{self.timestamp_s:12.6f} {interval} {ident:>5} "
            f"{self.dlc}  {self.data.hex().upper()}"
        )


class SnifferTable:
    """Per-identifier row table fed by bus events (single consumer)."""

    COLUMNS = ("Timestamp", "Interval", "Identifier", "DLC", "Data")

    def __init__(self):
        self._rows: dict[int, SnifferRow] = {}

    def observe(self, event: BusEvent) -> SnifferRow:
        frame = event.frame
        previous = self._rows.get(frame.can_id)
        interval = None
        if previous is not None:
            interval = (event.timestamp - previous.timestamp_s) * 1000.0
        row = SnifferRow(frame.can_id, event.timestamp, interval, frame.dlc, frame.data)
        self._rows[frame.can_id] = row
        return row

    def rows(self) -> list[SnifferRow]:
        """Snapshot sorted by identifier."""
        return [self._rows[key] for key in sorted(self._rows)]

    def row(self, identifier: int) -> Optional[SnifferRow]:
        return self._rows.get(identifier)

    def __len__(self) -> int:
        return len(self._rows)


@dataclass(frozen=True)
class LogRecord:
    """One persisted traffic record."""

    timestamp_s: float
    interface_name: str
    frame: CanFrame


def format_log_line(record: LogRecord) -> str:
    return f"({record.timestamp_s:.6f}) {record.interface_name} {format_frame_text(record.frame)}"


def parse_log_line(line: str, lineno: int = 0) -> LogRecord:
    m = _LOG_LINE_RE.match(line.strip())
    if m is None:
        raise LogFormatError(f"line {lineno}: malformed log line {line.strip()!r}")
    try:
        frame = parse_frame_text(m.group("frame"))
    except FrameTextError as exc:
        raise LogFormatError(f"line {lineno}: {exc}") from exc
    return LogRecord(float(m.group("ts")), m.group("iface"), frame)


def write_log(events: Iterable[BusEvent], sink: Union[str, os.PathLike, TextIO],
              interface_name: str = "vcan0") -> int:
    """Persist time-ordered events; returns the record count."""
    own = isinstance(sink, (str, os.PathLike))
    out: TextIO = open(sink, "w", encoding="ascii") if own else sink
    try:
        count = 0
        for event in events:
            record = LogRecord(event.timestamp, interface_name, event.frame)
            out.write(format_log_line(record) + "\n")
            count += 1
        return count
    finally:
        if own:
            out.close()


def read_log(source: Union[str, os.PathLike, TextIO]) -> list[LogRecord]:
    """Parse a log back into records; rejects malformed lines (with line
    number) and timestamp regressions."""
    own = isinstance(source, (str, os.PathLike))
    inp: TextIO = open(source, "r", encoding="ascii") if own else source
    try:
        records: list[LogRecord] = []
        last_ts = None
        for lineno, line in enumerate(inp, start=1):
            if not line.strip():
                continue
            record = parse_log_line(line, lineno)
            if last_ts is not None and record.timestamp_s < last_ts:
                raise LogFormatError(
                    f"line {lineno}: timestamp {record.timestamp_s:.6f} "
                    f"regresses below {last_ts:.6f}"
                )
            last_ts = record.timestamp_s
            records.append(record)
        return records
    finally:
        if own:
            inp.close()


def replay(records: Iterable[LogRecord], bus: VirtualBus, time_scale: float = 1.0,
           clock=None, node=None) -> int:
    """Retransmit records onto the bus preserving inter-record delays
    scaled by `time_scale` (0 = as fast as possible).

    Defaults to the deterministic `SimClock`; pass a `RealClock` to pace
    against the wall. Returns the number of frames transmitted.
    """
    if time_scale < 0:
        raise ValueError("time_scale must be >= 0")
    clock = clock or SimClock(bus)
    own_node = node is None
    if own_node:
        node = bus.attach("replay", on_event=lambda _event: None)
    try:
        count = 0
        previous_ts = None
        for record in records:
            if previous_ts is not None and time_scale > 0:
                clock.sleep((record.timestamp_s - previous_ts) * time_scale)
            previous_ts = record.timestamp_s
            bus.transmit(node, record.frame)
            count += 1
        if isinstance(clock, SimClock):
            bus.drain()
        return count
    finally:
        if own_node:
            bus.detach(node)
