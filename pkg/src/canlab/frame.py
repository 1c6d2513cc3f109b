"""CAN 2.0A frame value type and its `ID#HEXDATA` text syntax.

Only the 11-bit base frame format exists here: no extended IDs, no FD.
The text syntax is the one used by the can-utils tools: hex identifier,
`#`, then an even number of hex digits (`244#0000009999`), or `#R` for a
remote frame with an optional DLC digit (`244#R`, `244#R4`).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from canlab.errors import (
    BadHexError,
    DataLengthError,
    IdRangeError,
    OddDigitCountError,
)

MAX_ID = 0x7FF
MAX_DLC = 8

_TEXT_RE = re.compile(
    r"^(?P<id>[0-9A-Fa-f]{1,3})#(?:(?P<data>[0-9A-Fa-f]*)|[Rr](?P<rdlc>[0-8])?)$"
)


@dataclass(frozen=True)
class CanFrame:
    """One CAN data or remote frame.

    `dlc` always equals the payload length for data frames; remote frames
    carry a DLC (the requested length) but an empty payload.
    """

    can_id: int
    rtr: bool = False
    dlc: int = 0
    data: bytes = field(default=b"")

    def __post_init__(self):
        if not 0 <= self.can_id <= MAX_ID:
            raise ValueError(f"frame id 0x{self.can_id:X} outside 11-bit range")
        if not 0 <= self.dlc <= MAX_DLC:
            raise ValueError(f"dlc {self.dlc} outside 0..8")
        object.__setattr__(self, "data", bytes(self.data))
        if self.rtr:
            if self.data:
                raise ValueError("remote frame must carry no data")
        elif len(self.data) != self.dlc:
            raise ValueError(f"dlc {self.dlc} != data length {len(self.data)}")

    @classmethod
    def data_frame(cls, can_id: int, data: bytes) -> "CanFrame":
        data = bytes(data)
        return cls(can_id, rtr=False, dlc=len(data), data=data)

    @classmethod
    def remote_frame(cls, can_id: int, dlc: int = 0) -> "CanFrame":
        return cls(can_id, rtr=True, dlc=dlc, data=b"")

    def __str__(self) -> str:
        return format_frame_text(self)


def parse_frame_text(text: str) -> CanFrame:
    """Parse ``HEXID#HEXBYTES`` (or ``HEXID#R[dlc]``) into a frame.

    Raises a distinct `FrameTextError` subclass per failure mode: bad hex
    or missing `#`, odd digit count, id beyond 0x7FF, more than 8 bytes.
    """
    if not isinstance(text, str):
        raise BadHexError(f"frame text must be a string, got {type(text).__name__}")
    m = _TEXT_RE.match(text.strip())
    if m is None:
        raise BadHexError(f"malformed frame text {text!r}")
    can_id = int(m.group("id"), 16)
    if can_id > MAX_ID:
        raise IdRangeError(f"id 0x{can_id:X} outside 11-bit range in {text!r}")
    data_part = m.group("data")
    if data_part is None:
        dlc = int(m.group("rdlc") or "0")
        return CanFrame.remote_frame(can_id, dlc)
    if len(data_part) % 2 == 1:
        raise OddDigitCountError(f"odd hex digit count in {text!r}")
    if len(data_part) > 16:
        raise DataLengthError(f"more than 8 data bytes in {text!r}")
    return CanFrame.data_frame(can_id, bytes.fromhex(data_part))


def format_frame_text(frame: CanFrame) -> str:
    """Canonical text form; `parse_frame_text(format_frame_text(f)) == f`.

    Identifier is 3 hex digits zero-padded, data uppercase hex; remote
    frames render as `ID#R` with the DLC digit appended when nonzero.
    """
    if frame.rtr:
        suffix = f"R{frame.dlc}" if frame.dlc else "R"
        return f"{frame.can_id:03X}#{suffix}"
    return f"{frame.can_id:03X}#{frame.data.hex().upper()}"
