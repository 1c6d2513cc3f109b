"""Bit-exact CAN 2.0A frame encoding and decoding.

Wire layout (before stuffing):

    SOF | ID[10..0] | RTR | r1 r0 | DLC[3..0] | data bytes msb-first |
    CRC[14..0] | CRC delim | ACK slot | ACK delim | EOF x7

Dominant is 0, recessive is 1. Stuffing covers SOF through the CRC
sequence; the delimiter, ACK field and EOF are transmitted unstuffed.
A zero-payload frame is 44 bits before stuffing.
"""

from __future__ import annotations

import numpy as np

from canlab import _kernels
from canlab.errors import (
    BitStreamError,
    CrcMismatchError,
    StuffingViolationError,
    TruncatedStreamError,
)
from canlab.frame import CanFrame

BitStream = np.ndarray  # 1-D uint8 array of 0/1 values

DOMINANT = 0
RECESSIVE = 1

_HEADER_BITS = 19          # SOF + ID(11) + RTR + r1 r0 + DLC(4)
_CRC_BITS = 15
_TAIL_BITS = 10            # CRC delim + ACK slot + ACK delim + EOF(7)


def as_bits(bits) -> BitStream:
    """Normalize any 0/1 sequence into the canonical uint8 array."""
    arr = np.asarray(bits, dtype=np.uint8).ravel()
    if arr.size and arr.max(initial=0) > 1:
        raise ValueError("bit stream values must be 0 or 1")
    return arr


def _int_to_bits(value: int, width: int) -> list[int]:
    return [(value >> k) & 1 for k in range(width - 1, -1, -1)]


def _bits_to_int(bits: np.ndarray) -> int:
    value = 0
    for b in bits.tolist():
        value = (value << 1) | b
    return value


def crc15(bits) -> int:
    """CRC-15 of an unstuffed SOF-through-data prefix (generator 0x4599,
    initial value 0)."""
    return int(_kernels.active.crc15(as_bits(bits)))


def stuff_bits(bits) -> BitStream:
    """Insert a complement bit after every run of five identical bits."""
    return _kernels.active.stuff(as_bits(bits))


def unstuff_bits(bits) -> BitStream:
    """Inverse of `stuff_bits`; raises on a six-bit run."""
    arr = as_bits(bits)
    out, n, _consumed, err = _kernels.active.unstuff_limit(arr, -1)
    if err >= 0:
        raise StuffingViolationError(f"six identical bits at stuffed index {err}")
    return out[:n].copy()


def encode_bits(frame: CanFrame) -> BitStream:
    """Encode a frame into its full stuffed bit stream."""
    head = [DOMINANT]                       # SOF
    head += _int_to_bits(frame.can_id, 11)
    head.append(1 if frame.rtr else 0)
    head += [DOMINANT, DOMINANT]            # reserved r1 r0
    head += _int_to_bits(frame.dlc, 4)
    for byte in frame.data:
        head += _int_to_bits(byte, 8)
    prefix = np.array(head, dtype=np.uint8)
    crc = _kernels.active.crc15(prefix)
    core = np.concatenate([prefix, np.array(_int_to_bits(crc, 15), dtype=np.uint8)])
    stuffed = _kernels.active.stuff(core)
    tail = np.full(_TAIL_BITS, RECESSIVE, dtype=np.uint8)
    return np.concatenate([stuffed, tail])


def decode_bits(bits) -> CanFrame:
    """Decode a stream produced by `encode_bits`, verifying CRC.

    Raises `StuffingViolationError`, `CrcMismatchError`,
    `TruncatedStreamError` or `BitStreamError` (bad SOF / DLC / framing).
    """
    arr = as_bits(bits)
    kern = _kernels.active

    out, n, _consumed, err = kern.unstuff_limit(arr, _HEADER_BITS)
    if err >= 0:
        raise StuffingViolationError(f"six identical bits at stuffed index {err}")
    if n < _HEADER_BITS:
        raise TruncatedStreamError(f"{n} header bits, need {_HEADER_BITS}")
    header = out[:n]
    if header[0] != DOMINANT:
        raise BitStreamError("stream does not start with a dominant SOF")
    can_id = _bits_to_int(header[1:12])
    rtr = bool(header[12])
    dlc = _bits_to_int(header[15:19])
    if dlc > 8:
        raise BitStreamError(f"DLC {dlc} exceeds 8")
    data_len = 0 if rtr else dlc

    core_len = _HEADER_BITS + 8 * data_len + _CRC_BITS
    out, n, consumed, err = kern.unstuff_limit(arr, core_len)
    if err >= 0:
        raise StuffingViolationError(f"six identical bits at stuffed index {err}")
    if n < core_len:
        raise TruncatedStreamError(f"{n} core bits, need {core_len}")
    core = out[:n]

    received = _bits_to_int(core[core_len - _CRC_BITS:])
    computed = kern.crc15(core[:core_len - _CRC_BITS])
    if received != computed:
        raise CrcMismatchError(f"crc 0x{received:04X} != computed 0x{computed:04X}")

    tail = arr[consumed:]
    if tail.shape[0] < _TAIL_BITS:
        raise TruncatedStreamError(f"{tail.shape[0]} tail bits, need {_TAIL_BITS}")
    if tail.shape[0] > _TAIL_BITS:
        raise BitStreamError("trailing bits after end of frame")
    # ACK slot (index 1) may have been overwritten dominant by a receiver;
    # every other tail bit must be recessive.
    if tail[0] != RECESSIVE or not np.all(tail[2:] == RECESSIVE):
        raise BitStreamError("malformed delimiter or end-of-frame field")

    data = bytes(
        _bits_to_int(core[_HEADER_BITS + 8 * k:_HEADER_BITS + 8 * (k + 1)])
        for k in range(data_len)
    )
    return CanFrame(can_id, rtr=rtr, dlc=dlc, data=data)
