"""Minimal RFC 6455 WebSocket server framing.

Just enough for the control protocol's browser endpoint: text messages,
fragment reassembly, ping/pong, close handshake. Client frames must be
masked per the RFC; server frames are sent unmasked.
"""

from __future__ import annotations

import base64
import hashlib
import struct
from typing import BinaryIO, Optional

_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA

MAX_MESSAGE_BYTES = 1 << 20


class WebSocketError(Exception):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key.strip() + _GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def handshake_response(client_key: str) -> bytes:
    return (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {accept_key(client_key)}\r\n"
        "\r\n"
    ).encode("ascii")


def _read_exact(rfile: BinaryIO, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = rfile.read(n - len(buf))
        if not chunk:
            raise EOFError("socket closed mid-frame")
        buf += chunk
    return buf


def _read_frame(rfile: BinaryIO) -> tuple[bool, int, bytes]:
    head = _read_exact(rfile, 2)
    fin = bool(head[0] & 0x80)
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        (length,) = struct.unpack(">H", _read_exact(rfile, 2))
    elif length == 127:
        (length,) = struct.unpack(">Q", _read_exact(rfile, 8))
    if length > MAX_MESSAGE_BYTES:
        raise WebSocketError(f"frame of {length} bytes exceeds limit")
    mask = _read_exact(rfile, 4) if masked else None
    payload = _read_exact(rfile, length)
    if mask:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    elif opcode != OP_CLOSE and length:
        # RFC 6455 5.1: client-to-server frames must be masked.
        raise WebSocketError("unmasked client frame")
    return fin, opcode, payload


def _encode_frame(opcode: int, payload: bytes) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < (1 << 16):
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


class WebSocketTransport:
    """Text-message transport over an upgraded socket file pair."""

    def __init__(self, rfile: BinaryIO, wfile: BinaryIO):
        self._rfile = rfile
        self._wfile = wfile
        self._closed = False

    def recv_text(self) -> Optional[str]:
        """Next complete text message, or None once the peer closed."""
        buffer = b""
        in_message = False
        while True:
            try:
                fin, opcode, payload = _read_frame(self._rfile)
            except (EOFError, OSError):
                return None
            if opcode == OP_PING:
                self._send_raw(_encode_frame(OP_PONG, payload))
                continue
            if opcode == OP_PONG:
                continue
            if opcode == OP_CLOSE:
                if not self._closed:
                    self._send_raw(_encode_frame(OP_CLOSE, payload[:2]))
                    self._closed = True
                return None
            if opcode == OP_TEXT or (opcode == OP_CONT and in_message):
                buffer += payload
                in_message = True
                if len(buffer) > MAX_MESSAGE_BYTES:
                    raise WebSocketError("message exceeds size limit")
                if fin:
                    return buffer.decode("utf-8")
                continue
            if opcode == OP_BINARY:
                raise WebSocketError("binary messages are not part of the protocol")
            raise WebSocketError(f"unexpected opcode 0x{opcode:X}")

    def send_text(self, text: str) -> None:
        self._send_raw(_encode_frame(OP_TEXT, text.encode("utf-8")))

    def close(self) -> None:
        if not self._closed:
            self._closed = True
            try:
                self._send_raw(_encode_frame(OP_CLOSE, struct.pack(">H", 1000)))
            except OSError:
                pass

    def _send_raw(self, data: bytes) -> None:
        self._wfile.write(data)
        self._wfile.flush()
