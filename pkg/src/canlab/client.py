"""Client side of the control protocol: scripting and remote sessions."""

from __future__ import annotations

import json
import queue
import socket
import threading
import time
from typing import Callable, Optional

from canlab.attack import Session
from canlab.errors import SessionError
from canlab.frame import CanFrame, format_frame_text


class ControlClient:
    """Newline-delimited JSON client over TCP.

    A reader thread feeds a bounded queue; when telemetry outpaces the
    consumer the oldest messages are discarded, and the latest error
    reply is additionally remembered in `last_error`.
    """

    def __init__(self, address: tuple[str, int], timeout: float = 5.0,
                 queue_cap: int = 4096):
        try:
            self._sock = socket.create_connection(address, timeout=timeout)
        except OSError as exc:
            raise SessionError(f"cannot connect to {address[0]}:{address[1]}: {exc}") from exc
        self._sock.settimeout(None)
        self._rfile = self._sock.makefile("rb")
        self._wfile = self._sock.makefile("wb")
        self._queue: queue.Queue[Optional[dict]] = queue.Queue(maxsize=queue_cap)
        self._send_lock = threading.Lock()
        self.last_error: Optional[str] = None
        self.closed = False
        threading.Thread(target=self._reader, name="ctl-client-reader", daemon=True).start()

    def _reader(self) -> None:
        try:
            for line in self._rfile:
                line = line.strip()
                if not line:
                    continue
                try:
                    message = json.loads(line)
                except ValueError:
                    continue
                if message.get("type") == "error":
                    self.last_error = str(message.get("message", "unknown error"))
                while True:
                    try:
                        self._queue.put_nowait(message)
                        break
                    except queue.Full:
                        try:
                            self._queue.get_nowait()
                        except queue.Empty:
                            pass
        except OSError:
            pass
        finally:
            self.closed = True
            try:
                self._queue.put_nowait(None)
            except queue.Full:
                pass

    def send(self, message: dict) -> None:
        if self.closed:
            raise SessionError("connection closed")
        data = json.dumps(message).encode("utf-8") + b"\n"
        with self._send_lock:
            try:
                self._wfile.write(data)
                self._wfile.flush()
            except OSError as exc:
                self.closed = True
                raise SessionError(f"connection lost: {exc}") from exc

    def next_message(self, timeout: Optional[float] = 1.0) -> Optional[dict]:
        try:
            message = self._queue.get(timeout=timeout)
        except queue.Empty:
            return None
        return message

    def wait_for(self, predicate: Callable[[dict], bool],
                 timeout: float = 2.0) -> Optional[dict]:
        """First incoming message satisfying the predicate, else None."""
        deadline = time.monotonic() + timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return None
            message = self.next_message(timeout=remaining)
            if message is None:
                if self.closed:
                    return None
                continue
            if predicate(message):
                return message

    def close(self) -> None:
        self.closed = True
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class TcpSession(Session):
    """Session against a remote victim's control server.

    Frames travel as `frame` command messages; the bus echo in the frame
    telemetry doubles as the delivery confirmation for one-shot sends.
    """

    def __init__(self, address: tuple[str, int], interface: Optional[str] = None,
                 timeout: float = 5.0):
        self.client = ControlClient(address, timeout=timeout)
        self.interface = interface

    def send_frame(self, frame: CanFrame, interface: Optional[str] = None,
                   confirm: bool = False, timeout: float = 2.0) -> None:
        if self.client.closed:
            raise SessionError("session is closed")
        if self.client.last_error is not None:
            message, self.client.last_error = self.client.last_error, None
            raise SessionError(message)
        iface = interface or self.interface
        command = {"type": "frame", "text": format_frame_text(frame)}
        if iface is not None:
            command["iface"] = iface
        self.client.send(command)
        if confirm:
            self._await_echo(frame, timeout)

    def _await_echo(self, frame: CanFrame, timeout: float) -> None:
        wanted_id = f"{frame.can_id:03X}"
        wanted_data = frame.data.hex().upper()

        def match(message: dict) -> bool:
            if message.get("type") == "error":
                return True
            return (
                message.get("type") == "frame"
                and message.get("id") == wanted_id
                and message.get("data") == wanted_data
            )

        reply = self.client.wait_for(match, timeout=timeout)
        if reply is None:
            raise SessionError("no delivery confirmation from victim")
        if reply.get("type") == "error":
            raise SessionError(str(reply.get("message")))

    def close(self) -> None:
        self.client.close()

    @property
    def open(self) -> bool:
        return not self.client.closed
