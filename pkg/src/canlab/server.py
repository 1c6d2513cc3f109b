"""Control and telemetry server for a running lab.

One listening socket speaks three dialects, detected per connection:

* newline-delimited JSON straight over TCP (scripts, CLI, sessions);
* the same JSON messages over a WebSocket upgrade (the browser panel);
* plain HTTP GET for the optional static UI directory.

Server-to-client messages: ``state`` on every vehicle-state change,
``frame`` for every bus event, ``attack_status`` around floods, and
``error`` replies. Client commands: ``accelerate``, ``door``,
``blinker``, ``frame`` (injection), ``attack_start``, ``attack_stop``.
Every outbound message carries a per-connection monotone ``seq``.

Fan-out never blocks the simulation: frame telemetry sits in a bounded
drop-oldest queue per connection, state is coalesced to the latest
snapshot, control replies are never dropped.
"""

from __future__ import annotations

import json
import logging
import socket
import threading
from collections import deque
from pathlib import Path
from typing import Optional

from canlab import ws
from canlab.attack import FloodConfig, LocalSession, Session, flood
from canlab.bus import BusEvent
from canlab.errors import FrameTextError, SessionError
from canlab.frame import CanFrame, parse_frame_text
from canlab.lab import Lab
from canlab.vehicle import Accelerate, BlinkerSet, DoorToggle, VehicleState

log = logging.getLogger("canlab.server")

DEFAULT_CONTROL_ADDRESS = "127.0.0.1:29536"
CONTROL_ADDRESS_ENV = "CANLAB_CONTROL"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def state_payload(state: VehicleState) -> dict:
    return {
        "type": "state",
        "speed_mph": state.speed_display_mph,
        "speed_raw": state.speed_raw,
        "doors": list(state.doors),
        "blinker_left": state.blinker_left,
        "blinker_right": state.blinker_right,
    }


def frame_payload(event: BusEvent) -> dict:
    payload = {
        "type": "frame",
        "ts": event.timestamp,
        "id": f"{event.frame.can_id:03X}",
        "dlc": event.frame.dlc,
        "data": event.frame.data.hex().upper(),
    }
    if event.frame.rtr:
        payload["rtr"] = True
    return payload


class _Outbox:
    """Per-connection send queue with the backpressure policy above."""

    def __init__(self, frame_cap: int = 512):
        self._cv = threading.Condition()
        self._control: deque[dict] = deque()
        self._state: Optional[dict] = None
        self._frames: deque[dict] = deque(maxlen=frame_cap)
        self._closed = False

    def put_control(self, message: dict) -> None:
        with self._cv:
            self._control.append(message)
            self._cv.notify()

    def put_state(self, message: dict) -> None:
        with self._cv:
            self._state = message
            self._cv.notify()

    def put_frame(self, message: dict) -> None:
        with self._cv:
            self._frames.append(message)  # deque drops oldest beyond cap
            self._cv.notify()

    def close(self) -> None:
        with self._cv:
            self._closed = True
            self._cv.notify_all()

    def get(self, timeout: float = 0.5) -> Optional[dict]:
        """Next message by priority (control, state, frame); None on
        timeout or once closed and drained."""
        with self._cv:
            while True:
                if self._control:
                    return self._control.popleft()
                if self._state is not None:
                    message, self._state = self._state, None
                    return message
                if self._frames:
                    return self._frames.popleft()
                if self._closed:
                    return None
                if not self._cv.wait(timeout):
                    return None


class _RawTransport:
    """Newline-delimited JSON over a plain socket."""

    def __init__(self, rfile, wfile):
        self._rfile = rfile
        self._wfile = wfile

    def recv_text(self) -> Optional[str]:
        try:
            line = self._rfile.readline()
        except OSError:
            return None
        if not line:
            return None
        return line.decode("utf-8", errors="replace")

    def send_text(self, text: str) -> None:
        self._wfile.write(text.encode("utf-8") + b"\n")
        self._wfile.flush()

    def close(self) -> None:
        pass


class _Connection:
    """One client: reader dispatches commands, writer drains the outbox."""

    _ids = 0

    def __init__(self, server: "ControlServer", sock: socket.socket):
        _Connection._ids += 1
        self.conn_id = _Connection._ids
        self.server = server
        self.sock = sock
        self.outbox = _Outbox(frame_cap=server.frame_queue_cap)
        self._seq = 0
        self._rfile = sock.makefile("rb")
        self._wfile = sock.makefile("wb")
        self.transport = None
        self._alive = True

    def start(self) -> None:
        threading.Thread(
            target=self._reader, name=f"ctl-reader-{self.conn_id}", daemon=True
        ).start()

    # -- reader ---------------------------------------------------------

    def _reader(self) -> None:
        try:
            if not self._negotiate():
                return
            threading.Thread(
                target=self._writer, name=f"ctl-writer-{self.conn_id}", daemon=True
            ).start()
            self.server._register(self)
            self.outbox.put_state(state_payload(self.server.lab.cluster.state))
            while True:
                text = self.transport.recv_text()
                if text is None:
                    break
                text = text.strip()
                if not text:
                    continue
                self._dispatch(text)
        except (OSError, ws.WebSocketError) as exc:
            log.debug("connection %d reader stopped: %s", self.conn_id, exc)
        finally:
            self.server._unregister(self)
            self.shutdown()

    def _negotiate(self) -> bool:
        """Pick the dialect by peeking at the first bytes; True once a
        control transport (raw or websocket) is established.

        HTTP/WebSocket clients speak first, so a short silence means a
        raw NDJSON client that only wants telemetry."""
        try:
            self.sock.settimeout(0.25)
            try:
                head = self.sock.recv(5, socket.MSG_PEEK)
            except socket.timeout:
                head = b"\n"  # silent listener: raw dialect
            finally:
                self.sock.settimeout(None)
        except OSError:
            return False
        if not head:
            return False  # peer closed before sending anything
        if head.startswith(b"GET ") or head.startswith(b"HEAD "):
            line = self._rfile.readline()
            if not line:
                return False
            return self._handle_http(line)
        self.transport = _RawTransport(self._rfile, self._wfile)
        return True

    def _handle_http(self, request_line: bytes) -> bool:
        headers: dict[str, str] = {}
        while True:
            raw = self._rfile.readline()
            if not raw or raw in (b"\r\n", b"\n"):
                break
            name, _, value = raw.decode("latin-1").partition(":")
            headers[name.strip().lower()] = value.strip()
        parts = request_line.decode("latin-1").split()
        path = parts[1] if len(parts) > 1 else "/"
        if headers.get("upgrade", "").lower() == "websocket":
            key = headers.get("sec-websocket-key", "")
            if not key:
                self._wfile.write(b"HTTP/1.1 400 Bad Request\r\n\r\n")
                self._wfile.flush()
                return False
            self._wfile.write(ws.handshake_response(key))
            self._wfile.flush()
            self.transport = ws.WebSocketTransport(self._rfile, self._wfile)
            return True
        self._serve_static(path)
        return False

    def _serve_static(self, path: str) -> None:
        ui_dir = self.server.ui_dir
        body, status, ctype = b"not found", "404 Not Found", "text/plain"
        if ui_dir is not None:
            rel = path.split("?", 1)[0].lstrip("/") or "index.html"
            candidate = (ui_dir / rel).resolve()
            inside = ui_dir == candidate.parent or ui_dir in candidate.parents
            if candidate.is_file() and inside:
                body = candidate.read_bytes()
                status = "200 OK"
                ctype = _CONTENT_TYPES.get(candidate.suffix.lower(), "application/octet-stream")
        response = (
            f"HTTP/1.1 {status}\r\n"
            f"Content-Type: {ctype}\r\n"
            f"Content-Length: {len(body)}\r\n"
            "Connection: close\r\n\r\n"
        ).encode("ascii") + body
        try:
            self._wfile.write(response)
            self._wfile.flush()
        except OSError:
            pass

    # -- writer ---------------------------------------------------------

    def _writer(self) -> None:
        try:
            while self._alive:
                message = self.outbox.get(timeout=0.5)
                if message is None:
                    if not self._alive:
                        break
                    continue
                message["seq"] = self._next_seq()
                self.transport.send_text(json.dumps(message))
        except (OSError, ValueError):
            pass
        finally:
            self.shutdown()

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    # -- command dispatch -------------------------------------------------

    def _dispatch(self, text: str) -> None:
        try:
            message = json.loads(text)
            if not isinstance(message, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as exc:
            self.reply_error(f"malformed message: {exc}")
            return
        try:
            self.server.handle_command(self, message)
        except (FrameTextError, SessionError, ValueError, KeyError, TypeError) as exc:
            self.reply_error(str(exc) or type(exc).__name__)

    def reply_error(self, message: str) -> None:
        self.outbox.put_control({"type": "error", "message": message})

    def shutdown(self) -> None:
        if not self._alive:
            return
        self._alive = False
        self.outbox.close()
        try:
            if self.transport is not None:
                self.transport.close()
        except OSError:
            pass
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class _AttackRun:
    """Server-side flood launched by attack_start."""

    def __init__(self, server: "ControlServer", config: FloodConfig):
        self.server = server
        self.config = config
        self.stop_event = threading.Event()
        self.frames_sent = 0
        self.session: Session = LocalSession(server.lab.bus, name="flood-attacker")
        self._thread = threading.Thread(target=self._run, name="attack-flood", daemon=True)

    def start(self) -> None:
        self._thread.start()

    def _counting_session(self) -> Session:
        run = self

        class _Counting(Session):
            def send_frame(self, frame, interface=None):
                run.session.send_frame(frame, interface=interface)
                run.frames_sent += 1

            def close(self):
                run.session.close()

            @property
            def open(self):
                return run.session.open

        return _Counting()

    def _run(self) -> None:
        monitor = threading.Thread(target=self._monitor, daemon=True)
        monitor.start()
        try:
            report = flood(
                self.config,
                self._counting_session(),
                stop=self.stop_event,
                status=lambda msg: self.server.broadcast_status(True, self.frames_sent, msg),
            )
            message = report.stopped_by
        except Exception as exc:  # config/map errors surface as status
            message = f"attack failed: {exc}"
        finally:
            self.stop_event.set()
            self.session.close()
            self.server._attack_finished(self)
        self.server.broadcast_status(False, self.frames_sent, message)

    def _monitor(self) -> None:
        while not self.stop_event.wait(0.5):
            self.server.broadcast_status(True, self.frames_sent, "Flooding")


class ControlServer:
    """Listens for control clients and exposes the lab to them."""

    def __init__(self, lab: Lab, bind: tuple[str, int] = ("127.0.0.1", 0),
                 ui_dir: Optional[str] = None, frame_queue_cap: int = 512):
        self.lab = lab
        self.frame_queue_cap = frame_queue_cap
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self._sock = socket.create_server(bind, reuse_port=False)
        self.address: tuple[str, int] = self._sock.getsockname()[:2]
        self._connections: set[_Connection] = set()
        self._conn_lock = threading.Lock()
        self._attack: Optional[_AttackRun] = None
        self._attack_lock = threading.Lock()
        self._accept_thread: Optional[threading.Thread] = None
        self._stopping = threading.Event()
        self._injector = lab.bus.attach("remote-injector", on_event=lambda _e: None)
        self._tap = lab.bus.attach("control-telemetry", on_event=self._on_bus_event)
        lab.cluster.add_listener(self._on_state_change)

    # -- lifecycle --------------------------------------------------------

    def start(self) -> "ControlServer":
        self._accept_thread = threading.Thread(
            target=self._accept_loop, name="ctl-accept", daemon=True
        )
        self._accept_thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        try:
            self._sock.close()
        except OSError:
            pass
        with self._attack_lock:
            if self._attack is not None:
                self._attack.stop_event.set()
        with self._conn_lock:
            connections = list(self._connections)
        for conn in connections:
            conn.shutdown()

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                sock, _addr = self._sock.accept()
            except OSError:
                break
            _Connection(self, sock).start()

    def _register(self, conn: _Connection) -> None:
        with self._conn_lock:
            self._connections.add(conn)

    def _unregister(self, conn: _Connection) -> None:
        with self._conn_lock:
            self._connections.discard(conn)

    # -- telemetry ---------------------------------------------------------

    def _on_bus_event(self, event: BusEvent) -> None:
        payload = frame_payload(event)
        with self._conn_lock:
            connections = list(self._connections)
        for conn in connections:
            conn.outbox.put_frame(dict(payload))

    def _on_state_change(self, state: VehicleState) -> None:
        payload = state_payload(state)
        with self._conn_lock:
            connections = list(self._connections)
        for conn in connections:
            conn.outbox.put_state(dict(payload))

    def broadcast_status(self, running: bool, frames_sent: int, message: str) -> None:
        payload = {
            "type": "attack_status",
            "running": running,
            "frames_sent": frames_sent,
            "message": message,
        }
        with self._conn_lock:
            connections = list(self._connections)
        for conn in connections:
            conn.outbox.put_control(dict(payload))

    # -- commands -----------------------------------------------------------

    def handle_command(self, conn: _Connection, message: dict) -> None:
        kind = message.get("type")
        if kind == "accelerate":
            self.lab.body.actuate(Accelerate())
        elif kind == "door":
            index = int(message["index"])
            self.lab.body.actuate(DoorToggle(index))
        elif kind == "blinker":
            self.lab.body.actuate(BlinkerSet(str(message["side"]), bool(message["on"])))
        elif kind == "frame":
            self._inject_frame(message)
        elif kind == "attack_start":
            self._attack_start(conn, message)
        elif kind == "attack_stop":
            self._attack_stop(conn)
        else:
            raise ValueError(f"unknown message type {kind!r}")

    def _inject_frame(self, message: dict) -> None:
        iface = message.get("iface")
        if iface is not None and iface != self.lab.interface:
            raise SessionError(f"unknown interface {iface!r}")
        if "text" in message:
            frame = parse_frame_text(str(message["text"]))
        else:
            can_id = int(str(message["id"]), 16)
            data = bytes.fromhex(str(message.get("data", "")))
            frame = CanFrame.data_frame(can_id, data)
        self.lab.bus.transmit(self._injector, frame)

    def _attack_start(self, conn: _Connection, message: dict) -> None:
        config = FloodConfig(
            filemap=str(message["filemap"]),
            interface=self.lab.interface,
            session="local",
            rate_hz=float(message.get("rate", 100.0)),
            seed=int(message.get("seed", 0)),
            out_of_range_probability=float(message.get("out_of_range", 0.3)),
            duration=(float(message["duration"]) if "duration" in message else None),
            max_frames=(int(message["max_frames"]) if "max_frames" in message else None),
        )
        with self._attack_lock:
            if self._attack is not None:
                raise SessionError("an attack is already running")
            self._attack = _AttackRun(self, config)
            self._attack.start()

    def _attack_stop(self, conn: _Connection) -> None:
        with self._attack_lock:
            if self._attack is None:
                raise SessionError("no attack is running")
            self._attack.stop_event.set()

    def _attack_finished(self, run: _AttackRun) -> None:
        with self._attack_lock:
            if self._attack is run:
                self._attack = None


def parse_address(text: str) -> tuple[str, int]:
    """`host:port` → tuple; bare port allowed."""
    host, sep, port = text.rpartition(":")
    if not sep:
        host, port = "127.0.0.1", text
    try:
        return (host or "127.0.0.1", int(port))
    except ValueError as exc:
        raise ValueError(f"bad address {text!r}, expected HOST:PORT") from exc
