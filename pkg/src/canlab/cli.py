"""Command-line workflow: simulate, sniff, send, flood, replay.

The simulator owns the bus in its process; every other subcommand talks
to it over the control protocol. The default control address comes from
the CANLAB_CONTROL environment variable (HOST:PORT), falling back to
127.0.0.1:29536.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading
import time

from canlab.attack import FloodConfig, LocalSession, flood
from canlab.bus import BusEvent, NodeHandle
from canlab.client import ControlClient, TcpSession
from canlab.errors import CanLabError
from canlab.frame import CanFrame, format_frame_text, parse_frame_text
from canlab.lab import Lab
from canlab.server import (
    CONTROL_ADDRESS_ENV,
    DEFAULT_CONTROL_ADDRESS,
    ControlServer,
    parse_address,
)
from canlab.sniffer import SnifferTable, read_log


def _default_address() -> str:
    return os.environ.get(CONTROL_ADDRESS_ENV, DEFAULT_CONTROL_ADDRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canlab",
        description="Software-only CAN bus laboratory and pentesting sandbox.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("sim", help="run the simulated vehicle and control server")
    p_sim.add_argument("--interface", default="vcan0", help="bus name (default vcan0)")
    p_sim.add_argument("--bind", default=_default_address(),
                       help="control server HOST:PORT")
    p_sim.add_argument("--ui-dir", default=None,
                       help="serve this directory over HTTP (the browser panel)")
    p_sim.add_argument("--slot-rate", type=float, default=1000.0,
                       help="arbitration slots per second")
    p_sim.add_argument("--accel-step", type=int, default=None,
                       help="raw speed units per accelerate press")
    p_sim.set_defaults(func=cmd_sim)

    p_sniff = sub.add_parser("sniff", help="live per-identifier traffic table")
    p_sniff.add_argument("interface", help="bus name to watch")
    p_sniff.add_argument("--connect", default=_default_address())
    p_sniff.add_argument("--duration", type=float, default=None,
                         help="stop after this many seconds")
    p_sniff.add_argument("--refresh", type=float, default=0.5,
                         help="table refresh period in seconds")
    p_sniff.set_defaults(func=cmd_sniff)

    p_send = sub.add_parser("send", help="inject one frame (cansend semantics)")
    p_send.add_argument("interface")
    p_send.add_argument("frame", help="frame text, e.g. 244#0000009999")
    p_send.add_argument("--connect", default=_default_address())
    p_send.set_defaults(func=cmd_send)

    p_flood = sub.add_parser("flood", help="map-driven frame flooding attack")
    p_flood.add_argument("--filemap", required=True, help="frame-map file")
    p_flood.add_argument("--interface", default="vcan0")
    p_flood.add_argument("--session", default="local",
                         help='"local" or HOST:PORT of a victim control server')
    p_flood.add_argument("--rate", type=float, default=100.0, help="ticks per second")
    p_flood.add_argument("--seed", type=int, default=0)
    p_flood.add_argument("--out-of-range", type=float, default=0.3,
                         help="probability of drawing outside the mapped range")
    p_flood.add_argument("--duration", type=float, default=None)
    p_flood.add_argument("--max-frames", type=int, default=None)
    p_flood.add_argument("--quiet", action="store_true",
                         help="suppress the local speed readout")
    p_flood.set_defaults(func=cmd_flood)

    p_replay = sub.add_parser("replay", help="replay a traffic log onto the bus")
    p_replay.add_argument("interface")
    p_replay.add_argument("log")
    p_replay.add_argument("--scale", type=float, default=1.0,
                          help="time scale (0 = as fast as possible)")
    p_replay.add_argument("--connect", default=_default_address())
    p_replay.set_defaults(func=cmd_replay)

    return parser


def cmd_sim(args) -> int:
    lab = Lab(args.interface, slot_rate=args.slot_rate, accel_step=args.accel_step)
    lab.start_pump()
    server = ControlServer(lab, bind=parse_address(args.bind), ui_dir=args.ui_dir)
    server.start()
    host, port = server.address
    print(f"simulating {args.interface}; control protocol on {host}:{port}", flush=True)
    if args.ui_dir:
        print(f"panel: http://{host}:{port}/", flush=True)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
        lab.stop_pump()
    return 0


def cmd_send(args) -> int:
    frame = parse_frame_text(args.frame)  # diagnose before connecting
    session = TcpSession(parse_address(args.connect), interface=args.interface)
    try:
        session.send_frame(frame, confirm=True)
    finally:
        session.close()
    print(f"sent {format_frame_text(frame)} on {args.interface}")
    return 0


def cmd_sniff(args) -> int:
    client = ControlClient(parse_address(args.connect))
    table = SnifferTable()
    remote = NodeHandle(0, "remote")
    started = time.monotonic()
    last_render = 0.0
    clear = "\x1b[2J\x1b[H" if sys.stdout.isatty() else ""
    try:
        while args.duration is None or time.monotonic() - started < args.duration:
            message = client.next_message(timeout=0.1)
            if message is None:
                if client.closed:
                    break
            elif message.get("type") == "frame":
                frame = CanFrame(
                    int(message["id"], 16),
                    rtr=bool(message.get("rtr", False)),
                    dlc=int(message["dlc"]),
                    data=bytes.fromhex(message.get("data", "")),
                )
                table.observe(BusEvent(frame, float(message["ts"]), remote))
            now = time.monotonic()
            if table and now - last_render >= args.refresh:
                last_render = now
                print(f"{clear}   Timestamp  Interval    ID DLC  Data  [{args.interface}]")
                for row in table.rows():
                    print(row.formatted())
                sys.stdout.flush()
    except KeyboardInterrupt:
        pass
    finally:
        client.close()
    return 0


def cmd_flood(args) -> int:
    config = FloodConfig(
        filemap=args.filemap,
        interface=args.interface,
        session=args.session,
        rate_hz=args.rate,
        out_of_range_probability=args.out_of_range,
        seed=args.seed,
        duration=args.duration,
        max_frames=args.max_frames,
    )
    lab = None
    sampler_stop = threading.Event()
    if args.session == "local":
        lab = Lab(args.interface)
        lab.start_pump()
        session = LocalSession(lab.bus)
        if not args.quiet:
            threading.Thread(
                target=_speed_sampler, args=(lab, sampler_stop), daemon=True
            ).start()
    else:
        session = TcpSession(parse_address(args.session), interface=args.interface)

    stop = threading.Event()
    result: dict = {}

    def run() -> None:
        try:
            result["report"] = flood(config, session, stop=stop)
        except BaseException as exc:
            result["error"] = exc

    worker = threading.Thread(target=run, daemon=True)
    worker.start()
    try:
        while worker.is_alive():
            worker.join(timeout=0.2)
    except KeyboardInterrupt:
        stop.set()
        worker.join(timeout=5.0)
    finally:
        sampler_stop.set()
        session.close()
        if lab is not None:
            lab.stop_pump()
    if "error" in result:
        raise result["error"]
    report = result.get("report")
    if report is None:
        raise CanLabError("flood worker did not finish")
    per_device = ", ".join(f"{dev}: {n}" for dev, n in report.frames_by_device.items())
    print(f"sent {report.total_frames} frames in {report.elapsed_s:.2f}s "
          f"({per_device}); stopped by {report.stopped_by}")
    return 0


def _speed_sampler(lab: Lab, stop: threading.Event) -> None:
    last = None
    while not stop.wait(0.25):
        state = lab.cluster.state
        if state.speed_display_mph != last:
            last = state.speed_display_mph
            print(f"  tachymeter: {last:6.1f} MPH")


def cmd_replay(args) -> int:
    records = read_log(args.log)
    session = TcpSession(parse_address(args.connect), interface=args.interface)
    count = 0
    try:
        previous = None
        for record in records:
            if previous is not None and args.scale > 0:
                delay = (record.timestamp_s - previous) * args.scale
                if delay > 0:
                    time.sleep(delay)
            previous = record.timestamp_s
            session.send_frame(record.frame)
            count += 1
    finally:
        session.close()
    print(f"replayed {count} frames onto {args.interface}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CanLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
