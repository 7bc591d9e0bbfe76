"""Standalone robot agent: one simulated robot behind a datagram socket.

The agent binds a UDP port, applies DRIVE/LED_SET/STOP datagrams addressed
to its id (or broadcast) to an internal single-robot stage with the same
kinematics contract as the main simulator, answers PING immediately with
STATE, and pushes STATE to the last commander at a fixed telemetry rate.
Malformed datagrams are counted and dropped.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import socket
import threading
import time
from typing import Optional

from .commands import AddressedCommand, Broadcast, Robot
from .errors import WireError
from .stage import RobotPlacement, Stage, StageConfig
from .wire import (
    AGENT_PORT_BASE,
    Ping,
    decode,
    encode_state,
    state_from_pose,
)

log = logging.getLogger(__name__)


class RobotAgent:
    """Socket poll loop around a one-robot stage simulator."""

    def __init__(self, robot_id: int, port: Optional[int] = None,
                 host: str = "127.0.0.1", tick_ms: float = 1.0,
                 telemetry_ms: float = 100.0,
                 stage_config: Optional[StageConfig] = None):
        if not (0 <= robot_id <= 0xFE):
            raise ValueError(f"robot id must be in [0, 254], got {robot_id}")
        self.robot_id = robot_id
        self.port = port if port is not None else AGENT_PORT_BASE + robot_id
        self.host = host
        self.tick_ms = tick_ms
        self.telemetry_ms = telemetry_ms
        cfg = stage_config or StageConfig(dt=tick_ms / 1000.0)
        if abs(cfg.dt - tick_ms / 1000.0) > 1e-12:
            cfg = dataclasses.replace(cfg, dt=tick_ms / 1000.0)
        if cfg.robots is None:
            cfg = dataclasses.replace(cfg, robots=[
                RobotPlacement(id=robot_id, x=cfg.width / 2,
                               y=cfg.height / 2, theta=0.0)])
        self.stage = Stage(cfg, robot_ids=[robot_id])
        self.decode_errors = 0
        self._sock: Optional[socket.socket] = None
        self._stop = threading.Event()
        self._last_sender = None

    def bind(self) -> None:
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((self.host, self.port))
        self.port = self._sock.getsockname()[1]
        self._sock.settimeout(self.tick_ms / 1000.0)

    def stop(self) -> None:
        self._stop.set()

    def _state_packet(self) -> bytes:
        robot = self.stage.robot(self.robot_id)
        state = state_from_pose(self.robot_id, robot.x, robot.y, robot.theta,
                                robot.led.mode)
        return encode_state(state)

    def _handle(self, datagram: bytes, sender) -> None:
        try:
            decoded = decode(datagram)
        except WireError as exc:
            self.decode_errors += 1
            log.debug("dropped datagram from %s: %s", sender, exc)
            return
        if isinstance(decoded, Ping):
            if decoded.robot_id in (self.robot_id, 0xFF):
                self._last_sender = sender
                self._send(self._state_packet(), sender)
            return
        if isinstance(decoded, AddressedCommand):
            addr = decoded.address
            if isinstance(addr, Robot) and addr.id != self.robot_id:
                return  # addressed to someone else
            if not isinstance(addr, (Robot, Broadcast)):
                return
            self._last_sender = sender
            self.stage.apply_command(
                AddressedCommand(Robot(self.robot_id), decoded.action,
                                 decoded.issued_at))
        # STATE packets from peers are ignored.

    def _send(self, packet: bytes, target) -> None:
        assert self._sock is not None
        try:
            self._sock.sendto(packet, target)
        except OSError as exc:
            log.debug("telemetry send failed: %s", exc)

    def run(self) -> None:
        """Blocking poll loop; call stop() from another thread to exit."""
        if self._sock is None:
            self.bind()
        dt = self.tick_ms / 1000.0
        start = time.monotonic()
        done_ticks = 0
        last_telemetry = start
        while not self._stop.is_set():
            try:
                datagram, sender = self._sock.recvfrom(2048)
            except socket.timeout:
                datagram = None
                sender = None
            except OSError:
                break
            now = time.monotonic()
            due = int((now - start) / dt)
            if due > done_ticks:
                self.stage.step(due - done_ticks)
                done_ticks = due
            if datagram is not None:
                self._handle(datagram, sender)
            if (self._last_sender is not None
                    and (now - last_telemetry) * 1000.0 >= self.telemetry_ms):
                self._send(self._state_packet(), self._last_sender)
                last_telemetry = now
        self._sock.close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="robot-agent",
        description="Simulated robot speaking the stage datagram protocol.")
    parser.add_argument("--id", type=int, required=True, help="robot id")
    parser.add_argument("--port", type=int, default=None,
                        help=f"UDP port (default {AGENT_PORT_BASE}+id)")
    parser.add_argument("--tick-ms", type=float, default=1.0,
                        help="simulation tick in milliseconds")
    parser.add_argument("--telemetry-ms", type=float, default=100.0,
                        help="STATE emission interval in milliseconds")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    agent = RobotAgent(robot_id=args.id, port=args.port, host=args.host,
                       tick_ms=args.tick_ms, telemetry_ms=args.telemetry_ms)
    try:
        agent.bind()
    except OSError as exc:
        log.error("cannot bind %s:%s: %s", args.host, args.port, exc)
        return 3
    log.info("robot %d listening on %s:%d", args.id, agent.host, agent.port)
    try:
        agent.run()
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
