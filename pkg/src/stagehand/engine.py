"""Engine core: stream -> recognizer -> roles -> (simulator | robot link).

The engine is a synchronous, single-writer pipeline. Deterministic drivers
(trace replay at maximum speed, scripted sequences) advance the simulated
clock in lockstep with their inputs; live drivers advance it from the wall
clock and funnel all control through one thread.

Every input (frame, injected gesture, role switch, finger map, direct
command) and every output (gesture event, command, snapshot) can be
recorded as canonical JSON Lines. Commands never depend on simulator
state, so replaying a run's input records through a fresh engine with the
same config reproduces the command log byte for byte.
"""

from __future__ import annotations

import json
import logging
import math
import socket
from typing import Callable, Iterable, Optional

from .commands import (
    AddressedCommand,
    Broadcast,
    Group,
    Robot,
)
from .config import EngineConfig, RemoteEndpoint
from .cues import (
    Cue,
    CueSequence,
    DirectCommand,
    InjectGesture,
    SetRoleCue,
)
from .errors import StagehandError, UnknownRobot
from .gestures import GestureEvent, GestureRecognizer
from .landmarks import HandFrame, frame_to_line, parse_trace_line
from .roles import FingerMap, MAPPED_GROUP, Role, RoleController
from .stage import Stage, StageSnapshot
from .wire import encode_command

log = logging.getLogger(__name__)

INPUT_RECORD_TYPES = ("frame", "inject", "role", "finger_map", "direct")


def canonical_line(obj: dict) -> str:
    """One run-log line; construction order is stable, so identical records
    serialize to identical bytes."""
    return json.dumps(obj, separators=(",", ":"))


class RobotLink:
    """Datagram fan-out to remote robot agents, plus telemetry intake."""

    def __init__(self, remotes: dict[int, RemoteEndpoint]):
        self.remotes = dict(remotes)
        self._sock: Optional[socket.socket] = None
        if self.remotes:
            self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
            self._sock.setblocking(False)
        self.decode_errors = 0

    def send(self, cmd: AddressedCommand) -> None:
        if self._sock is None:
            return
        if isinstance(cmd.address, Broadcast):
            packet = encode_command(cmd)
            for endpoint in self.remotes.values():
                self._sendto(packet, endpoint)
        elif isinstance(cmd.address, Robot):
            endpoint = self.remotes.get(cmd.address.id)
            if endpoint is not None:
                self._sendto(encode_command(cmd), endpoint)

    def _sendto(self, packet: bytes, endpoint: RemoteEndpoint) -> None:
        try:
            self._sock.sendto(packet, (endpoint.host, endpoint.port))
        except OSError as exc:
            log.warning("datagram send to %s failed: %s", endpoint, exc)

    def drain_telemetry(self) -> list:
        """Non-blocking read of pending STATE packets (fire-and-forget:
        losing any of them never affects command execution)."""
        from .errors import WireError
        from .wire import StateTelemetry, decode

        out = []
        if self._sock is None:
            return out
        while True:
            try:
                datagram, _ = self._sock.recvfrom(2048)
            except BlockingIOError:
                return out
            except OSError:
                return out
            try:
                decoded = decode(datagram)
            except WireError:
                self.decode_errors += 1
                continue
            if isinstance(decoded, StateTelemetry):
                out.append(decoded)

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()


class Engine:
    """One performance run: owns the recognizer, role controller, stage,
    and robot link, and serializes every control mutation."""

    def __init__(self, config: Optional[EngineConfig] = None,
                 record_sink: Optional[Callable[[str], None]] = None,
                 notify: Optional[Callable[[dict], None]] = None,
                 lockstep: bool = True,
                 debug_gestures: Optional[Callable[[dict], None]] = None):
        self.config = config or EngineConfig()
        self.lockstep = lockstep
        self._record_sink = record_sink
        self._notify = notify
        self.stage = Stage(self.config.stage,
                           robot_ids=self.config.sim_robot_ids())
        self.recognizer = GestureRecognizer(self.config.gesture,
                                            debug_sink=debug_gestures)
        self.controller = RoleController(self.config.roles,
                                         self.config.finger_map)
        self.link = RobotLink(self.config.remote_robots())
        self._sim_ids = set(self.config.sim_robot_ids())
        self._snapshot_interval = 1.0 / self.config.snapshot_hz
        self._next_snapshot_t = 0.0
        self.latest_snapshot: StageSnapshot = self.stage.snapshot()
        self.command_count = 0
        self.event_count = 0
        self._publish_snapshot()

    # -- time -----------------------------------------------------------------

    @property
    def sim_time(self) -> float:
        return self.stage.sim_time

    def advance_to(self, t: float) -> None:
        """Advance the simulation clock to t, publishing snapshots at the
        configured cadence along the way."""
        dt = self.config.stage.dt
        target_tick = math.ceil(t / dt - 1e-9)
        while self.stage.tick < target_tick:
            snap_tick = math.ceil(self._next_snapshot_t / dt - 1e-9)
            stop_tick = min(target_tick, max(snap_tick, self.stage.tick + 1))
            self.stage.step(stop_tick - self.stage.tick)
            if self.stage.sim_time >= self._next_snapshot_t - 1e-9:
                self._publish_snapshot()

    def settle(self, extra: float = 0.0) -> None:
        """Run the clock until all drives have expired (plus slack)."""
        while self.stage.has_active_drives():
            self.advance_to(self.sim_time + 0.05)
        if extra > 0:
            self.advance_to(self.sim_time + extra)

    def _publish_snapshot(self) -> None:
        snap = self.stage.snapshot()
        self.latest_snapshot = snap
        while self._next_snapshot_t <= snap.sim_time + 1e-9:
            self._next_snapshot_t += self._snapshot_interval
        self._emit({"type": "snapshot", "snapshot": snap.to_json_obj()})

    # -- inputs ---------------------------------------------------------------

    def feed_frame(self, frame: HandFrame) -> list[GestureEvent]:
        """Process one landmark frame; in lockstep mode the simulation
        clock follows the frame timestamps."""
        self._record({"type": "frame", "data": json.loads(frame_to_line(frame))})
        if self.lockstep:
            self.advance_to(frame.t)
        events = self.recognizer.update(frame)
        for event in events:
            self._process_event(event, source="recognizer")
        return events

    def finish_input(self) -> list[GestureEvent]:
        """Flush gestures pending at end-of-stream."""
        events = self.recognizer.finish()
        for event in events:
            self._process_event(event, source="recognizer")
        return events

    def inject_gesture(self, inject: InjectGesture,
                       t: Optional[float] = None) -> GestureEvent:
        """Manual/scripted gesture injection: enters the pipeline exactly
        where recognizer output enters."""
        event = inject.to_event(self.sim_time if t is None else t)
        self._record({"type": "inject", "t": event.t,
                      "event": event.to_json_obj()})
        self._process_event(event, source="inject")
        return event

    def replay_event(self, event: GestureEvent) -> None:
        """Re-inject a previously recorded event verbatim (log replay)."""
        self._record({"type": "inject", "t": event.t,
                      "event": event.to_json_obj()})
        self._process_event(event, source="inject")

    def set_role(self, role: Role, t: Optional[float] = None) -> None:
        at = self.sim_time if t is None else t
        stops = self.controller.set_role(role, at=at)
        self._record({"type": "role", "t": at, "role": role.value})
        for cmd in stops:
            self._dispatch(cmd)

    def set_finger_map(self, finger_map: FingerMap,
                       t: Optional[float] = None) -> None:
        at = self.sim_time if t is None else t
        self.controller.set_finger_map(finger_map)
        self._record({"type": "finger_map", "t": at,
                      "map": finger_map.to_json_obj()})

    def apply_direct(self, cmd: AddressedCommand,
                     t: Optional[float] = None) -> None:
        at = self.sim_time if t is None else t
        if cmd.issued_at == 0.0 and at != 0.0:
            cmd = AddressedCommand(cmd.address, cmd.action, at)
        self._record({"type": "direct", "t": at,
                      "command": cmd.to_json_obj()})
        self._dispatch(cmd)

    # -- pipeline -------------------------------------------------------------

    def _process_event(self, event: GestureEvent, source: str) -> None:
        self.event_count += 1
        self._emit({"type": "gesture", "source": source,
                    "event": event.to_json_obj()})
        for cmd in self.controller.interpret(event):
            self._dispatch(cmd)

    def _dispatch(self, cmd: AddressedCommand) -> None:
        """Deliver one bus-level command to the simulator and/or the wire,
        expanding group addresses. Delivery errors are logged, never
        raised: the show goes on."""
        self.command_count += 1
        self._emit({"type": "command", "command": cmd.to_json_obj()})
        for concrete in self._expand(cmd):
            address = concrete.address
            try:
                if isinstance(address, Broadcast):
                    self.stage.apply_command(concrete)
                    self.link.send(concrete)
                elif isinstance(address, Robot):
                    if address.id in self._sim_ids:
                        self.stage.apply_command(concrete)
                    elif address.id in self.link.remotes:
                        self.link.send(concrete)
                    else:
                        raise UnknownRobot(address.id)
            except StagehandError as exc:
                log.warning("command %s dropped: %s", concrete, exc)

    def _expand(self, cmd: AddressedCommand) -> list[AddressedCommand]:
        if not isinstance(cmd.address, Group):
            return [cmd]
        if cmd.address.name == MAPPED_GROUP:
            ids = self.controller.mapped_robot_ids()
        else:
            log.warning("unknown group %r; command dropped", cmd.address.name)
            return []
        return [AddressedCommand(Robot(rid), cmd.action, cmd.issued_at)
                for rid in ids]

    # -- scripted sequences -----------------------------------------------------

    def apply_cue(self, cue: Cue) -> None:
        action = cue.action
        try:
            if isinstance(action, SetRoleCue):
                self.set_role(action.role)
            elif isinstance(action, InjectGesture):
                self.inject_gesture(action)
            elif isinstance(action, DirectCommand):
                self.apply_direct(action.command)
            else:
                raise TypeError(f"unknown cue action {action!r}")
        except StagehandError as exc:
            log.warning("cue at %.3f failed: %s; continuing", cue.at, exc)

    def run_script(self, seq: CueSequence, settle: bool = True,
                   start: Optional[float] = None) -> None:
        """Dispatch a cue sequence on the simulated clock (lockstep);
        deterministic for a given config and initial stage state."""
        t0 = self.sim_time if start is None else start
        for cue in seq.cues:
            self.advance_to(t0 + cue.at)
            self.apply_cue(cue)
        if settle:
            self.settle()

    def replay_trace(self, frames: Iterable[HandFrame],
                     finish: bool = True) -> None:
        """Feed a frame sequence as fast as possible (lockstep clock)."""
        for frame in frames:
            self.feed_frame(frame)
        if finish:
            self.finish_input()

    # -- recording --------------------------------------------------------------

    def _record(self, obj: dict) -> None:
        if self._record_sink is not None:
            self._record_sink(canonical_line(obj))

    def _emit(self, obj: dict) -> None:
        self._record(obj)
        if self._notify is not None:
            self._notify(obj)

    def close(self) -> None:
        self.link.close()


# --- run-log replay -----------------------------------------------------------


def input_records(log_lines: Iterable[str]) -> list[dict]:
    records = []
    for line in log_lines:
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        if obj.get("type") in INPUT_RECORD_TYPES:
            records.append(obj)
    return records


def command_lines(log_lines: Iterable[str]) -> list[str]:
    out = []
    for line in log_lines:
        line = line.strip()
        if line and json.loads(line).get("type") == "command":
            out.append(line)
    return out


def replay_log(config: EngineConfig, log_lines: Iterable[str]) -> list[str]:
    """Re-run a recorded run's inputs through a fresh engine; returns the
    reproduced full log lines."""
    reproduced: list[str] = []
    engine = Engine(config=config, record_sink=reproduced.append,
                    lockstep=True)
    try:
        for rec in input_records(log_lines):
            kind = rec["type"]
            if kind == "frame":
                data = rec["data"]
                frame = parse_trace_line(json.dumps(data))
                engine.feed_frame(frame)
            elif kind == "inject":
                engine.advance_to(rec["t"])
                engine.replay_event(GestureEvent.from_json_obj(rec["event"]))
            elif kind == "role":
                engine.advance_to(rec["t"])
                engine.set_role(Role(rec["role"]), t=rec["t"])
            elif kind == "finger_map":
                engine.advance_to(rec["t"])
                engine.set_finger_map(FingerMap.from_names(rec["map"]),
                                      t=rec["t"])
            elif kind == "direct":
                engine.advance_to(rec["t"])
                engine.apply_direct(
                    AddressedCommand.from_json_obj(rec["command"]),
                    t=rec["t"])
        engine.finish_input()
    finally:
        engine.close()
    return reproduced
