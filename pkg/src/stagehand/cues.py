"""Timed cue scripts: choreography chaining, character blocking, lightning.

A cue fires at an offset from sequence start and either injects a gesture
(entering the pipeline exactly where recognizer output enters), applies a
raw command, or switches the active role. Sequences are sorted by offset
with file order preserved on ties.

Cue file format (JSON):

    {"name": "...", "cues": [
        {"at": 0.0, "role": "director"},
        {"at": 0.1, "gesture": {"kind": "palm_push"}},
        {"at": 1.0, "command": {"address": "broadcast",
                                 "action": {"type": "stop"}}}
    ]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .commands import AddressedCommand, Drive, Robot
from .errors import (
    MalformedCueFile,
    NegativeOffset,
    TargetOutOfBounds,
    UnknownAction,
)
from .gestures import Direction, GestureEvent, GestureKind
from .landmarks import Finger
from .roles import Role, RoleParams
from .stage import RobotState, StageConfig, duration_ticks, wrap_angle


@dataclass(frozen=True)
class InjectGesture:
    """Gesture payload without a timestamp; the dispatcher stamps it with
    the clock time at which the cue fires."""

    kind: GestureKind
    direction: Optional[Direction] = None
    finger: Optional[Finger] = None
    strength: float = 1.0

    def to_event(self, t: float) -> GestureEvent:
        return GestureEvent(kind=self.kind, t=t, strength=self.strength,
                            direction=self.direction, finger=self.finger)

    def to_json_obj(self) -> dict:
        obj: dict = {"kind": self.kind.value}
        if self.direction is not None:
            obj["direction"] = self.direction.value
        if self.finger is not None:
            obj["finger"] = self.finger.name.lower()
        if self.strength != 1.0:
            obj["strength"] = self.strength
        return obj


@dataclass(frozen=True)
class DirectCommand:
    command: AddressedCommand


@dataclass(frozen=True)
class SetRoleCue:
    role: Role


CueAction = Union[InjectGesture, DirectCommand, SetRoleCue]


@dataclass(frozen=True)
class Cue:
    at: float
    action: CueAction

    def __post_init__(self):
        if self.at < 0:
            raise NegativeOffset(f"cue offset must be >= 0, got {self.at}")

    def to_json_obj(self) -> dict:
        if isinstance(self.action, SetRoleCue):
            return {"at": self.at, "role": self.action.role.value}
        if isinstance(self.action, InjectGesture):
            return {"at": self.at, "gesture": self.action.to_json_obj()}
        cmd = self.action.command.to_json_obj()
        cmd.pop("issued_at", None)
        return {"at": self.at, "command": cmd}


@dataclass(frozen=True)
class CueSequence:
    name: str
    cues: tuple[Cue, ...]

    def __post_init__(self):
        # Stable sort: ties keep file order.
        object.__setattr__(
            self, "cues", tuple(sorted(self.cues, key=lambda c: c.at)))

    def to_json_obj(self) -> dict:
        return {"name": self.name, "cues": [c.to_json_obj() for c in self.cues]}

    def end_offset(self) -> float:
        return self.cues[-1].at if self.cues else 0.0


def _cue_from_obj(obj: dict) -> Cue:
    if not isinstance(obj, dict) or "at" not in obj:
        raise MalformedCueFile(f"cue must be an object with 'at': {obj!r}")
    try:
        at = float(obj["at"])
    except (TypeError, ValueError) as exc:
        raise MalformedCueFile(f"bad cue offset: {obj['at']!r}") from exc
    if not math.isfinite(at):
        raise MalformedCueFile(f"bad cue offset: {obj['at']!r}")
    if at < 0:
        raise NegativeOffset(f"cue offset must be >= 0, got {at}")
    keys = {"gesture", "command", "role"} & set(obj)
    if len(keys) != 1:
        raise UnknownAction(
            f"cue needs exactly one of gesture/command/role: {sorted(obj)}")
    try:
        if "role" in obj:
            return Cue(at, SetRoleCue(Role(obj["role"])))
        if "gesture" in obj:
            g = dict(obj["gesture"])
            g.setdefault("t", 0.0)
            g.setdefault("strength", 1.0)
            ev = GestureEvent.from_json_obj(g)
            return Cue(at, InjectGesture(kind=ev.kind, direction=ev.direction,
                                         finger=ev.finger,
                                         strength=ev.strength))
        cmd = AddressedCommand.from_json_obj(obj["command"])
        return Cue(at, DirectCommand(cmd))
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, NegativeOffset):
            raise
        raise UnknownAction(f"bad cue action: {exc}") from exc


def sequence_from_obj(obj: dict, name: Optional[str] = None) -> CueSequence:
    if not isinstance(obj, dict) or "cues" not in obj:
        raise MalformedCueFile("cue document must be an object with 'cues'")
    if not isinstance(obj["cues"], list):
        raise MalformedCueFile("'cues' must be a list")
    cues = tuple(_cue_from_obj(c) for c in obj["cues"])
    return CueSequence(name=name or str(obj.get("name", "unnamed")), cues=cues)


def load_sequence(path) -> CueSequence:
    """Load and validate a cue file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedCueFile(f"{path}: invalid JSON: {exc}") from exc
    return sequence_from_obj(obj)


def save_sequence(path, seq: CueSequence) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(seq.to_json_obj(), fh, indent=2)
        fh.write("\n")


# --- built-in sequences ------------------------------------------------------

def builtin_lightning(n_strikes: int, cadence: float) -> CueSequence:
    """Rapid wand casting: per strike, a vertical flick (light toggle) at
    k*cadence followed by an alternating-direction swish half a cadence
    later. Even strike counts leave the lights as they started."""
    if n_strikes < 1:
        raise ValueError(f"n_strikes must be >= 1, got {n_strikes}")
    if not cadence > 0:
        raise ValueError(f"cadence must be > 0, got {cadence}")
    cues = [Cue(0.0, SetRoleCue(Role.WIZARD))]
    for k in range(n_strikes):
        direction = Direction.RIGHT if k % 2 == 0 else Direction.LEFT
        cues.append(Cue(k * cadence,
                        InjectGesture(GestureKind.WAND_VERTICAL_FLICK)))
        cues.append(Cue(k * cadence + cadence / 2.0,
                        InjectGesture(GestureKind.WAND_HORIZONTAL_SWISH,
                                      direction=direction)))
    return CueSequence(name="lightning", cues=tuple(cues))


def builtin_old_macdonald(
    marks: Sequence[tuple[int, tuple[float, float]]],
    initial_poses: dict[int, RobotState],
    stage_config: StageConfig,
    params: Optional[RoleParams] = None,
    beat: float = 1.0,
) -> CueSequence:
    """Character blocking: drive each robot in turn to its mark by dead
    reckoning (turn to heading, then drive the distance), with a beat
    between characters. Long legs are split so every drive respects the
    command duration bound.
    """
    params = params or RoleParams()
    dt = stage_config.dt
    cues: list[Cue] = []
    t = 0.0
    for robot_id, (tx, ty) in marks:
        if robot_id not in initial_poses:
            raise TargetOutOfBounds(f"unknown robot {robot_id}")
        if not stage_config._inside(tx, ty):
            raise TargetOutOfBounds(
                f"mark ({tx}, {ty}) outside the drivable area")
        pose = initial_poses[robot_id]
        x, y, theta = pose.x, pose.y, pose.theta
        dist = math.hypot(tx - x, ty - y)
        if dist < 1e-12:
            continue  # already on its mark
        heading = math.atan2(ty - y, tx - x)
        dtheta = wrap_angle(heading - theta)
        if abs(dtheta) > 1e-12:
            turn_dur = abs(dtheta) / params.director_omega
            omega = math.copysign(params.director_omega, dtheta)
            for chunk in _split_duration(turn_dur):
                cues.append(Cue(t, DirectCommand(AddressedCommand(
                    Robot(robot_id), Drive(0.0, omega, chunk)))))
                t += duration_ticks(chunk, dt) * dt
        drive_dur = dist / params.puppeteer_v
        for chunk in _split_duration(drive_dur):
            cues.append(Cue(t, DirectCommand(AddressedCommand(
                Robot(robot_id), Drive(params.puppeteer_v, 0.0, chunk)))))
            t += duration_ticks(chunk, dt) * dt
        t += beat
    return CueSequence(name="old_macdonald", cues=tuple(cues))


def _split_duration(total: float, limit: float = 5.0) -> list[float]:
    """Split a duration into chunks within the drive duration bound."""
    chunks = []
    remaining = total
    while remaining > limit:
        chunks.append(limit)
        remaining -= limit
    if remaining > 1e-9:
        chunks.append(remaining)
    return chunks


def builtin_dance_demo(cycles: int = 2, beat: float = 0.8) -> CueSequence:
    """Forward, back, pivot-left, pivot-right ostinato for the whole
    ensemble; an illustrative choreography loop."""
    if cycles < 1:
        raise ValueError(f"cycles must be >= 1, got {cycles}")
    cues = [Cue(0.0, SetRoleCue(Role.DIRECTOR))]
    t = 0.2
    for _ in range(cycles):
        cues.append(Cue(t, InjectGesture(GestureKind.PALM_PUSH)))
        t += beat
        cues.append(Cue(t, InjectGesture(GestureKind.FIST_PULL)))
        t += beat
        cues.append(Cue(t, InjectGesture(GestureKind.GRASP_ROTATE,
                                         direction=Direction.LEFT)))
        t += beat
        cues.append(Cue(t, InjectGesture(GestureKind.GRASP_ROTATE,
                                         direction=Direction.RIGHT)))
        t += beat
    return CueSequence(name="dance_demo", cues=tuple(cues))


BUILTIN_SEQUENCES = {
    "lightning": lambda: builtin_lightning(3, 0.4),
    "dance_demo": lambda: builtin_dance_demo(),
}
