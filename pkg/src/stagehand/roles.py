"""Role metaphors: the mode-switched interpreter from gestures to commands.

Four roles share one gesture vocabulary but give it different meanings:
the director commands the whole ensemble, the puppeteer animates single
robots through a finger-to-robot map, the wizard casts stage-wide light
and motion effects, and the hybrid pairs puppeteer fingers with wizard
effects scoped to the mapped robots.

Rotation sign convention: a rightward gesture means clockwise in the
stage's right-handed frame, i.e. negative angular velocity. Mirrored
camera setups can invert this via RoleParams.invert_rotation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .commands import (
    AddressedCommand,
    BROADCAST,
    Drive,
    Group,
    LedMode,
    LedSet,
    OMEGA_MAX,
    Robot,
    STOP,
    V_MAX,
)
from .errors import ConfigurationError, DuplicateRobotAssignment
from .gestures import Direction, GestureEvent, GestureKind
from .landmarks import Finger

MAPPED_GROUP = "mapped"


class Role(Enum):
    DIRECTOR = "director"
    PUPPETEER = "puppeteer"
    WIZARD = "wizard"
    HYBRID = "hybrid"


class FingerMap:
    """Assignment of fingers to robot ids: at most one robot per finger and
    at most one finger per robot."""

    def __init__(self, assignments: Optional[dict[Finger, int]] = None):
        assignments = dict(assignments or {})
        seen: dict[int, Finger] = {}
        for finger, robot_id in assignments.items():
            if not isinstance(finger, Finger):
                raise ConfigurationError(f"bad finger key: {finger!r}")
            robot_id = int(robot_id)
            if robot_id in seen:
                raise DuplicateRobotAssignment(
                    f"robot {robot_id} mapped by both "
                    f"{seen[robot_id].name.lower()} and {finger.name.lower()}"
                )
            seen[robot_id] = finger
            assignments[finger] = robot_id
        self._map = assignments

    @classmethod
    def from_names(cls, mapping: dict[str, int]) -> "FingerMap":
        try:
            return cls({Finger[name.upper()]: rid
                        for name, rid in mapping.items()})
        except KeyError as exc:
            raise ConfigurationError(f"unknown finger name: {exc}") from exc

    def get(self, finger: Finger) -> Optional[int]:
        return self._map.get(finger)

    def robot_ids(self) -> list[int]:
        """Mapped robot ids in finger order (thumb..pinky)."""
        return [self._map[f] for f in Finger if f in self._map]

    def to_json_obj(self) -> dict:
        return {f.name.lower(): self._map[f] for f in Finger if f in self._map}

    def __len__(self):
        return len(self._map)

    def __eq__(self, other):
        return isinstance(other, FingerMap) and self._map == other._map


@dataclass
class RoleParams:
    """Command magnitudes per role. The defaults keep every emitted drive
    comfortably inside the protocol envelope."""

    director_v: float = 0.15
    director_omega: float = 1.2
    director_drive_dur: float = 0.6
    director_turn_dur: float = 0.5
    puppeteer_v: float = 0.10
    puppeteer_dur: float = 0.4
    wizard_v: float = 0.10
    wizard_omega: float = 1.0
    wizard_dur: float = 0.6
    led_rgb: tuple[int, int, int] = (255, 255, 255)
    invert_rotation: bool = False

    def __post_init__(self):
        for name in ("director_v", "puppeteer_v", "wizard_v"):
            if not 0 < getattr(self, name) <= V_MAX:
                raise ConfigurationError(
                    f"roles.{name} must be in (0, {V_MAX}]")
        for name in ("director_omega", "wizard_omega"):
            if not 0 < getattr(self, name) <= OMEGA_MAX:
                raise ConfigurationError(
                    f"roles.{name} must be in (0, {OMEGA_MAX}]")
        for name in ("director_drive_dur", "director_turn_dur",
                     "puppeteer_dur", "wizard_dur"):
            if not 0 < getattr(self, name) <= 5.0:
                raise ConfigurationError(f"roles.{name} must be in (0, 5]")
        rgb = tuple(int(c) for c in self.led_rgb)
        if len(rgb) != 3 or any(not (0 <= c <= 255) for c in rgb):
            raise ConfigurationError("roles.led_rgb must be three bytes")
        self.led_rgb = rgb

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RoleParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(mapping) - known
        if unknown:
            raise ConfigurationError(
                f"unknown roles config keys: {sorted(unknown)}")
        return cls(**mapping)


class RoleController:
    """Stateful mode switch around a pure event-to-commands mapping.

    For a fixed (role, finger map, params) the interpretation of an event
    is a pure function; only set_role and set_finger_map mutate state.
    """

    def __init__(self, params: Optional[RoleParams] = None,
                 finger_map: Optional[FingerMap] = None):
        self.params = params or RoleParams()
        self.finger_map = finger_map
        self.role: Optional[Role] = None

    def set_role(self, role: Role, at: float = 0.0) -> list[AddressedCommand]:
        """Activate a role; returns the safety stop to dispatch."""
        if role in (Role.PUPPETEER, Role.HYBRID) and self.finger_map is None:
            raise ConfigurationError(
                f"{role.value} requires a finger map before activation")
        self.role = role
        return [AddressedCommand(address=BROADCAST, action=STOP, issued_at=at)]

    def set_finger_map(self, finger_map: FingerMap) -> None:
        self.finger_map = finger_map

    def mapped_robot_ids(self) -> list[int]:
        if self.finger_map is None:
            return []
        return self.finger_map.robot_ids()

    def _omega(self, direction: Direction, magnitude: float) -> float:
        sign = -1.0 if direction is Direction.RIGHT else 1.0
        if self.params.invert_rotation:
            sign = -sign
        return sign * magnitude

    def interpret(self, event: GestureEvent) -> list[AddressedCommand]:
        """Map one gesture event to commands under the active role.

        Pairs outside the active role's vocabulary yield an empty list, as
        do flicks of unmapped fingers: a live performance must not halt.
        """
        if self.role is None:
            return []
        p = self.params
        t = event.t
        kind = event.kind

        if self.role is Role.DIRECTOR:
            if kind is GestureKind.PALM_PUSH:
                return [AddressedCommand(BROADCAST,
                                         Drive(p.director_v, 0.0,
                                               p.director_drive_dur), t)]
            if kind is GestureKind.FIST_PULL:
                return [AddressedCommand(BROADCAST,
                                         Drive(-p.director_v, 0.0,
                                               p.director_drive_dur), t)]
            if kind is GestureKind.GRASP_ROTATE:
                return [AddressedCommand(
                    BROADCAST,
                    Drive(0.0, self._omega(event.direction, p.director_omega),
                          p.director_turn_dur), t)]
            return []

        if self.role is Role.PUPPETEER:
            if kind is GestureKind.FINGER_FLICK:
                return self._flick_command(event)
            if kind is GestureKind.FIST_ROTATE:
                omega = self._omega(event.direction, p.director_omega)
                return [
                    AddressedCommand(Robot(rid),
                                     Drive(0.0, omega, p.director_turn_dur), t)
                    for rid in self.mapped_robot_ids()
                ]
            return []

        if self.role is Role.WIZARD:
            if kind is GestureKind.WAND_VERTICAL_FLICK:
                return [AddressedCommand(BROADCAST,
                                         LedSet(LedMode.TOGGLE, p.led_rgb), t)]
            if kind is GestureKind.WAND_HORIZONTAL_SWISH:
                return [AddressedCommand(
                    BROADCAST,
                    Drive(p.wizard_v,
                          self._omega(event.direction, p.wizard_omega),
                          p.wizard_dur), t)]
            return []

        if self.role is Role.HYBRID:
            if kind is GestureKind.FINGER_FLICK:
                return self._flick_command(event)
            if kind is GestureKind.WAND_VERTICAL_FLICK:
                return [AddressedCommand(Group(MAPPED_GROUP),
                                         LedSet(LedMode.TOGGLE, p.led_rgb), t)]
            if kind is GestureKind.WAND_HORIZONTAL_SWISH:
                return [AddressedCommand(
                    Group(MAPPED_GROUP),
                    Drive(p.wizard_v,
                          self._omega(event.direction, p.wizard_omega),
                          p.wizard_dur), t)]
            return []

        return []

    def _flick_command(self, event: GestureEvent) -> list[AddressedCommand]:
        if self.finger_map is None:
            return []
        rid = self.finger_map.get(event.finger)
        if rid is None:
            return []
        p = self.params
        return [AddressedCommand(Robot(rid),
                                 Drive(p.puppeteer_v, 0.0, p.puppeteer_dur),
                                 event.t)]
