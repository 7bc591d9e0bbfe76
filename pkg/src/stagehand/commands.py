"""Addressed robot commands: the engine's single command currency.

A command pairs an address (one robot, a named group, or broadcast) with an
action (differential drive, LED setting, or stop). Commands are immutable
messages; every consumer (simulator, wire encoder, run log) takes them
as-is. Group addresses are symbolic and must be expanded to robot ids by
the dispatcher before they reach the stage or the wire.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

# Protocol envelope: every drive command must fit inside these bounds.
V_MAX = 0.3          # m/s
OMEGA_MAX = 2.0      # rad/s
DURATION_MAX = 5.0   # s


@dataclass(frozen=True)
class Broadcast:
    def to_json_obj(self):
        return "broadcast"


@dataclass(frozen=True)
class Robot:
    id: int

    def __post_init__(self):
        if not (0 <= self.id <= 0xFE):
            raise ValueError(f"robot id must be in [0, 254], got {self.id}")

    def to_json_obj(self):
        return {"robot": self.id}


@dataclass(frozen=True)
class Group:
    name: str

    def to_json_obj(self):
        return {"group": self.name}


Address = Union[Broadcast, Robot, Group]

BROADCAST = Broadcast()


def address_from_json_obj(obj) -> Address:
    if obj == "broadcast":
        return BROADCAST
    if isinstance(obj, dict):
        if "robot" in obj:
            return Robot(int(obj["robot"]))
        if "group" in obj:
            return Group(str(obj["group"]))
    raise ValueError(f"bad address: {obj!r}")


class LedMode(Enum):
    OFF = "off"
    SOLID = "solid"
    TOGGLE = "toggle"
    STROBE = "strobe"


@dataclass(frozen=True)
class Drive:
    """Differential-drive setpoint: linear m/s, angular rad/s, for a
    bounded duration in seconds."""

    v: float
    omega: float
    duration: float

    def __post_init__(self):
        if abs(self.v) > V_MAX + 1e-12:
            raise ValueError(f"|v| must be <= {V_MAX}, got {self.v}")
        if abs(self.omega) > OMEGA_MAX + 1e-12:
            raise ValueError(f"|omega| must be <= {OMEGA_MAX}, got {self.omega}")
        if not (0.0 < self.duration <= DURATION_MAX + 1e-12):
            raise ValueError(
                f"duration must be in (0, {DURATION_MAX}], got {self.duration}"
            )

    def to_json_obj(self):
        return {"type": "drive", "v": self.v, "omega": self.omega,
                "duration": self.duration}


@dataclass(frozen=True)
class LedSet:
    mode: LedMode
    rgb: tuple[int, int, int] = (255, 255, 255)
    period: float = 0.0

    def __post_init__(self):
        rgb = tuple(int(c) for c in self.rgb)
        if len(rgb) != 3 or any(not (0 <= c <= 255) for c in rgb):
            raise ValueError(f"rgb must be three bytes, got {self.rgb!r}")
        object.__setattr__(self, "rgb", rgb)
        if self.mode is LedMode.STROBE and not self.period > 0:
            raise ValueError("strobe requires a positive period")
        if self.period < 0:
            raise ValueError(f"period must be >= 0, got {self.period}")

    def to_json_obj(self):
        return {"type": "led", "mode": self.mode.value,
                "rgb": list(self.rgb), "period": self.period}


@dataclass(frozen=True)
class Stop:
    def to_json_obj(self):
        return {"type": "stop"}


Action = Union[Drive, LedSet, Stop]

STOP = Stop()


def action_from_json_obj(obj: dict) -> Action:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError(f"bad action: {obj!r}")
    kind = obj["type"]
    if kind == "drive":
        return Drive(v=float(obj["v"]), omega=float(obj["omega"]),
                     duration=float(obj["duration"]))
    if kind == "led":
        return LedSet(mode=LedMode(obj["mode"]),
                      rgb=tuple(obj.get("rgb", (255, 255, 255))),
                      period=float(obj.get("period", 0.0)))
    if kind == "stop":
        return STOP
    raise ValueError(f"bad action type: {kind!r}")


@dataclass(frozen=True)
class AddressedCommand:
    address: Address
    action: Action
    issued_at: float = 0.0

    def to_json_obj(self) -> dict:
        return {
            "address": self.address.to_json_obj(),
            "action": self.action.to_json_obj(),
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "AddressedCommand":
        return cls(
            address=address_from_json_obj(obj["address"]),
            action=action_from_json_obj(obj["action"]),
            issued_at=float(obj.get("issued_at", 0.0)),
        )
