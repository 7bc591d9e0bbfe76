"""Binary datagram protocol between the host and robot agents.

Packet layout (big-endian multi-byte fields):

    offset  size  field
    0       1     magic        0xA5
    1       1     version      0x01
    2       1     robot_id     0xFF = broadcast
    3       1     cmd          0x01 DRIVE, 0x02 LED_SET, 0x03 STOP,
                               0x04 PING, 0x81 STATE
    4       n     payload      fixed length per cmd (below)
    4+n     1     checksum     XOR of all preceding bytes

Payloads:

    DRIVE    (6)  v: int16 mm/s; omega: int16 mrad/s; duration: uint16 ms
    LED_SET  (6)  mode: u8 (0 off, 1 solid, 2 toggle, 3 strobe);
                  r, g, b: u8; period: uint16 ms
    STOP     (0)
    PING     (0)
    STATE    (7)  x, y: int16 mm; theta: int16 mrad; led_mode: u8

SI values scale by 1000 onto the wire (round half away from zero), so the
quantization error is at most half a milli-unit per field.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Union

from .commands import (
    AddressedCommand,
    BROADCAST,
    Broadcast,
    Drive,
    Group,
    LedMode,
    LedSet,
    Robot,
    STOP,
)
from .errors import (
    BadChecksum,
    BadLength,
    BadMagic,
    BadVersion,
    UnknownCmd,
    UnrepresentableValue,
)

MAGIC = 0xA5
VERSION = 0x01
BROADCAST_ID = 0xFF

CMD_DRIVE = 0x01
CMD_LED_SET = 0x02
CMD_STOP = 0x03
CMD_PING = 0x04
CMD_STATE = 0x81

PAYLOAD_LEN = {
    CMD_DRIVE: 6,
    CMD_LED_SET: 6,
    CMD_STOP: 0,
    CMD_PING: 0,
    CMD_STATE: 7,
}

DEFAULT_HOST_PORT = 7402
AGENT_PORT_BASE = 7410

_LED_MODE_CODE = {
    LedMode.OFF: 0,
    LedMode.SOLID: 1,
    LedMode.TOGGLE: 2,
    LedMode.STROBE: 3,
}
_LED_MODE_FROM_CODE = {v: k for k, v in _LED_MODE_CODE.items()}


@dataclass(frozen=True)
class Ping:
    """Host-to-robot liveness probe; the agent answers with a STATE packet."""

    robot_id: int


@dataclass(frozen=True)
class StateTelemetry:
    """Robot-to-host pose/LED report in wire units."""

    robot_id: int
    x_mm: int
    y_mm: int
    theta_mrad: int
    led_mode: LedMode

    @property
    def x(self) -> float:
        return self.x_mm / 1000.0

    @property
    def y(self) -> float:
        return self.y_mm / 1000.0

    @property
    def theta(self) -> float:
        return self.theta_mrad / 1000.0


Decoded = Union[AddressedCommand, Ping, StateTelemetry]


def _scale(value: float, what: str) -> int:
    """SI -> milli-unit fixed point, rounding half away from zero."""
    milli = math.floor(abs(value) * 1000.0 + 0.5)
    n = int(math.copysign(milli, value))
    if not (-32768 <= n <= 32767):
        raise UnrepresentableValue(f"{what}={value} exceeds int16 milli-units")
    return n


def _scale_unsigned(value: float, what: str) -> int:
    n = math.floor(value * 1000.0 + 0.5)
    if not (0 <= n <= 0xFFFF):
        raise UnrepresentableValue(f"{what}={value} exceeds uint16 milli-units")
    return n


def checksum(data: bytes) -> int:
    c = 0
    for b in data:
        c ^= b
    return c


def _packet(robot_id: int, cmd: int, payload: bytes) -> bytes:
    if not (0 <= robot_id <= 0xFF):
        raise UnrepresentableValue(f"robot id {robot_id} exceeds one byte")
    head = bytes([MAGIC, VERSION, robot_id, cmd]) + payload
    return head + bytes([checksum(head)])


def _address_byte(address) -> int:
    if isinstance(address, Broadcast):
        return BROADCAST_ID
    if isinstance(address, Robot):
        return address.id
    if isinstance(address, Group):
        raise UnrepresentableValue(
            "group addresses must be expanded to robot ids before encoding")
    raise UnrepresentableValue(f"bad address {address!r}")


def encode_command(cmd: AddressedCommand) -> bytes:
    """Encode a drive/led/stop command into one datagram."""
    rid = _address_byte(cmd.address)
    action = cmd.action
    if isinstance(action, Drive):
        payload = struct.pack(
            ">hhH",
            _scale(action.v, "v"),
            _scale(action.omega, "omega"),
            _scale_unsigned(action.duration, "duration"),
        )
        return _packet(rid, CMD_DRIVE, payload)
    if isinstance(action, LedSet):
        payload = struct.pack(
            ">BBBBH",
            _LED_MODE_CODE[action.mode],
            *action.rgb,
            _scale_unsigned(action.period, "period"),
        )
        return _packet(rid, CMD_LED_SET, payload)
    return _packet(rid, CMD_STOP, b"")


def encode_ping(robot_id: int) -> bytes:
    return _packet(robot_id, CMD_PING, b"")


def encode_state(state: StateTelemetry) -> bytes:
    payload = struct.pack(
        ">hhhB",
        state.x_mm, state.y_mm, state.theta_mrad,
        _LED_MODE_CODE[state.led_mode],
    )
    return _packet(state.robot_id, CMD_STATE, payload)


def state_from_pose(robot_id: int, x: float, y: float, theta: float,
                    led_mode: LedMode) -> StateTelemetry:
    return StateTelemetry(
        robot_id=robot_id,
        x_mm=_scale(x, "x"),
        y_mm=_scale(y, "y"),
        theta_mrad=_scale(theta, "theta"),
        led_mode=led_mode,
    )


def decode(datagram: bytes) -> Decoded:
    """Decode one datagram; the exact inverse of the encoders on valid
    packets. Raises a distinct DecodeError subclass per failure mode."""
    if len(datagram) < 5:
        raise BadLength(f"datagram of {len(datagram)} bytes is too short")
    if datagram[0] != MAGIC:
        raise BadMagic(f"magic byte 0x{datagram[0]:02X}")
    if datagram[1] != VERSION:
        raise BadVersion(f"version byte 0x{datagram[1]:02X}")
    cmd = datagram[3]
    if cmd not in PAYLOAD_LEN:
        raise UnknownCmd(f"cmd byte 0x{cmd:02X}")
    expected = 5 + PAYLOAD_LEN[cmd]
    if len(datagram) != expected:
        raise BadLength(
            f"cmd 0x{cmd:02X} expects {expected} bytes, got {len(datagram)}")
    if checksum(datagram[:-1]) != datagram[-1]:
        raise BadChecksum(
            f"checksum 0x{datagram[-1]:02X} != 0x{checksum(datagram[:-1]):02X}")
    rid = datagram[2]
    address = BROADCAST if rid == BROADCAST_ID else Robot(rid)
    payload = datagram[4:-1]
    if cmd == CMD_DRIVE:
        v, omega, duration = struct.unpack(">hhH", payload)
        try:
            action = Drive(v / 1000.0, omega / 1000.0, duration / 1000.0)
        except ValueError as exc:
            # Checksum-valid but outside the command envelope (a foreign
            # sender); dropped like any other bad datagram.
            raise UnrepresentableValue(str(exc)) from exc
        return AddressedCommand(address=address, action=action)
    if cmd == CMD_LED_SET:
        mode_code, r, g, b, period = struct.unpack(">BBBBH", payload)
        if mode_code not in _LED_MODE_FROM_CODE:
            raise UnknownCmd(f"led mode code {mode_code}")
        try:
            action = LedSet(_LED_MODE_FROM_CODE[mode_code], (r, g, b),
                            period / 1000.0)
        except ValueError as exc:
            raise UnrepresentableValue(str(exc)) from exc
        return AddressedCommand(address=address, action=action)
    if cmd == CMD_STOP:
        return AddressedCommand(address=address, action=STOP)
    if cmd == CMD_PING:
        return Ping(robot_id=rid)
    x, y, theta, led_code = struct.unpack(">hhhB", payload)
    if led_code not in _LED_MODE_FROM_CODE:
        raise UnknownCmd(f"led mode code {led_code}")
    return StateTelemetry(robot_id=rid, x_mm=x, y_mm=y, theta_mrad=theta,
                          led_mode=_LED_MODE_FROM_CODE[led_code])
