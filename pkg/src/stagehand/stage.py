"""Deterministic 2D stage: differential-drive kinematics, LEDs, spotlights.

The simulator owns an integer tick counter (sim_time = tick * dt) and
integrates the unicycle model with explicit Euler. Command durations round
up to whole ticks and drives expire exactly at tick boundaries, so a given
config and command schedule always reproduces bit-identical snapshots.

Collision handling is stall-on-contact: a tick's position update that
would violate wall, obstacle, or robot clearance is rejected (heading
still integrates). No bounce, no sliding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .commands import (
    AddressedCommand,
    Broadcast,
    Drive,
    Group,
    LedMode,
    LedSet,
    Stop,
)
from .errors import ConfigurationError, UnknownRobot


def wrap_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    wrapped = (theta + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if wrapped == -math.pi else wrapped


def duration_ticks(duration: float, dt: float) -> int:
    """Whole-tick duration, rounded up (with float-noise tolerance)."""
    return max(1, math.ceil(duration / dt - 1e-9))


@dataclass(frozen=True)
class Circle:
    x: float
    y: float
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ConfigurationError(f"radius must be > 0, got {self.radius}")


@dataclass(frozen=True)
class RobotPlacement:
    id: int
    x: float
    y: float
    theta: float = 0.0


@dataclass
class StageConfig:
    width: float = 2.0
    height: float = 2.0
    spotlights: list[Circle] = field(
        default_factory=lambda: [Circle(1.0, 1.0, 0.3)])
    obstacles: list[Circle] = field(default_factory=list)
    robot_radius: float = 0.05
    dt: float = 0.001
    v_max: float = 0.3
    omega_max: float = 2.0
    robots: Optional[list[RobotPlacement]] = None

    def __post_init__(self):
        for name in ("width", "height", "robot_radius", "dt",
                     "v_max", "omega_max"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"stage.{name} must be positive")
        for c in list(self.spotlights) + list(self.obstacles):
            if not (0 <= c.x <= self.width and 0 <= c.y <= self.height):
                raise ConfigurationError(
                    f"circle at ({c.x}, {c.y}) lies outside the stage")
        if self.robots is not None:
            for p in self.robots:
                if not self._inside(p.x, p.y):
                    raise ConfigurationError(
                        f"robot {p.id} initial pose outside drivable area")

    def _inside(self, x: float, y: float) -> bool:
        r = self.robot_radius
        return r <= x <= self.width - r and r <= y <= self.height - r

    def default_placements(self, robot_ids: Iterable[int]) -> list[RobotPlacement]:
        """Line the robots up through the stage center, facing +x."""
        ids = sorted(robot_ids)
        n = len(ids)
        spacing = 4.0 * self.robot_radius
        return [
            RobotPlacement(id=rid,
                           x=self.width / 2 + (i - (n - 1) / 2) * spacing,
                           y=self.height / 2,
                           theta=0.0)
            for i, rid in enumerate(ids)
        ]


@dataclass(frozen=True)
class LedState:
    mode: LedMode = LedMode.OFF
    rgb: tuple[int, int, int] = (255, 255, 255)
    period: float = 0.0
    phase_tick: int = 0
    on: bool = False


@dataclass(frozen=True)
class ActiveDrive:
    v: float
    omega: float
    expires_tick: int


@dataclass(frozen=True)
class RobotState:
    id: int
    x: float
    y: float
    theta: float
    drive: Optional[ActiveDrive] = None
    led: LedState = field(default_factory=LedState)


@dataclass(frozen=True)
class SnapshotRobot:
    id: int
    x: float
    y: float
    theta: float
    led_on: bool
    led_rgb: tuple[int, int, int]
    in_spotlight: bool


@dataclass(frozen=True)
class StageSnapshot:
    sim_time: float
    robots: tuple[SnapshotRobot, ...]

    def to_json_obj(self) -> dict:
        return {
            "t": self.sim_time,
            "robots": [
                {
                    "id": r.id,
                    "x": r.x,
                    "y": r.y,
                    "theta": r.theta,
                    "led": {"on": r.led_on, "rgb": list(r.led_rgb)},
                    "spot": r.in_spotlight,
                }
                for r in self.robots
            ],
        }


def in_spotlight(robot: RobotState, config: StageConfig) -> bool:
    """True iff the robot center is within (inclusive) a spotlight disc."""
    return any(
        math.hypot(robot.x - s.x, robot.y - s.y) <= s.radius
        for s in config.spotlights
    )


class Stage:
    """The stage simulator. Commands are applied at tick boundaries in
    arrival order; step() advances whole ticks."""

    def __init__(self, config: Optional[StageConfig] = None,
                 robot_ids: Optional[Iterable[int]] = None):
        self.config = config or StageConfig()
        placements = self.config.robots
        if placements is None:
            placements = self.config.default_placements(
                robot_ids if robot_ids is not None else [0, 1, 2])
        self._robots: dict[int, RobotState] = {}
        for p in placements:
            if p.id in self._robots:
                raise ConfigurationError(f"duplicate robot id {p.id}")
            self._robots[p.id] = RobotState(
                id=p.id, x=p.x, y=p.y, theta=wrap_angle(p.theta))
        self.tick = 0

    @property
    def sim_time(self) -> float:
        return self.tick * self.config.dt

    @property
    def robot_ids(self) -> list[int]:
        return sorted(self._robots)

    def robot(self, robot_id: int) -> RobotState:
        try:
            return self._robots[robot_id]
        except KeyError:
            raise UnknownRobot(robot_id) from None

    def has_active_drives(self) -> bool:
        return any(r.drive is not None for r in self._robots.values())

    # -- commands -------------------------------------------------------------

    def apply_command(self, cmd: AddressedCommand) -> None:
        if isinstance(cmd.address, Group):
            raise ValueError(
                "group addresses must be expanded before reaching the stage")
        if isinstance(cmd.address, Broadcast):
            targets = sorted(self._robots)
        else:
            if cmd.address.id not in self._robots:
                raise UnknownRobot(cmd.address.id)
            targets = [cmd.address.id]
        for rid in targets:
            self._robots[rid] = self._apply_action(self._robots[rid],
                                                   cmd.action)

    def _apply_action(self, robot: RobotState, action) -> RobotState:
        if isinstance(action, Drive):
            v = max(-self.config.v_max, min(self.config.v_max, action.v))
            omega = max(-self.config.omega_max,
                        min(self.config.omega_max, action.omega))
            expires = self.tick + duration_ticks(action.duration,
                                                 self.config.dt)
            return replace(robot, drive=ActiveDrive(v, omega, expires))
        if isinstance(action, Stop):
            return replace(robot, drive=None)
        if isinstance(action, LedSet):
            return replace(robot, led=self._apply_led(robot.led, action))
        raise TypeError(f"unknown action {action!r}")

    def _apply_led(self, led: LedState, action: LedSet) -> LedState:
        if action.mode is LedMode.OFF:
            return LedState(mode=LedMode.OFF, rgb=action.rgb, on=False)
        if action.mode is LedMode.SOLID:
            return LedState(mode=LedMode.SOLID, rgb=action.rgb, on=True)
        if action.mode is LedMode.TOGGLE:
            # Flip between off and solid; a running strobe is cancelled at
            # its current visible state.
            now_on = not led.on
            return LedState(mode=LedMode.SOLID if now_on else LedMode.OFF,
                            rgb=action.rgb, on=now_on)
        if action.mode is LedMode.STROBE:
            return LedState(mode=LedMode.STROBE, rgb=action.rgb,
                            period=action.period, phase_tick=self.tick,
                            on=True)
        raise TypeError(f"unknown led mode {action.mode!r}")

    # -- time -----------------------------------------------------------------

    def step(self, n: int = 1) -> StageSnapshot:
        """Advance n ticks and return the resulting snapshot."""
        if n < 1:
            raise ValueError(f"step count must be >= 1, got {n}")
        for _ in range(n):
            self._tick_once()
        return self.snapshot()

    def step_to_time(self, t: float) -> StageSnapshot:
        """Advance until sim_time covers t (whole ticks, never backwards)."""
        target = math.ceil(t / self.config.dt - 1e-9)
        if target > self.tick:
            return self.step(target - self.tick)
        return self.snapshot()

    def _tick_once(self) -> None:
        dt = self.config.dt
        ordered = sorted(self._robots)
        for rid in ordered:
            robot = self._robots[rid]
            drive = robot.drive
            if drive is None:
                continue
            if self.tick >= drive.expires_tick:
                self._robots[rid] = replace(robot, drive=None)
                continue
            nx = robot.x + drive.v * math.cos(robot.theta) * dt
            ny = robot.y + drive.v * math.sin(robot.theta) * dt
            ntheta = wrap_angle(robot.theta + drive.omega * dt)
            if not self._position_clear(rid, nx, ny):
                nx, ny = robot.x, robot.y  # stall; heading still integrates
            self._robots[rid] = replace(robot, x=nx, y=ny, theta=ntheta)
        self.tick += 1
        self._expire_and_strobe()

    def _expire_and_strobe(self) -> None:
        for rid, robot in self._robots.items():
            if robot.drive is not None and self.tick >= robot.drive.expires_tick:
                robot = replace(robot, drive=None)
            if robot.led.mode is LedMode.STROBE:
                robot = replace(robot, led=self._strobe_state(robot.led))
            self._robots[rid] = robot

    def _strobe_state(self, led: LedState) -> LedState:
        period_ticks = max(2, round(led.period / self.config.dt))
        on_span = period_ticks - period_ticks // 2
        phase = (self.tick - led.phase_tick) % period_ticks
        return replace(led, on=phase < on_span)

    def _position_clear(self, rid: int, x: float, y: float) -> bool:
        cfg = self.config
        r = cfg.robot_radius
        if not (r <= x <= cfg.width - r and r <= y <= cfg.height - r):
            return False
        for obs in cfg.obstacles:
            if math.hypot(x - obs.x, y - obs.y) < obs.radius + r:
                return False
        for other_id, other in self._robots.items():
            if other_id == rid:
                continue
            if math.hypot(x - other.x, y - other.y) < 2.0 * r:
                return False
        return True

    # -- observation ----------------------------------------------------------

    def snapshot(self) -> StageSnapshot:
        robots = tuple(
            SnapshotRobot(
                id=r.id, x=r.x, y=r.y, theta=r.theta,
                led_on=r.led.on, led_rgb=r.led.rgb,
                in_spotlight=in_spotlight(r, self.config),
            )
            for r in (self._robots[rid] for rid in sorted(self._robots))
        )
        return StageSnapshot(sim_time=self.sim_time, robots=robots)
