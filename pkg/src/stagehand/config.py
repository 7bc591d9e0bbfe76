"""Engine configuration: one document, one section per subsystem.

Sections: gesture (detection thresholds), roles (command magnitudes and
the finger map), stage (simulator geometry), link (robot roster), input
(trace/live source), api (control service). YAML and JSON both load.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import yaml

from .errors import ConfigurationError
from .gestures import GestureConfig
from .landmarks import DEFAULT_LANDMARK_PORT
from .roles import FingerMap, RoleParams
from .stage import Circle, RobotPlacement, StageConfig

DEFAULT_API_PORT = 7400
DEFAULT_SNAPSHOT_HZ = 30.0

SIM_ENDPOINT = "sim"


@dataclass(frozen=True)
class RemoteEndpoint:
    host: str
    port: int


RobotEndpoint = Union[str, RemoteEndpoint]  # "sim" or a remote address


@dataclass
class EngineConfig:
    gesture: GestureConfig = field(default_factory=GestureConfig)
    roles: RoleParams = field(default_factory=RoleParams)
    finger_map: Optional[FingerMap] = None
    stage: StageConfig = field(default_factory=StageConfig)
    # Robot roster: id -> "sim" or RemoteEndpoint. The stage simulates the
    # "sim" entries; remote entries get datagrams.
    roster: dict[int, RobotEndpoint] = field(
        default_factory=lambda: {0: SIM_ENDPOINT, 1: SIM_ENDPOINT,
                                 2: SIM_ENDPOINT})
    trace_path: Optional[str] = None
    trace_speed: float = 1.0
    landmark_port: int = DEFAULT_LANDMARK_PORT
    api_port: int = DEFAULT_API_PORT
    snapshot_hz: float = DEFAULT_SNAPSHOT_HZ

    def __post_init__(self):
        if not self.roster:
            raise ConfigurationError("link.roster must name at least one robot")
        ids = list(self.roster)
        if len(set(ids)) != len(ids):
            raise ConfigurationError("link.roster ids must be unique")
        if not self.snapshot_hz > 0:
            raise ConfigurationError("api.snapshot_hz must be positive")

    def sim_robot_ids(self) -> list[int]:
        return sorted(rid for rid, ep in self.roster.items()
                      if ep == SIM_ENDPOINT)

    def remote_robots(self) -> dict[int, RemoteEndpoint]:
        return {rid: ep for rid, ep in self.roster.items()
                if isinstance(ep, RemoteEndpoint)}

    def to_json_obj(self) -> dict:
        return {
            "gesture": {k: getattr(self.gesture, k)
                        for k in GestureConfig.__dataclass_fields__},
            "roles": {
                **{k: getattr(self.roles, k)
                   for k in RoleParams.__dataclass_fields__
                   if k != "led_rgb"},
                "led_rgb": list(self.roles.led_rgb),
                "finger_map": (self.finger_map.to_json_obj()
                               if self.finger_map else None),
            },
            "stage": {
                "width": self.stage.width,
                "height": self.stage.height,
                "robot_radius": self.stage.robot_radius,
                "dt": self.stage.dt,
                "v_max": self.stage.v_max,
                "omega_max": self.stage.omega_max,
                "spotlights": [{"x": c.x, "y": c.y, "radius": c.radius}
                               for c in self.stage.spotlights],
                "obstacles": [{"x": c.x, "y": c.y, "radius": c.radius}
                              for c in self.stage.obstacles],
            },
            "link": {
                "roster": {
                    str(rid): (ep if ep == SIM_ENDPOINT
                               else f"{ep.host}:{ep.port}")
                    for rid, ep in sorted(self.roster.items())
                }
            },
            "api": {"port": self.api_port, "snapshot_hz": self.snapshot_hz},
        }


def _section(doc: dict, name: str) -> dict:
    sect = doc.get(name, {})
    if sect is None:
        return {}
    if not isinstance(sect, dict):
        raise ConfigurationError(f"config section {name!r} must be a mapping")
    return sect


def _circles(items, where: str) -> list[Circle]:
    out = []
    for i, item in enumerate(items or []):
        try:
            out.append(Circle(float(item["x"]), float(item["y"]),
                              float(item["radius"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"{where}[{i}]: {exc}") from exc
    return out


def _parse_endpoint(value, where: str) -> RobotEndpoint:
    if value == SIM_ENDPOINT:
        return SIM_ENDPOINT
    if isinstance(value, str) and ":" in value:
        host, _, port = value.rpartition(":")
        try:
            return RemoteEndpoint(host=host, port=int(port))
        except ValueError as exc:
            raise ConfigurationError(f"{where}: bad port in {value!r}") from exc
    raise ConfigurationError(
        f"{where}: endpoint must be 'sim' or 'host:port', got {value!r}")


def config_from_obj(doc: dict) -> EngineConfig:
    """Build an EngineConfig from a parsed config document, with
    section/field-scoped diagnostics."""
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigurationError("config document must be a mapping")
    known = {"gesture", "roles", "stage", "link", "input", "api"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")

    try:
        gesture = GestureConfig.from_mapping(_section(doc, "gesture"))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"gesture: {exc}") from exc

    roles_sect = dict(_section(doc, "roles"))
    finger_map_obj = roles_sect.pop("finger_map", None)
    try:
        if "led_rgb" in roles_sect:
            roles_sect["led_rgb"] = tuple(roles_sect["led_rgb"])
        roles = RoleParams.from_mapping(roles_sect)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"roles: {exc}") from exc
    finger_map = None
    if finger_map_obj:
        try:
            finger_map = FingerMap.from_names(finger_map_obj)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"roles.finger_map: {exc}") from exc

    stage_sect = dict(_section(doc, "stage"))
    try:
        robots = None
        if "robots" in stage_sect:
            robots = [
                RobotPlacement(id=int(r["id"]), x=float(r["x"]),
                               y=float(r["y"]),
                               theta=float(r.get("theta", 0.0)))
                for r in stage_sect.pop("robots")
            ]
        stage = StageConfig(
            width=float(stage_sect.pop("width", 2.0)),
            height=float(stage_sect.pop("height", 2.0)),
            spotlights=(_circles(stage_sect.pop("spotlights"),
                                 "stage.spotlights")
                        if "spotlights" in stage_sect
                        else [Circle(1.0, 1.0, 0.3)]),
            obstacles=_circles(stage_sect.pop("obstacles", []),
                               "stage.obstacles"),
            robot_radius=float(stage_sect.pop("robot_radius", 0.05)),
            dt=float(stage_sect.pop("dt", 0.001)),
            v_max=float(stage_sect.pop("v_max", 0.3)),
            omega_max=float(stage_sect.pop("omega_max", 2.0)),
            robots=robots,
        )
        if stage_sect:
            raise ConfigurationError(
                f"unknown stage config keys: {sorted(stage_sect)}")
    except ConfigurationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"stage: {exc}") from exc

    link_sect = _section(doc, "link")
    roster_obj = link_sect.get("roster",
                               {0: SIM_ENDPOINT, 1: SIM_ENDPOINT,
                                2: SIM_ENDPOINT})
    roster: dict[int, RobotEndpoint] = {}
    for rid, value in roster_obj.items():
        try:
            rid_int = int(rid)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(
                f"link.roster: robot id {rid!r} is not an integer") from exc
        roster[rid_int] = _parse_endpoint(value, f"link.roster[{rid_int}]")

    input_sect = _section(doc, "input")
    trace_speed = input_sect.get("trace_speed", 1.0)
    if trace_speed == "max":
        trace_speed = float("inf")

    api_sect = _section(doc, "api")

    try:
        return EngineConfig(
            gesture=gesture,
            roles=roles,
            finger_map=finger_map,
            stage=stage,
            roster=roster,
            trace_path=input_sect.get("trace"),
            trace_speed=float(trace_speed),
            landmark_port=int(input_sect.get("landmark_port",
                                             DEFAULT_LANDMARK_PORT)),
            api_port=int(api_sect.get("port", DEFAULT_API_PORT)),
            snapshot_hz=float(api_sect.get("snapshot_hz",
                                           DEFAULT_SNAPSHOT_HZ)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> EngineConfig:
    """Load a YAML (or JSON) config file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"{path}: invalid YAML: {exc}") from exc
    try:
        return config_from_obj(doc)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
