"""Stagehand: a gesture theater engine.

Hand-landmark streams become multi-robot behavior through three role
metaphors (director, puppeteer, wizard, plus their hybrid), driving an
in-process 2D stage simulator and remote robots over a binary datagram
protocol, with timed cue scripting and a live control API.
"""

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
    Stop,
)
from .config import EngineConfig, RemoteEndpoint, config_from_obj, load_config
from .cues import (
    BUILTIN_SEQUENCES,
    Cue,
    CueSequence,
    DirectCommand,
    InjectGesture,
    SetRoleCue,
    builtin_dance_demo,
    builtin_lightning,
    builtin_old_macdonald,
    load_sequence,
    save_sequence,
)
from .engine import Engine, RobotLink, command_lines, input_records, replay_log
from .gestures import (
    Direction,
    FingerState,
    GestureConfig,
    GestureEvent,
    GestureKind,
    GestureRecognizer,
    HandPose,
    classify_pose,
    finger_state,
    wrist_roll,
)
from .landmarks import (
    Finger,
    HandFrame,
    Handedness,
    LandmarkListener,
    frame_to_line,
    load_trace,
    parse_trace_line,
    replay,
    save_trace,
)
from .roles import FingerMap, Role, RoleController, RoleParams
from .stage import (
    Circle,
    RobotPlacement,
    RobotState,
    Stage,
    StageConfig,
    StageSnapshot,
    in_spotlight,
)
from .synth import (
    SyntheticGesture,
    SyntheticKind,
    SynthDirection,
    all_oracle_specs,
    intended_events,
    synthesize_gesture_trace,
)
from .wire import Ping, StateTelemetry, decode, encode_command, encode_ping

__version__ = "0.1.0"
