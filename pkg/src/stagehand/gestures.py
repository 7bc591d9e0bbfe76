"""Gesture recognition: pose classification plus windowed motion detectors.

The recognizer is a single-threaded state machine: one frame in, zero or
more completed GestureEvents out. Poses come from per-finger extension
angles with hysteresis; dynamic gestures are detected over sliding windows
of displacement and speed so that single-frame jitter cannot flip them.

Finger flicks are measured in the palm frame (tip motion relative to the
knuckle centroid): a marionette flick moves a finger against the hand,
while whole-hand translation (push/pull/swish) moves everything together.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DegenerateGeometry, NonMonotonicTime
from .landmarks import (
    FINGER_ANGLE_JOINTS,
    FINGER_TIPS,
    Finger,
    HandFrame,
    INDEX_MCP,
    PINKY_MCP,
    axis_vector,
)

# Detector-internal completion constants (not part of the public config):
# a rotation is complete once its roll stops progressing for this long /
# by more than this much, and a grasp is an open-to-fist transition that
# finishes within this window.
ROLL_QUIET_TIME = 0.2
ROLL_PROGRESS_EPS = 0.02
GRASP_TRANSITION_MAX = 0.5

_EPS = 1e-9


class Direction(Enum):
    LEFT = "left"
    RIGHT = "right"


class HandPose(Enum):
    OPEN_PALM = "open_palm"
    FIST = "fist"
    INDEX_POINT = "index_point"
    OTHER = "other"


class GestureKind(Enum):
    PALM_PUSH = "palm_push"
    FIST_PULL = "fist_pull"
    GRASP_ROTATE = "grasp_rotate"
    FINGER_FLICK = "finger_flick"
    FIST_ROTATE = "fist_rotate"
    WAND_VERTICAL_FLICK = "wand_vertical_flick"
    WAND_HORIZONTAL_SWISH = "wand_horizontal_swish"


# Same-frame co-fire arbitration order (lower wins).
_PRIORITY = {
    GestureKind.GRASP_ROTATE: 0,
    GestureKind.FIST_ROTATE: 1,
    GestureKind.PALM_PUSH: 2,
    GestureKind.FIST_PULL: 3,
    GestureKind.WAND_VERTICAL_FLICK: 4,
    GestureKind.WAND_HORIZONTAL_SWISH: 5,
    GestureKind.FINGER_FLICK: 6,
}

_DIRECTED = (GestureKind.GRASP_ROTATE, GestureKind.FIST_ROTATE,
             GestureKind.WAND_HORIZONTAL_SWISH)


@dataclass(frozen=True)
class GestureEvent:
    """A completed dynamic gesture: kind, completion time, peak metric."""

    kind: GestureKind
    t: float
    strength: float
    direction: Optional[Direction] = None
    finger: Optional[Finger] = None

    def __post_init__(self):
        if not self.strength > 0:
            raise ValueError(f"strength must be > 0, got {self.strength}")
        if self.kind in _DIRECTED and self.direction is None:
            raise ValueError(f"{self.kind.value} requires a direction")
        if self.kind is GestureKind.FINGER_FLICK and self.finger is None:
            raise ValueError("finger_flick requires a finger")

    def to_json_obj(self) -> dict:
        obj: dict = {"kind": self.kind.value}
        if self.direction is not None:
            obj["direction"] = self.direction.value
        if self.finger is not None:
            obj["finger"] = self.finger.name.lower()
        obj["t"] = self.t
        obj["strength"] = self.strength
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "GestureEvent":
        kind = GestureKind(obj["kind"])
        direction = Direction(obj["direction"]) if "direction" in obj else None
        finger = Finger[obj["finger"].upper()] if "finger" in obj else None
        return cls(kind=kind, t=float(obj.get("t", 0.0)),
                   strength=float(obj.get("strength", 1.0)),
                   direction=direction, finger=finger)


@dataclass(frozen=True)
class FingerState:
    """Extension state of one finger: bend angle at the middle joint plus
    the hysteresis-filtered extended bit."""

    finger: Finger
    pip_angle: float
    extended: bool
    degenerate: bool = False


@dataclass
class GestureConfig:
    """Detection thresholds. All motion units are normalized-image units
    and seconds; angles are radians."""

    forward_axis: str = "+x"
    extension_on: float = math.radians(160.0)
    extension_off: float = math.radians(120.0)
    push_speed: float = 0.8
    push_min_displacement: float = 0.15
    push_min_duration: float = 0.15
    flick_peak_speed: float = 2.0
    flick_window: float = 0.12
    flick_min_displacement: float = 0.06
    flick_refractory: float = 0.3
    roll_threshold: float = 0.5
    roll_window: float = 0.7
    grasp_link_window: float = 1.0
    wand_vflick_displacement: float = 0.12
    wand_vflick_window: float = 0.2
    wand_hswish_displacement: float = 0.15
    wand_hswish_window: float = 0.3

    def __post_init__(self):
        axis_vector(self.forward_axis)
        for name in ("extension_on", "extension_off", "push_speed",
                     "push_min_displacement", "push_min_duration",
                     "flick_peak_speed", "flick_window",
                     "flick_min_displacement", "flick_refractory",
                     "roll_threshold", "roll_window", "grasp_link_window",
                     "wand_vflick_displacement", "wand_vflick_window",
                     "wand_hswish_displacement", "wand_hswish_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"gesture.{name} must be positive")
        if not self.extension_on > self.extension_off:
            raise ValueError(
                "gesture.extension_on must exceed extension_off "
                "(hysteresis band must be nonempty)"
            )

    @classmethod
    def from_mapping(cls, mapping: dict) -> "GestureConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown gesture config keys: {sorted(unknown)}")
        return cls(**mapping)


def finger_state(frame: HandFrame, finger: Finger,
                 prev: Optional[FingerState] = None,
                 config: Optional[GestureConfig] = None) -> FingerState:
    """Extension angle and hysteresis-filtered extended bit for one finger.

    The angle sits at the finger's middle joint (IP for the thumb, PIP
    otherwise) between the proximal and distal segment vectors, using all
    three coordinates. Degenerate geometry (a zero-length segment) keeps
    the previous state and flags the result.
    """
    cfg = config or _DEFAULT_CONFIG
    prox_i, mid_i, tip_i = FINGER_ANGLE_JOINTS[finger]
    mid = frame.points[mid_i]
    a = frame.points[prox_i] - mid
    b = frame.points[tip_i] - mid
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na < _EPS or nb < _EPS:
        if prev is not None:
            return replace(prev, degenerate=True)
        return FingerState(finger=finger, pip_angle=0.0, extended=False,
                           degenerate=True)
    cross = float(np.linalg.norm(np.cross(a, b)))
    dot = float(np.dot(a, b))
    angle = math.atan2(cross, dot)
    if angle >= cfg.extension_on:
        extended = True
    elif angle <= cfg.extension_off:
        extended = False
    else:
        extended = prev.extended if prev is not None else False
    return FingerState(finger=finger, pip_angle=angle, extended=extended)


_DEFAULT_CONFIG = GestureConfig()


def classify_pose(frame: HandFrame,
                  prev_states: Optional[dict[Finger, FingerState]] = None,
                  config: Optional[GestureConfig] = None) -> HandPose:
    """Classify the frame's static pose from finger extension states."""
    states = {
        f: finger_state(frame, f, (prev_states or {}).get(f), config)
        for f in Finger
    }
    return _pose_from_states(states)


def _pose_from_states(states: dict[Finger, FingerState]) -> HandPose:
    ext = {f: states[f].extended for f in Finger}
    curled_rest = not (ext[Finger.INDEX] or ext[Finger.MIDDLE]
                       or ext[Finger.RING] or ext[Finger.PINKY])
    if all(ext.values()):
        return HandPose.OPEN_PALM
    if curled_rest:
        return HandPose.FIST
    if ext[Finger.INDEX] and not (ext[Finger.MIDDLE] or ext[Finger.RING]
                                  or ext[Finger.PINKY]):
        return HandPose.INDEX_POINT
    return HandPose.OTHER


def wrist_roll(frame: HandFrame) -> float:
    """Orientation of the index-MCP to pinky-MCP knuckle line in the camera
    plane. Continuous unwrapping is the caller's job."""
    p5 = frame.points[INDEX_MCP]
    p17 = frame.points[PINKY_MCP]
    dx = float(p17[0] - p5[0])
    dy = float(p17[1] - p5[1])
    if abs(dx) < _EPS and abs(dy) < _EPS:
        raise DegenerateGeometry("knuckle landmarks coincide")
    return math.atan2(dy, dx)


def _wrap_pi(angle: float) -> float:
    wrapped = (angle + math.pi) % (2.0 * math.pi) - math.pi
    return math.pi if wrapped == -math.pi else wrapped


@dataclass
class _FrameRec:
    t: float
    pose: HandPose
    centroid: np.ndarray            # palm centroid (x, y)
    roll: float                     # unwrapped wrist roll
    tips: np.ndarray                # (5, 2) fingertip positions
    rel_tips: np.ndarray            # (5, 2) tips relative to palm centroid
    rel_tip_speeds: np.ndarray      # (5,) palm-frame speeds since prev frame
    degenerate: bool = False


@dataclass
class _RotationPending:
    sign: float
    onset_t: float
    onset_roll: float
    max_abs: float
    t_max: float
    deadline: float
    linked: bool


@dataclass
class _FlickPending:
    close_t: float
    # finger -> (peak palm-frame speed, time of qualification)
    candidates: dict = field(default_factory=dict)


class GestureRecognizer:
    """Streaming recognizer for the full gesture vocabulary.

    Deterministic: identical frame sequences and config produce identical
    event sequences. Call update() per frame and finish() at end-of-stream
    to flush gestures still in progress.
    """

    def __init__(self, config: Optional[GestureConfig] = None,
                 debug_sink: Optional[Callable[[dict], None]] = None):
        self.config = config or GestureConfig()
        self._axis = axis_vector(self.config.forward_axis)
        self._debug = debug_sink
        cfg = self.config
        self._horizon = max(1.0, cfg.roll_window, cfg.wand_hswish_window,
                            cfg.wand_vflick_window, cfg.flick_window,
                            2.0 * cfg.push_min_duration) + 0.5
        self._hist: deque[_FrameRec] = deque()
        self._states: dict[Finger, FingerState] = {}
        self._last_t: Optional[float] = None
        self._prev_pose: Optional[HandPose] = None
        self._prev_raw_roll: Optional[float] = None
        self._roll_acc = 0.0
        self._openpalm_exit_t: Optional[float] = None
        self._grasp_t: Optional[float] = None
        self._rot_pending: Optional[_RotationPending] = None
        self._rot_reset_t = -math.inf
        self._flick_pending: Optional[_FlickPending] = None
        self._last_flick_t = {f: -math.inf for f in Finger}
        self._push_latched = False
        self._pull_latched = False
        self._vflick_latched = False
        self._hswish_latched = False
        self.degenerate_frames = 0

    # -- frame ingestion ----------------------------------------------------

    def update(self, frame: HandFrame) -> list[GestureEvent]:
        """Process one frame; return completed events (usually 0 or 1)."""
        if self._last_t is not None and frame.t <= self._last_t:
            raise NonMonotonicTime(
                f"frame time {frame.t} does not increase past {self._last_t}"
            )
        rec = self._ingest(frame)
        self._last_t = frame.t
        fires = self._run_detectors(rec)
        if self._debug is not None:
            self._debug(self._debug_record(rec))
        return self._arbitrate(fires)

    def finish(self) -> list[GestureEvent]:
        """Flush gestures still pending at end-of-stream."""
        t = self._last_t if self._last_t is not None else 0.0
        fires: list[GestureEvent] = []
        if self._rot_pending is not None:
            fires.append(self._emit_rotation(t))
        if self._flick_pending is not None and self._flick_pending.candidates:
            ev = self._emit_flick(t)
            if ev is not None:
                fires.append(ev)
        self._flick_pending = None
        return self._arbitrate(fires)

    def _ingest(self, frame: HandFrame) -> _FrameRec:
        states = {
            f: finger_state(frame, f, self._states.get(f), self.config)
            for f in Finger
        }
        degenerate = any(s.degenerate for s in states.values())
        self._states = states
        pose = _pose_from_states(states)

        try:
            raw = wrist_roll(frame)
        except DegenerateGeometry:
            degenerate = True
            raw = self._prev_raw_roll if self._prev_raw_roll is not None else 0.0
        if self._prev_raw_roll is None:
            self._roll_acc = 0.0
        else:
            self._roll_acc += _wrap_pi(raw - self._prev_raw_roll)
        self._prev_raw_roll = raw

        centroid = frame.palm_centroid()
        tips = np.array([frame.points[FINGER_TIPS[f], :2] for f in Finger])
        rel_tips = tips - centroid
        if self._hist:
            prev = self._hist[-1]
            dt = frame.t - prev.t
            rel_tip_speeds = np.linalg.norm(rel_tips - prev.rel_tips,
                                            axis=1) / dt
        else:
            rel_tip_speeds = np.zeros(len(Finger))

        if degenerate:
            self.degenerate_frames += 1

        rec = _FrameRec(t=frame.t, pose=pose, centroid=centroid,
                        roll=self._roll_acc, tips=tips, rel_tips=rel_tips,
                        rel_tip_speeds=rel_tip_speeds, degenerate=degenerate)
        self._track_pose_transitions(rec)
        self._hist.append(rec)
        while self._hist and self._hist[0].t < frame.t - self._horizon:
            self._hist.popleft()
        return rec

    def _track_pose_transitions(self, rec: _FrameRec) -> None:
        prev_pose = self._prev_pose
        prev_t = self._hist[-1].t if self._hist else None
        if prev_pose is HandPose.OPEN_PALM and rec.pose is not HandPose.OPEN_PALM:
            self._openpalm_exit_t = prev_t
        if rec.pose is HandPose.OPEN_PALM:
            self._openpalm_exit_t = None
        if rec.pose is HandPose.FIST and prev_pose is not HandPose.FIST:
            if (self._openpalm_exit_t is not None
                    and rec.t - self._openpalm_exit_t <= GRASP_TRANSITION_MAX):
                self._grasp_t = rec.t
                self._openpalm_exit_t = None
        self._prev_pose = rec.pose

    # -- detectors ------------------------------------------------------------

    def _run_detectors(self, rec: _FrameRec) -> list[GestureEvent]:
        fires: list[GestureEvent] = []

        ev = self._update_rotation(rec)
        if ev is not None:
            fires.append(ev)

        push = self._scan_translation(rec, HandPose.OPEN_PALM, +1.0)
        if push is not None and not self._push_latched:
            fires.append(GestureEvent(kind=GestureKind.PALM_PUSH, t=rec.t,
                                      strength=push))
        self._push_latched = push is not None

        pull = self._scan_translation(rec, HandPose.FIST, -1.0)
        if pull is not None and not self._pull_latched:
            fires.append(GestureEvent(kind=GestureKind.FIST_PULL, t=rec.t,
                                      strength=pull))
        self._pull_latched = pull is not None

        vflick, hswish = self._scan_wand(rec)
        if vflick is not None and not self._vflick_latched:
            fires.append(GestureEvent(kind=GestureKind.WAND_VERTICAL_FLICK,
                                      t=rec.t, strength=vflick))
        self._vflick_latched = vflick is not None
        if hswish is not None and not self._hswish_latched:
            disp, direction = hswish
            fires.append(GestureEvent(kind=GestureKind.WAND_HORIZONTAL_SWISH,
                                      t=rec.t, strength=disp,
                                      direction=direction))
        self._hswish_latched = hswish is not None

        ev = self._update_flicks(rec)
        if ev is not None:
            fires.append(ev)

        return fires

    def _arbitrate(self, fires: list[GestureEvent]) -> list[GestureEvent]:
        """Emit only the highest-priority event when several detectors
        co-fire on one frame; losers were already consumed by their
        detectors' own latch state."""
        if not fires:
            return []
        fires.sort(key=lambda e: _PRIORITY[e.kind])
        return [fires[0]]

    def _scan_translation(self, rec: _FrameRec, pose: HandPose,
                          sign: float) -> Optional[float]:
        """Best sustained forward-axis speed of a qualifying push/pull
        window ending now, or None."""
        cfg = self.config
        if rec.pose is not pose:
            return None
        here = sign * float(rec.centroid @ self._axis)
        best = None
        for old in reversed(self._hist):
            if old is rec:
                continue
            if old.pose is not pose:
                break
            dt = rec.t - old.t
            if dt < cfg.push_min_duration - _EPS:
                continue
            disp = here - sign * float(old.centroid @ self._axis)
            if disp >= cfg.push_min_displacement - _EPS \
                    and disp / dt >= cfg.push_speed - _EPS:
                speed = disp / dt
                if best is None or speed > best:
                    best = speed
        return best

    def _update_rotation(self, rec: _FrameRec) -> Optional[GestureEvent]:
        cfg = self.config
        if rec.pose is not HandPose.FIST:
            if self._rot_pending is not None:
                return self._emit_rotation(rec.t)
            return None
        p = self._rot_pending
        if p is not None:
            delta = rec.roll - p.onset_roll
            if (math.copysign(1.0, delta) == p.sign
                    and abs(delta) > p.max_abs + ROLL_PROGRESS_EPS):
                p.max_abs = abs(delta)
                p.t_max = rec.t
                p.deadline = rec.t + ROLL_QUIET_TIME
            if rec.t >= p.deadline:
                return self._emit_rotation(rec.t)
            return None
        # Detection: latest in-window fist frame the roll has moved a full
        # threshold away from. That frame is the rotation onset.
        for old in reversed(self._hist):
            if old is rec:
                continue
            if old.pose is not HandPose.FIST:
                break
            if rec.t - old.t > cfg.roll_window + _EPS:
                break
            if old.t < self._rot_reset_t - _EPS:
                break
            delta = rec.roll - old.roll
            if abs(delta) >= cfg.roll_threshold - _EPS:
                linked = (
                    self._grasp_t is not None
                    and old.t - self._grasp_t <= cfg.grasp_link_window + _EPS
                    and old.t - self._grasp_t >= -_EPS
                )
                self._rot_pending = _RotationPending(
                    sign=math.copysign(1.0, delta),
                    onset_t=old.t,
                    onset_roll=old.roll,
                    max_abs=abs(delta),
                    t_max=rec.t,
                    deadline=rec.t + ROLL_QUIET_TIME,
                    linked=linked,
                )
                break
        return None

    def _emit_rotation(self, t: float) -> GestureEvent:
        p = self._rot_pending
        assert p is not None
        self._rot_pending = None
        self._rot_reset_t = p.t_max
        kind = GestureKind.GRASP_ROTATE if p.linked else GestureKind.FIST_ROTATE
        direction = Direction.RIGHT if p.sign > 0 else Direction.LEFT
        return GestureEvent(kind=kind, t=t, strength=p.max_abs,
                            direction=direction)

    def _update_flicks(self, rec: _FrameRec) -> Optional[GestureEvent]:
        cfg = self.config
        if rec.pose is not HandPose.INDEX_POINT:
            qualifying = self._scan_flick_candidates(rec)
            if qualifying:
                if self._flick_pending is None:
                    self._flick_pending = _FlickPending(
                        close_t=rec.t + cfg.flick_window)
                cands = self._flick_pending.candidates
                for f, peak in qualifying.items():
                    if f not in cands or peak > cands[f][0]:
                        cands[f] = (peak, rec.t)
        if self._flick_pending is not None \
                and rec.t >= self._flick_pending.close_t:
            return self._emit_flick(rec.t)
        return None

    def _scan_flick_candidates(self, rec: _FrameRec) -> dict[Finger, float]:
        cfg = self.config
        out: dict[Finger, float] = {}
        for i, f in enumerate(Finger):
            if rec.t - self._last_flick_t[f] < cfg.flick_refractory - _EPS:
                continue
            max_speed = 0.0
            best = None
            for old in reversed(self._hist):
                if old is not rec:
                    if rec.t - old.t > cfg.flick_window + _EPS:
                        break
                    disp = float((rec.rel_tips[i] - old.rel_tips[i])
                                 @ self._axis)
                    if disp >= cfg.flick_min_displacement - _EPS \
                            and max_speed >= cfg.flick_peak_speed - _EPS:
                        if best is None or max_speed > best:
                            best = max_speed
                # speeds are stored on the newer record of each segment, so
                # accumulating after the candidate check covers (t0, t].
                max_speed = max(max_speed, float(old.rel_tip_speeds[i]))
            if best is not None:
                out[f] = best
        return out

    def _emit_flick(self, t: float) -> Optional[GestureEvent]:
        pending = self._flick_pending
        self._flick_pending = None
        if pending is None or not pending.candidates:
            return None
        winner = max(pending.candidates.items(), key=lambda kv: kv[1][0])
        for f in pending.candidates:
            self._last_flick_t[f] = t
        return GestureEvent(kind=GestureKind.FINGER_FLICK, t=t,
                            strength=winner[1][0], finger=winner[0])

    def _scan_wand(self, rec: _FrameRec):
        """Returns (vflick strength or None, (hswish strength, dir) or None)."""
        cfg = self.config
        if rec.pose is not HandPose.INDEX_POINT:
            return None, None
        tip = rec.tips[Finger.INDEX.value]
        v_best = None
        h_best = None
        window = max(cfg.wand_vflick_window, cfg.wand_hswish_window)
        for old in reversed(self._hist):
            if old is rec:
                continue
            if old.pose is not HandPose.INDEX_POINT:
                break
            dt = rec.t - old.t
            if dt > window + _EPS:
                break
            d = tip - old.tips[Finger.INDEX.value]
            adx, ady = abs(float(d[0])), abs(float(d[1]))
            if dt <= cfg.wand_vflick_window + _EPS \
                    and ady >= cfg.wand_vflick_displacement - _EPS \
                    and ady >= 2.0 * adx:
                if v_best is None or ady > v_best:
                    v_best = ady
            if dt <= cfg.wand_hswish_window + _EPS \
                    and adx >= cfg.wand_hswish_displacement - _EPS \
                    and adx >= 2.0 * ady:
                if h_best is None or adx > h_best[0]:
                    direction = (Direction.RIGHT if d[0] > 0
                                 else Direction.LEFT)
                    h_best = (adx, direction)
        return v_best, h_best

    def _debug_record(self, rec: _FrameRec) -> dict:
        return {
            "t": rec.t,
            "pose": rec.pose.value,
            "roll": rec.roll,
            "fingers": {
                f.name.lower(): {
                    "angle": self._states[f].pip_angle,
                    "extended": self._states[f].extended,
                }
                for f in Finger
            },
            "degenerate": rec.degenerate,
            "rotation_pending": self._rot_pending is not None,
            "flick_pending": self._flick_pending is not None,
        }
