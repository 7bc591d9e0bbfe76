"""Synthetic hand-gesture traces: the ground-truth oracle for the recognizer.

Each generator builds a kinematically clean performance of one gesture from
a canonical flat-hand template, sampled at 50 Hz. Motions are sized roughly
2x above the default detection thresholds so that sigma=0 traces trigger
exactly the intended event and nothing else. Optional Gaussian jitter
(per coordinate, seeded) models tracker noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .landmarks import (
    FINGER_ANGLE_JOINTS,
    FINGER_TIPS,
    Finger,
    HandFrame,
    Handedness,
    NUM_LANDMARKS,
    PALM_CENTROID_INDICES,
    axis_vector,
)

SAMPLE_RATE_HZ = 50.0
_DT = 1.0 / SAMPLE_RATE_HZ


class SyntheticKind(Enum):
    OPEN_PALM_HOLD = "open_palm_hold"
    FIST_HOLD = "fist_hold"
    INDEX_POINT_HOLD = "index_point_hold"
    PALM_PUSH = "palm_push"
    FIST_PULL = "fist_pull"
    GRASP_THEN_ROTATE = "grasp_then_rotate"
    FINGER_FLICK = "finger_flick"
    FIST_ROTATE = "fist_rotate"
    WAND_VERTICAL_FLICK = "wand_vertical_flick"
    WAND_HORIZONTAL_SWISH = "wand_horizontal_swish"


class SynthDirection(Enum):
    LEFT = "left"
    RIGHT = "right"


_HOLD_KINDS = (
    SyntheticKind.OPEN_PALM_HOLD,
    SyntheticKind.FIST_HOLD,
    SyntheticKind.INDEX_POINT_HOLD,
)
_DIRECTED_KINDS = (
    SyntheticKind.GRASP_THEN_ROTATE,
    SyntheticKind.FIST_ROTATE,
    SyntheticKind.WAND_HORIZONTAL_SWISH,
)

# Natural phase lengths (seconds) per kind; traces may be extended with a
# trailing hold via the duration parameter but never compressed.
_NATURAL_DURATION = {
    SyntheticKind.OPEN_PALM_HOLD: 1.0,
    SyntheticKind.FIST_HOLD: 1.0,
    SyntheticKind.INDEX_POINT_HOLD: 1.0,
    SyntheticKind.PALM_PUSH: 0.2 + 0.25 + 0.3,
    SyntheticKind.FIST_PULL: 0.2 + 0.25 + 0.3,
    SyntheticKind.GRASP_THEN_ROTATE: 0.2 + 0.3 + 0.1 + 0.5 + 0.3,
    SyntheticKind.FINGER_FLICK: 0.2 + 0.06 + 0.5,
    SyntheticKind.FIST_ROTATE: 0.3 + 0.5 + 0.3,
    SyntheticKind.WAND_VERTICAL_FLICK: 0.2 + 0.15 + 0.35,
    SyntheticKind.WAND_HORIZONTAL_SWISH: 0.2 + 0.2 + 0.4,
}


@dataclass(frozen=True)
class SyntheticGesture:
    """One synthetic gesture performance: kind plus generation parameters.

    amplitude scales the motion magnitude (1.0 = ~2x detection threshold),
    noise_sigma is the per-coordinate Gaussian jitter, forward_axis names
    the camera axis the recognizer treats as "forward".
    """

    kind: SyntheticKind
    duration: Optional[float] = None
    amplitude: float = 1.0
    noise_sigma: float = 0.0
    direction: Optional[SynthDirection] = None
    finger: Optional[Finger] = None
    forward_axis: str = "+x"

    def __post_init__(self):
        if self.duration is not None and not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be > 0, got {self.amplitude}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise sigma must be >= 0, got {self.noise_sigma}")
        if self.kind is SyntheticKind.FINGER_FLICK and self.finger is None:
            raise ValueError("finger_flick requires a finger")
        if self.kind in _DIRECTED_KINDS and self.direction is None:
            raise ValueError(f"{self.kind.value} requires a direction")
        axis_vector(self.forward_axis)  # validates the axis name
        natural = _NATURAL_DURATION[self.kind]
        if self.duration is not None and self.kind not in _HOLD_KINDS \
                and self.duration < natural:
            raise ValueError(
                f"{self.kind.value} needs at least {natural} s, "
                f"got {self.duration}"
            )

    def total_duration(self) -> float:
        natural = _NATURAL_DURATION[self.kind]
        if self.duration is None:
            return natural
        if self.kind in _HOLD_KINDS:
            return self.duration
        return max(self.duration, natural)


# --- hand template ---------------------------------------------------------

# Canonical right hand, fingers pointing up (-y), knuckle row horizontal so
# the neutral wrist roll is exactly zero. All z = 0 (flat in camera plane).
_WRIST = (0.50, 0.72)
_THUMB_CMC = (0.41, 0.67)
_THUMB_MCP = (0.36, 0.62)
_THUMB_DIR = (-0.6, -0.8)  # unit vector
_MCP_X = {Finger.INDEX: 0.39, Finger.MIDDLE: 0.46,
          Finger.RING: 0.53, Finger.PINKY: 0.60}
_MCP_Y = 0.55
_SEG = (0.09, 0.05, 0.04)  # proximal, middle, distal lengths


def _rot2(v: np.ndarray, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def hand_pose_points(curl: dict[Finger, float], roll: float = 0.0,
                     shift: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Build a (21, 3) landmark array.

    curl gives the bend angle at each finger's middle joint (0 = straight,
    pi/2 = fully curled); roll rotates the whole hand about the knuckle
    centroid; shift translates everything.
    """
    pts = np.zeros((NUM_LANDMARKS, 2))
    pts[0] = _WRIST

    # Thumb: CMC/MCP fixed, distal chain bends at the IP joint.
    pts[1] = _THUMB_CMC
    pts[2] = _THUMB_MCP
    d = np.asarray(_THUMB_DIR)
    ip = pts[2] + 0.05 * d
    pts[3] = ip
    bend = curl.get(Finger.THUMB, 0.0)
    pts[4] = ip + 0.045 * _rot2(d, bend)

    for finger in (Finger.INDEX, Finger.MIDDLE, Finger.RING, Finger.PINKY):
        mcp_i, pip_i, tip_i = FINGER_ANGLE_JOINTS[finger]
        dip_i = pip_i + 1
        mcp = np.array([_MCP_X[finger], _MCP_Y])
        pts[mcp_i] = mcp
        pip = mcp + np.array([0.0, -_SEG[0]])
        pts[pip_i] = pip
        up = np.array([0.0, -1.0])
        bent = _rot2(up, curl.get(finger, 0.0))
        pts[dip_i] = pip + _SEG[1] * bent
        pts[tip_i] = pip + (_SEG[1] + _SEG[2]) * bent

    if roll != 0.0:
        center = pts[list(PALM_CENTROID_INDICES)].mean(axis=0)
        rel = pts - center
        c, s = math.cos(roll), math.sin(roll)
        pts = center + rel @ np.array([[c, s], [-s, c]])

    pts = pts + np.asarray(shift)
    out = np.zeros((NUM_LANDMARKS, 3))
    out[:, :2] = pts
    return out


_OPEN = {f: 0.0 for f in Finger}
_FIST = {f: math.pi / 2 for f in Finger}
_POINT = {f: (0.0 if f is Finger.INDEX else math.pi / 2) for f in Finger}


def _smooth(u: float) -> float:
    """Raised-cosine ramp from 0 to 1 over u in [0, 1]."""
    u = min(max(u, 0.0), 1.0)
    return 0.5 * (1.0 - math.cos(math.pi * u))


def _phase(t: float, start: float, length: float) -> float:
    """Progress of t through [start, start+length], clamped to [0, 1]."""
    if length <= 0:
        return 1.0 if t >= start else 0.0
    return min(max((t - start) / length, 0.0), 1.0)


def synthesize_gesture_trace(spec: SyntheticGesture, seed: int) -> list[HandFrame]:
    """Generate the deterministic frame sequence for one gesture performance."""
    amp = spec.amplitude
    axis = axis_vector(spec.forward_axis)
    sign = {SynthDirection.RIGHT: 1.0, SynthDirection.LEFT: -1.0}
    total = spec.total_duration()
    n_frames = int(round(total / _DT)) + 1

    def sample(t: float) -> np.ndarray:
        k = spec.kind
        if k is SyntheticKind.OPEN_PALM_HOLD:
            return hand_pose_points(_OPEN)
        if k is SyntheticKind.FIST_HOLD:
            return hand_pose_points(_FIST)
        if k is SyntheticKind.INDEX_POINT_HOLD:
            return hand_pose_points(_POINT)
        if k is SyntheticKind.PALM_PUSH:
            # Translate the whole hand forward at 1.5 u/s for 0.25 s.
            dist = amp * 1.5 * (min(max(t - 0.2, 0.0), 0.25))
            return hand_pose_points(_OPEN, shift=tuple(dist * axis))
        if k is SyntheticKind.FIST_PULL:
            dist = amp * 1.5 * (min(max(t - 0.2, 0.0), 0.25))
            return hand_pose_points(_FIST, shift=tuple(-dist * axis))
        if k is SyntheticKind.GRASP_THEN_ROTATE:
            bend = (math.pi / 2) * _phase(t, 0.2, 0.3)
            roll = sign[spec.direction] * amp * 0.6 * _phase(t, 0.6, 0.5)
            return hand_pose_points({f: bend for f in Finger}, roll=roll)
        if k is SyntheticKind.FIST_ROTATE:
            roll = sign[spec.direction] * amp * 0.6 * _phase(t, 0.3, 0.5)
            return hand_pose_points(_FIST, roll=roll)
        if k is SyntheticKind.FINGER_FLICK:
            # Only the flicked finger's tip gets the velocity spike.
            pts = hand_pose_points(_OPEN)
            disp = amp * 0.12 * _smooth(_phase(t, 0.2, 0.06))
            tip = FINGER_TIPS[spec.finger]
            pts[tip, :2] += disp * axis
            return pts
        if k is SyntheticKind.WAND_VERTICAL_FLICK:
            disp = amp * 0.24 * _smooth(_phase(t, 0.2, 0.15))
            return hand_pose_points(_POINT, shift=(0.0, disp))
        if k is SyntheticKind.WAND_HORIZONTAL_SWISH:
            disp = sign[spec.direction] * amp * 0.30 * _smooth(_phase(t, 0.2, 0.2))
            return hand_pose_points(_POINT, shift=(disp, 0.0))
        raise AssertionError(f"unhandled kind {k}")

    rng = np.random.default_rng(seed) if spec.noise_sigma > 0 else None
    frames = []
    for i in range(n_frames):
        t = i * _DT
        pts = sample(t)
        if rng is not None:
            pts = pts + rng.normal(0.0, spec.noise_sigma, pts.shape)
        frames.append(HandFrame(t=t, handedness=Handedness.RIGHT, points=pts))
    return frames


def intended_events(spec: SyntheticGesture) -> list[dict]:
    """The exact event kinds (with payload) the recognizer must emit for
    this trace under the default configuration. Hold kinds expect none."""
    k = spec.kind
    if k in _HOLD_KINDS:
        return []
    if k is SyntheticKind.PALM_PUSH:
        return [{"kind": "palm_push"}]
    if k is SyntheticKind.FIST_PULL:
        return [{"kind": "fist_pull"}]
    if k is SyntheticKind.GRASP_THEN_ROTATE:
        return [{"kind": "grasp_rotate", "direction": spec.direction.value}]
    if k is SyntheticKind.FINGER_FLICK:
        return [{"kind": "finger_flick", "finger": spec.finger.name.lower()}]
    if k is SyntheticKind.FIST_ROTATE:
        return [{"kind": "fist_rotate", "direction": spec.direction.value}]
    if k is SyntheticKind.WAND_VERTICAL_FLICK:
        return [{"kind": "wand_vertical_flick"}]
    if k is SyntheticKind.WAND_HORIZONTAL_SWISH:
        return [{"kind": "wand_horizontal_swish",
                 "direction": spec.direction.value}]
    raise AssertionError(f"unhandled kind {k}")


def all_oracle_specs() -> list[SyntheticGesture]:
    """One representative spec per synthetic kind (the 10-kind oracle set)."""
    return [
        SyntheticGesture(SyntheticKind.OPEN_PALM_HOLD),
        SyntheticGesture(SyntheticKind.FIST_HOLD),
        SyntheticGesture(SyntheticKind.INDEX_POINT_HOLD),
        SyntheticGesture(SyntheticKind.PALM_PUSH),
        SyntheticGesture(SyntheticKind.FIST_PULL),
        SyntheticGesture(SyntheticKind.GRASP_THEN_ROTATE,
                         direction=SynthDirection.RIGHT),
        SyntheticGesture(SyntheticKind.FINGER_FLICK, finger=Finger.INDEX),
        SyntheticGesture(SyntheticKind.FIST_ROTATE,
                         direction=SynthDirection.LEFT),
        SyntheticGesture(SyntheticKind.WAND_VERTICAL_FLICK),
        SyntheticGesture(SyntheticKind.WAND_HORIZONTAL_SWISH,
                         direction=SynthDirection.RIGHT),
    ]
