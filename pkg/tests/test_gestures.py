import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stagehand.errors import DegenerateGeometry, NonMonotonicTime
from stagehand.gestures import (
    GestureConfig,
    GestureKind,
    GestureRecognizer,
    HandPose,
    classify_pose,
    finger_state,
    wrist_roll,
)
from stagehand.landmarks import (
    Finger,
    HandFrame,
    Handedness,
    INDEX_MCP,
    INDEX_PIP,
    INDEX_TIP,
    PINKY_MCP,
)
from stagehand.synth import (
    SynthDirection,
    SyntheticGesture,
    SyntheticKind,
    all_oracle_specs,
    hand_pose_points,
    intended_events,
    synthesize_gesture_trace,
)


def frame_with(points_override: dict[int, tuple], t=0.0) -> HandFrame:
    pts = np.full((21, 3), 0.5)
    pts[:, 2] = 0.0
    for idx, p in points_override.items():
        pts[idx] = p
    return HandFrame(t=t, handedness=Handedness.RIGHT, points=pts)


def run_trace(trace, config=None):
    rec = GestureRecognizer(config)
    events = []
    for frame in trace:
        events.extend(rec.update(frame))
    events.extend(rec.finish())
    return events


def stripped(events):
    out = []
    for e in events:
        obj = {"kind": e.kind.value}
        if e.direction is not None:
            obj["direction"] = e.direction.value
        if e.finger is not None:
            obj["finger"] = e.finger.name.lower()
        out.append(obj)
    return out


# --- finger_state ------------------------------------------------------------

def test_collinear_joints_give_straight_angle():
    frame = frame_with({
        INDEX_MCP: (0.0, 0.0, 0.0),
        INDEX_PIP: (0.0, -0.1, 0.0),
        INDEX_TIP: (0.0, -0.2, 0.0),
    })
    state = finger_state(frame, Finger.INDEX)
    assert state.pip_angle == pytest.approx(math.pi)
    assert state.extended is True


def test_right_angle_is_curled():
    frame = frame_with({
        INDEX_MCP: (0.0, 0.0, 0.0),
        INDEX_PIP: (0.0, -0.1, 0.0),
        INDEX_TIP: (0.1, -0.1, 0.0),
    })
    state = finger_state(frame, Finger.INDEX)
    assert state.pip_angle == pytest.approx(math.pi / 2)
    assert state.extended is False


def make_angle_frame(angle_deg: float) -> HandFrame:
    # TIP-PIP is MCP-PIP rotated by angle_deg, so the PIP angle is exact.
    a = math.radians(angle_deg)
    tip = (0.1 * math.sin(a), -0.1 + 0.1 * math.cos(a), 0.0)
    return frame_with({
        INDEX_MCP: (0.0, 0.0, 0.0),
        INDEX_PIP: (0.0, -0.1, 0.0),
        INDEX_TIP: tip,
    })


def test_hysteresis_band_carries_previous_state():
    frame = make_angle_frame(140.0)
    prev_extended = finger_state(frame, Finger.INDEX)
    assert 2.0 < prev_extended.pip_angle < 2.9  # inside the band
    import dataclasses
    prev_true = dataclasses.replace(prev_extended, extended=True)
    prev_false = dataclasses.replace(prev_extended, extended=False)
    assert finger_state(frame, Finger.INDEX, prev_true).extended is True
    assert finger_state(frame, Finger.INDEX, prev_false).extended is False
    assert finger_state(frame, Finger.INDEX, None).extended is False


def test_oscillation_inside_band_never_flips_state():
    angles = [130, 150, 135, 155, 140, 145] * 3
    prev = None
    seen = set()
    for deg in angles:
        prev = finger_state(make_angle_frame(deg), Finger.INDEX, prev)
        seen.add(prev.extended)
    assert seen == {False}


def test_degenerate_geometry_keeps_previous_state():
    good = finger_state(make_angle_frame(170.0), Finger.INDEX)
    assert good.extended is True
    frame = frame_with({
        INDEX_MCP: (0.0, -0.1, 0.0),
        INDEX_PIP: (0.0, -0.1, 0.0),  # zero-length proximal segment
        INDEX_TIP: (0.0, -0.2, 0.0),
    })
    state = finger_state(frame, Finger.INDEX, prev=good)
    assert state.degenerate is True
    assert state.extended is True


# --- classify_pose -----------------------------------------------------------

def test_poses_from_synthetic_holds():
    open_frame = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.OPEN_PALM_HOLD), 0)[0]
    fist_frame = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FIST_HOLD), 0)[0]
    point_frame = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.INDEX_POINT_HOLD), 0)[0]
    assert classify_pose(open_frame) is HandPose.OPEN_PALM
    assert classify_pose(fist_frame) is HandPose.FIST
    assert classify_pose(point_frame) is HandPose.INDEX_POINT


def test_other_pose_for_partial_extension():
    pts = hand_pose_points({f: (0.0 if f in (Finger.INDEX, Finger.MIDDLE)
                                 else math.pi / 2) for f in Finger})
    frame = HandFrame(t=0.0, handedness=Handedness.RIGHT, points=pts)
    assert classify_pose(frame) is HandPose.OTHER


# --- wrist_roll ---------------------------------------------------------------

def test_wrist_roll_reference_directions():
    horizontal = frame_with({INDEX_MCP: (0.4, 0.5, 0.0),
                             PINKY_MCP: (0.6, 0.5, 0.0)})
    assert wrist_roll(horizontal) == pytest.approx(0.0)
    vertical = frame_with({INDEX_MCP: (0.5, 0.4, 0.0),
                           PINKY_MCP: (0.5, 0.6, 0.0)})
    assert wrist_roll(vertical) == pytest.approx(math.pi / 2)
    reversed_ = frame_with({INDEX_MCP: (0.6, 0.5, 0.0),
                            PINKY_MCP: (0.4, 0.5, 0.0)})
    assert wrist_roll(reversed_) == pytest.approx(math.pi)


def test_wrist_roll_degenerate():
    frame = frame_with({INDEX_MCP: (0.5, 0.5, 0.0),
                        PINKY_MCP: (0.5, 0.5, 0.0)})
    with pytest.raises(DegenerateGeometry):
        wrist_roll(frame)


@given(phi=st.floats(min_value=-3.1, max_value=3.1))
@settings(max_examples=50, deadline=None)
def test_wrist_roll_equivariance(phi):
    base = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.OPEN_PALM_HOLD), 0)[0]
    pts = np.array(base.points)
    center = np.array([0.5, 0.5])
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, s], [-s, c]])
    pts[:, :2] = center + (pts[:, :2] - center) @ rot
    rotated = HandFrame(t=0.0, handedness=Handedness.RIGHT, points=pts)
    expected = wrist_roll(base) + phi
    got = wrist_roll(rotated)
    diff = (got - expected + math.pi) % (2 * math.pi) - math.pi
    assert abs(diff) < 1e-9


# --- detectors -----------------------------------------------------------------

def test_grasp_then_rotate_emits_exactly_grasp_rotate_right():
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.GRASP_THEN_ROTATE,
                         direction=SynthDirection.RIGHT), 0)
    assert stripped(run_trace(trace)) == \
        [{"kind": "grasp_rotate", "direction": "right"}]


def test_fist_rotate_left_without_grasp():
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FIST_ROTATE,
                         direction=SynthDirection.LEFT), 0)
    events = run_trace(trace)
    assert stripped(events) == [{"kind": "fist_rotate", "direction": "left"}]


def test_static_open_palm_emits_nothing():
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.OPEN_PALM_HOLD), 0)
    assert run_trace(trace) == []


@pytest.mark.parametrize("spec", all_oracle_specs(),
                         ids=lambda s: s.kind.value)
def test_oracle_soundness_at_zero_noise(spec):
    trace = synthesize_gesture_trace(spec, 0)
    assert stripped(run_trace(trace)) == intended_events(spec)


@pytest.mark.parametrize("finger", list(Finger), ids=lambda f: f.name.lower())
def test_flick_targets_only_the_moved_finger(finger):
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FINGER_FLICK, finger=finger), 0)
    events = run_trace(trace)
    assert stripped(events) == \
        [{"kind": "finger_flick", "finger": finger.name.lower()}]


def test_determinism_identical_inputs_identical_events():
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.GRASP_THEN_ROTATE,
                         direction=SynthDirection.LEFT, noise_sigma=0.005), 3)
    a = [(e.kind, e.t, e.strength, e.direction, e.finger)
         for e in run_trace(trace)]
    b = [(e.kind, e.t, e.strength, e.direction, e.finger)
         for e in run_trace(trace)]
    assert a == b


def test_event_times_nondecreasing_and_in_range():
    for spec in all_oracle_specs():
        trace = synthesize_gesture_trace(spec, 0)
        events = run_trace(trace)
        times = [e.t for e in events]
        assert times == sorted(times)
        for t in times:
            assert 0.0 <= t <= trace[-1].t


def test_flick_refractory_blocks_rapid_repeat():
    # Two tip spikes close together, a third well separated: the middle
    # one falls inside the per-finger refractory window.
    dt = 0.02
    base = hand_pose_points({f: 0.0 for f in Finger})
    tip = 8  # index tip
    frames = []
    spikes = [0.2, 0.44, 1.2]

    def tip_offset(t):
        total = 0.0
        for s in spikes:
            u = min(max((t - s) / 0.06, 0.0), 1.0)
            total += 0.12 * 0.5 * (1 - math.cos(math.pi * u))
        return total

    n = int(1.8 / dt) + 1
    for i in range(n):
        t = i * dt
        pts = np.array(base)
        pts[tip, 0] += tip_offset(t)
        frames.append(HandFrame(t=t, handedness=Handedness.RIGHT, points=pts))
    events = run_trace(frames)
    flicks = [e for e in events if e.kind is GestureKind.FINGER_FLICK]
    assert len(flicks) == 2
    assert flicks[1].t - flicks[0].t >= GestureConfig().flick_refractory


def test_update_rejects_non_monotonic_frames():
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FIST_HOLD), 0)
    rec = GestureRecognizer()
    rec.update(trace[1])
    with pytest.raises(NonMonotonicTime):
        rec.update(trace[0])


def test_config_validation():
    with pytest.raises(ValueError):
        GestureConfig(extension_on=1.0, extension_off=2.0)
    with pytest.raises(ValueError):
        GestureConfig(push_speed=0.0)
    with pytest.raises(ValueError):
        GestureConfig.from_mapping({"no_such_key": 1.0})
    cfg = GestureConfig.from_mapping({"push_speed": 1.0, "forward_axis": "-y"})
    assert cfg.push_speed == 1.0


def test_forward_axis_is_respected():
    spec = SyntheticGesture(SyntheticKind.PALM_PUSH, forward_axis="+y")
    trace = synthesize_gesture_trace(spec, 0)
    # default config looks along +x: the +y push must not register
    assert run_trace(trace) == []
    events = run_trace(trace, GestureConfig(forward_axis="+y"))
    assert stripped(events) == [{"kind": "palm_push"}]


def test_debug_sink_sees_every_frame():
    sink = []
    rec = GestureRecognizer(debug_sink=sink.append)
    trace = synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FIST_HOLD), 0)
    for frame in trace:
        rec.update(frame)
    assert len(sink) == len(trace)
    assert sink[0]["pose"] == "fist"
    assert set(sink[0]["fingers"]) == {f.name.lower() for f in Finger}
