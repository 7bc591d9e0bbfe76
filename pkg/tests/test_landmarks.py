import json
import math

import numpy as np
import pytest

from stagehand.errors import (
    BadLandmarkCount,
    MalformedRecord,
    NonMonotonicTime,
    OutOfRange,
)
from stagehand.landmarks import (
    HandFrame,
    Handedness,
    check_monotonic,
    frame_to_line,
    load_trace,
    parse_trace_line,
    replay,
    save_trace,
)


def make_record(t=0.0, hand="right", pts=None):
    if pts is None:
        pts = [[0.5, 0.5, 0.0]] * 21
    return json.dumps({"t": t, "hand": hand, "pts": pts})


def test_parse_identity_record():
    frame = parse_trace_line(make_record(t=0.0))
    assert frame.t == 0.0
    assert frame.handedness is Handedness.RIGHT
    assert frame.points.shape == (21, 3)
    assert np.all(frame.points[:, :2] == 0.5)


def test_parse_field_order_irrelevant():
    line = '{"pts": %s, "hand": "left", "t": 1.5}' % json.dumps(
        [[0.1, 0.2, 0.0]] * 21)
    frame = parse_trace_line(line)
    assert frame.t == 1.5
    assert frame.handedness is Handedness.LEFT


def test_parse_twenty_points_rejected():
    with pytest.raises(BadLandmarkCount):
        parse_trace_line(make_record(pts=[[0.5, 0.5, 0.0]] * 20))


def test_parse_out_of_range_coordinate():
    pts = [[0.5, 0.5, 0.0]] * 21
    pts[8] = [2.0, 0.5, 0.0]
    with pytest.raises(OutOfRange):
        parse_trace_line(make_record(pts=pts))


def test_parse_rejects_bad_syntax_and_missing_fields():
    with pytest.raises(MalformedRecord):
        parse_trace_line("not json at all")
    with pytest.raises(MalformedRecord):
        parse_trace_line('{"t": 0.0, "hand": "right"}')
    with pytest.raises(MalformedRecord):
        parse_trace_line(make_record(hand="both"))
    with pytest.raises(MalformedRecord):
        parse_trace_line('{"t": "nan", "hand": "right", "pts": []}')


def test_nonfinite_coordinates_rejected():
    pts = [[0.5, 0.5, 0.0]] * 21
    pts[3] = [0.5, 0.5, float("nan")]
    with pytest.raises((OutOfRange, MalformedRecord)):
        parse_trace_line(make_record(pts=pts))


def test_slightly_offframe_landmarks_accepted():
    pts = [[0.5, 0.5, 0.0]] * 21
    pts[0] = [-0.4, 1.4, -0.1]
    frame = parse_trace_line(make_record(pts=pts))
    assert frame.points[0, 0] == -0.4


def test_round_trip_serialization():
    rng = np.random.default_rng(7)
    for _ in range(20):
        pts = rng.uniform(-0.4, 1.4, (21, 3))
        frame = HandFrame(t=float(rng.uniform(0, 100)),
                          handedness=Handedness.LEFT, points=pts)
        again = parse_trace_line(frame_to_line(frame))
        assert again.t == frame.t
        assert again.handedness == frame.handedness
        assert np.array_equal(again.points, frame.points)
        # serializing twice is byte-stable
        assert frame_to_line(again) == frame_to_line(frame)


def test_trace_file_round_trip(tmp_path):
    frames = [
        parse_trace_line(make_record(t=0.0)),
        parse_trace_line(make_record(t=0.1, hand="left")),
    ]
    path = tmp_path / "trace.jsonl"
    save_trace(path, frames)
    loaded = load_trace(path)
    assert len(loaded) == 2
    assert [frame_to_line(f) for f in loaded] == [frame_to_line(f) for f in frames]


def test_load_trace_checks_monotonic(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(make_record(t=0.1) + "\n" + make_record(t=0.1) + "\n")
    with pytest.raises(NonMonotonicTime):
        load_trace(path)


def test_check_monotonic_passthrough():
    frames = [parse_trace_line(make_record(t=t)) for t in (0.0, 0.5, 1.0)]
    assert list(check_monotonic(frames)) == frames


def test_replay_spacing_scales_with_speed():
    frames = [parse_trace_line(make_record(t=t)) for t in (0.0, 0.1)]
    sleeps: list[float] = []
    out = list(replay(frames, speed=1.0, sleep=sleeps.append))
    assert out == frames
    assert sleeps == pytest.approx([0.1])
    sleeps.clear()
    list(replay(frames, speed=2.0, sleep=sleeps.append))
    assert sleeps == pytest.approx([0.05])


def test_replay_max_speed_never_sleeps():
    frames = [parse_trace_line(make_record(t=t)) for t in (0.0, 0.1, 0.2)]
    sleeps: list[float] = []
    out = list(replay(frames, speed=math.inf, sleep=sleeps.append))
    assert len(out) == 3
    assert sleeps == []


def test_replay_rejects_non_monotonic_and_bad_speed():
    f = parse_trace_line(make_record(t=0.1))
    with pytest.raises(NonMonotonicTime):
        list(replay([f, f], speed=math.inf))
    with pytest.raises(ValueError):
        list(replay([f], speed=0.0))


def test_replay_preserves_content_for_any_speed():
    frames = [parse_trace_line(make_record(t=t)) for t in (0.0, 0.2, 0.4)]
    for speed in (0.5, 1.0, 3.0, math.inf):
        out = list(replay(frames, speed=speed, sleep=lambda _: None))
        assert [frame_to_line(f) for f in out] == \
            [frame_to_line(f) for f in frames]


def test_frame_points_are_read_only():
    frame = parse_trace_line(make_record())
    with pytest.raises(ValueError):
        frame.points[0, 0] = 9.0
