"""Hand-landmark stream: frame type, trace IO, replay, and live TCP ingest.

Frames carry 21 landmarks in normalized camera coordinates (+x rightward,
+y downward, z relative depth). Everything downstream consumes HandFrame
values, whether they come from a recorded trace, a synthetic generator, or
an external tracker pushing newline-delimited JSON over a socket.

Trace format (UTF-8 JSON Lines, one frame per line):

    {"t": <seconds>, "hand": "left"|"right", "pts": [[x, y, z] * 21]}
"""

from __future__ import annotations

import json
import math
import queue
import socket
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    BadLandmarkCount,
    MalformedRecord,
    NonMonotonicTime,
    OutOfRange,
)

# Landmark indices (standard 21-point hand layout).
WRIST = 0
THUMB_CMC, THUMB_MCP, THUMB_IP, THUMB_TIP = 1, 2, 3, 4
INDEX_MCP, INDEX_PIP, INDEX_DIP, INDEX_TIP = 5, 6, 7, 8
MIDDLE_MCP, MIDDLE_PIP, MIDDLE_DIP, MIDDLE_TIP = 9, 10, 11, 12
RING_MCP, RING_PIP, RING_DIP, RING_TIP = 13, 14, 15, 16
PINKY_MCP, PINKY_PIP, PINKY_DIP, PINKY_TIP = 17, 18, 19, 20

NUM_LANDMARKS = 21

# Trackers emit slightly off-frame landmarks; rejecting them would drop
# usable frames, so the accepted x/y range is wider than [0, 1].
COORD_MIN = -0.5
COORD_MAX = 1.5

# Palm landmarks whose mean is the push/pull centroid: the MCP knuckle row.
PALM_CENTROID_INDICES = (INDEX_MCP, MIDDLE_MCP, RING_MCP, PINKY_MCP)

DEFAULT_LANDMARK_PORT = 7401

# Camera-frame axis names used for motion directions ("forward" etc.).
_AXIS_VECTORS = {
    "+x": (1.0, 0.0),
    "-x": (-1.0, 0.0),
    "+y": (0.0, 1.0),
    "-y": (0.0, -1.0),
}


def axis_vector(axis: str) -> np.ndarray:
    """Unit (x, y) vector for an axis name in {+x, -x, +y, -y}."""
    try:
        return np.asarray(_AXIS_VECTORS[axis])
    except KeyError:
        raise ValueError(
            f"axis must be one of {sorted(_AXIS_VECTORS)}, got {axis!r}"
        ) from None


class Finger(Enum):
    THUMB = 0
    INDEX = 1
    MIDDLE = 2
    RING = 3
    PINKY = 4


# (proximal joint, middle joint, tip) used for the extension angle. The
# thumb bends at its IP joint, the other fingers at the PIP.
FINGER_ANGLE_JOINTS = {
    Finger.THUMB: (THUMB_MCP, THUMB_IP, THUMB_TIP),
    Finger.INDEX: (INDEX_MCP, INDEX_PIP, INDEX_TIP),
    Finger.MIDDLE: (MIDDLE_MCP, MIDDLE_PIP, MIDDLE_TIP),
    Finger.RING: (RING_MCP, RING_PIP, RING_TIP),
    Finger.PINKY: (PINKY_MCP, PINKY_PIP, PINKY_TIP),
}

FINGER_TIPS = {
    Finger.THUMB: THUMB_TIP,
    Finger.INDEX: INDEX_TIP,
    Finger.MIDDLE: MIDDLE_TIP,
    Finger.RING: RING_TIP,
    Finger.PINKY: PINKY_TIP,
}


class Handedness(Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class HandFrame:
    """One timestamped sample of 21 hand landmarks.

    points is a read-only (21, 3) float array of (x, y, z).
    """

    t: float
    handedness: Handedness
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (NUM_LANDMARKS, 3):
            raise BadLandmarkCount(
                f"expected {NUM_LANDMARKS} landmarks, got shape {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise OutOfRange("landmark coordinates must be finite")
        xy = pts[:, :2]
        if np.any(xy < COORD_MIN) or np.any(xy > COORD_MAX):
            bad = int(np.argmax((xy < COORD_MIN) | (xy > COORD_MAX)) // 2)
            raise OutOfRange(
                f"landmark {bad} outside accepted range "
                f"[{COORD_MIN}, {COORD_MAX}]"
            )
        if self.t < 0:
            raise OutOfRange(f"frame time must be >= 0, got {self.t}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def palm_centroid(self) -> np.ndarray:
        """Mean (x, y) of the MCP knuckle row."""
        return self.points[list(PALM_CENTROID_INDICES), :2].mean(axis=0)


def parse_trace_line(line: str) -> HandFrame:
    """Parse one JSON-Lines trace record into a validated HandFrame."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedRecord("record must be a JSON object")
    for key in ("t", "hand", "pts"):
        if key not in obj:
            raise MalformedRecord(f"missing field {key!r}")
    try:
        t = float(obj["t"])
    except (TypeError, ValueError) as exc:
        raise MalformedRecord(f"bad timestamp: {obj['t']!r}") from exc
    if not math.isfinite(t):
        raise MalformedRecord(f"bad timestamp: {obj['t']!r}")
    try:
        hand = Handedness(obj["hand"])
    except ValueError as exc:
        raise MalformedRecord(f"bad handedness: {obj['hand']!r}") from exc
    pts = obj["pts"]
    if not isinstance(pts, list) or len(pts) != NUM_LANDMARKS:
        raise BadLandmarkCount(
            f"expected {NUM_LANDMARKS} landmarks, got "
            f"{len(pts) if isinstance(pts, list) else type(pts).__name__}"
        )
    for p in pts:
        if not isinstance(p, list) or len(p) != 3:
            raise MalformedRecord("each landmark must be an [x, y, z] triple")
    try:
        arr = np.asarray(pts, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise MalformedRecord("landmark coordinates must be numbers") from exc
    return HandFrame(t=t, handedness=hand, points=arr)


def frame_to_line(frame: HandFrame) -> str:
    """Serialize a frame to its canonical single-line JSON form."""
    record = {
        "t": frame.t,
        "hand": frame.handedness.value,
        "pts": [[float(c) for c in p] for p in frame.points],
    }
    return json.dumps(record, separators=(",", ":"))


def check_monotonic(frames: Iterable[HandFrame]) -> Iterator[HandFrame]:
    """Yield frames, raising NonMonotonicTime on a non-increasing timestamp."""
    prev = None
    for frame in frames:
        if prev is not None and frame.t <= prev:
            raise NonMonotonicTime(
                f"frame time {frame.t} does not increase past {prev}"
            )
        prev = frame.t
        yield frame


def load_trace(path) -> list[HandFrame]:
    """Read a JSON-Lines trace file into a validated, monotonic frame list."""
    frames: list[HandFrame] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                frames.append(parse_trace_line(line))
            except (MalformedRecord, BadLandmarkCount, OutOfRange) as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}") from exc
    return list(check_monotonic(frames))


def save_trace(path, frames: Sequence[HandFrame]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(frame_to_line(frame) + "\n")


def replay(
    trace: Sequence[HandFrame],
    speed: float = 1.0,
    sleep=time.sleep,
) -> Iterator[HandFrame]:
    """Yield trace frames with wall-clock spacing (t[i+1]-t[i]) / speed.

    speed=math.inf emits as fast as possible (no sleeping); frame contents
    are never modified. Timestamps are re-checked for monotonicity.
    """
    if not trace:
        return
    if not (speed > 0):
        raise ValueError(f"speed must be positive, got {speed}")
    prev_t = None
    for frame in trace:
        if prev_t is not None:
            if frame.t <= prev_t:
                raise NonMonotonicTime(
                    f"frame time {frame.t} does not increase past {prev_t}"
                )
            if math.isfinite(speed):
                sleep((frame.t - prev_t) / speed)
        prev_t = frame.t
        yield frame


class LandmarkListener:
    """TCP ingest for live landmark streams.

    Accepts one client at a time on the configured port and feeds parsed
    frames into a bounded queue consumed by the gesture engine. Malformed
    lines are counted and dropped so a flaky tracker cannot stall a show.
    """

    def __init__(self, port: int = DEFAULT_LANDMARK_PORT, host: str = "127.0.0.1",
                 max_queue: int = 256):
        self.host = host
        self.port = port
        self.frames: "queue.Queue[HandFrame]" = queue.Queue(maxsize=max_queue)
        self.bad_lines = 0
        self._stop = threading.Event()
        self._sock: socket.socket | None = None
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((self.host, self.port))
        self.port = self._sock.getsockname()[1]
        self._sock.listen(1)
        self._sock.settimeout(0.2)
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
        if self._sock is not None:
            self._sock.close()

    def _serve(self) -> None:
        assert self._sock is not None
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with conn:
                conn.settimeout(0.2)
                self._pump(conn)

    def _pump(self, conn: socket.socket) -> None:
        buf = b""
        while not self._stop.is_set():
            try:
                chunk = conn.recv(4096)
            except socket.timeout:
                continue
            except OSError:
                return
            if not chunk:
                return
            buf += chunk
            while b"\n" in buf:
                line, buf = buf.split(b"\n", 1)
                if not line.strip():
                    continue
                try:
                    frame = parse_trace_line(line.decode("utf-8"))
                except (MalformedRecord, BadLandmarkCount, OutOfRange,
                        UnicodeDecodeError):
                    self.bad_lines += 1
                    continue
                try:
                    self.frames.put(frame, timeout=1.0)
                except queue.Full:
                    self.bad_lines += 1
