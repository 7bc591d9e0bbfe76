"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to watch them live). All criteria run headless.
"""

import dataclasses
import json
import math
import socket
import threading
import time

import numpy as np

from stagehand.agent import RobotAgent
from stagehand.commands import (
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
from stagehand.config import EngineConfig, config_from_obj
from stagehand.cues import (
    InjectGesture,
    builtin_dance_demo,
    builtin_lightning,
    builtin_old_macdonald,
)
from stagehand.engine import Engine, command_lines, replay_log
from stagehand.errors import WireError
from stagehand.gestures import (
    Direction,
    GestureEvent,
    GestureKind,
    GestureRecognizer,
)
from stagehand.landmarks import Finger
from stagehand.roles import FingerMap, Role, RoleController, RoleParams
from stagehand.stage import RobotPlacement, Stage, StageConfig, wrap_angle
from stagehand.synth import (
    SynthDirection,
    SyntheticGesture,
    SyntheticKind,
    all_oracle_specs,
    intended_events,
    synthesize_gesture_trace,
)
from stagehand.wire import decode, encode_command, encode_ping


def report(criterion: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'} {criterion}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


def run_recognizer(trace):
    rec = GestureRecognizer()
    events = []
    for frame in trace:
        events.extend(rec.update(frame))
    events.extend(rec.finish())
    return [
        {k: v for k, v in e.to_json_obj().items()
         if k in ("kind", "direction", "finger")}
        for e in events
    ]


def test_criterion_1_gesture_oracle_suite():
    """10/10 intended events at sigma=0; >=90% exact and 0% wrong-kind at
    sigma=0.005 over 50 seeds each; under 30 s."""
    started = time.monotonic()
    clean_ok = 0
    for spec in all_oracle_specs():
        got = run_recognizer(synthesize_gesture_trace(spec, seed=0))
        if got == intended_events(spec):
            clean_ok += 1
    noisy_ok = True
    details = []
    for base in all_oracle_specs():
        spec = dataclasses.replace(base, noise_sigma=0.005)
        want = intended_events(spec)
        want_kinds = {e["kind"] for e in want}
        exact = 0
        wrong = 0
        for seed in range(50):
            got = run_recognizer(synthesize_gesture_trace(spec, seed=seed))
            if got == want:
                exact += 1
            if any(e["kind"] not in want_kinds for e in got):
                wrong += 1
        details.append(f"{spec.kind.value}:{exact}/50")
        if exact < 45 or wrong != 0:
            noisy_ok = False
    elapsed = time.monotonic() - started
    report(
        "criterion 1: gesture oracle suite",
        clean_ok == 10 and noisy_ok and elapsed < 30.0,
        f"clean {clean_ok}/10, noisy [{', '.join(details)}], {elapsed:.1f}s",
    )


def _expected_mapping(role, event, params, fmap):
    """Independent statement of the full role x event mapping table."""
    k, d, f = event.kind, event.direction, event.finger
    sign = {Direction.LEFT: 1.0, Direction.RIGHT: -1.0}
    p = params
    if role is Role.DIRECTOR:
        table = {
            GestureKind.PALM_PUSH: [(Broadcast(), Drive(p.director_v, 0.0, p.director_drive_dur))],
            GestureKind.FIST_PULL: [(Broadcast(), Drive(-p.director_v, 0.0, p.director_drive_dur))],
            GestureKind.GRASP_ROTATE: [(Broadcast(), Drive(0.0, sign[d] * p.director_omega, p.director_turn_dur))] if d else [],
        }
        return table.get(k, [])
    if role is Role.PUPPETEER:
        if k is GestureKind.FINGER_FLICK:
            rid = fmap.get(f)
            return ([(Robot(rid), Drive(p.puppeteer_v, 0.0, p.puppeteer_dur))]
                    if rid is not None else [])
        if k is GestureKind.FIST_ROTATE:
            return [(Robot(rid), Drive(0.0, sign[d] * p.director_omega,
                                       p.director_turn_dur))
                    for rid in fmap.robot_ids()]
        return []
    if role is Role.WIZARD:
        if k is GestureKind.WAND_VERTICAL_FLICK:
            return [(Broadcast(), LedSet(LedMode.TOGGLE, p.led_rgb))]
        if k is GestureKind.WAND_HORIZONTAL_SWISH:
            return [(Broadcast(), Drive(p.wizard_v, sign[d] * p.wizard_omega,
                                        p.wizard_dur))]
        return []
    if role is Role.HYBRID:
        if k is GestureKind.FINGER_FLICK:
            rid = fmap.get(f)
            return ([(Robot(rid), Drive(p.puppeteer_v, 0.0, p.puppeteer_dur))]
                    if rid is not None else [])
        if k is GestureKind.WAND_VERTICAL_FLICK:
            return [(Group("mapped"), LedSet(LedMode.TOGGLE, p.led_rgb))]
        if k is GestureKind.WAND_HORIZONTAL_SWISH:
            return [(Group("mapped"), Drive(p.wizard_v,
                                            sign[d] * p.wizard_omega,
                                            p.wizard_dur))]
        return []
    raise AssertionError(role)


def test_criterion_2_role_mapping_table():
    """Exhaustive (role x event) matrix including all empty cells, plus
    end-to-end puppeteer isolation with bit-unchanged bystander poses."""
    params = RoleParams()
    fmap = FingerMap({Finger.INDEX: 1, Finger.MIDDLE: 2})
    events = [
        GestureEvent(GestureKind.PALM_PUSH, 1.0, 1.0),
        GestureEvent(GestureKind.FIST_PULL, 1.0, 1.0),
        GestureEvent(GestureKind.GRASP_ROTATE, 1.0, 1.0, Direction.LEFT),
        GestureEvent(GestureKind.GRASP_ROTATE, 1.0, 1.0, Direction.RIGHT),
        GestureEvent(GestureKind.FIST_ROTATE, 1.0, 1.0, Direction.LEFT),
        GestureEvent(GestureKind.FIST_ROTATE, 1.0, 1.0, Direction.RIGHT),
        *[GestureEvent(GestureKind.FINGER_FLICK, 1.0, 1.0, finger=f)
          for f in Finger],
        GestureEvent(GestureKind.WAND_VERTICAL_FLICK, 1.0, 1.0),
        GestureEvent(GestureKind.WAND_HORIZONTAL_SWISH, 1.0, 1.0,
                     Direction.LEFT),
        GestureEvent(GestureKind.WAND_HORIZONTAL_SWISH, 1.0, 1.0,
                     Direction.RIGHT),
    ]
    cells = 0
    for role in Role:
        controller = RoleController(params, fmap)
        controller.set_role(role)
        for event in events:
            got = [(c.address, c.action) for c in controller.interpret(event)]
            want = _expected_mapping(role, event, params, fmap)
            assert got == want, f"{role.value} x {event.kind.value}"
            cells += 1

    config = config_from_obj({"roles": {"finger_map": {"index": 1}}})
    engine = Engine(config, lockstep=True)
    engine.set_role(Role.PUPPETEER)
    before = {rid: engine.stage.robot(rid) for rid in engine.stage.robot_ids}
    engine.replay_trace(synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FINGER_FLICK, finger=Finger.INDEX), 0))
    engine.settle()
    after = {rid: engine.stage.robot(rid) for rid in engine.stage.robot_ids}
    isolated = (
        after[1].x > before[1].x
        and all((after[r].x, after[r].y, after[r].theta)
                == (before[r].x, before[r].y, before[r].theta)
                for r in (0, 2))
    )
    engine.close()
    report("criterion 2: role mapping table", cells == len(Role) * len(events)
           and isolated, f"{cells} cells, puppeteer isolation e2e")


def test_criterion_3_kinematics():
    """Straight line and pure rotation exact to 1e-9; the arc case within
    1e-3 m of the closed form at dt=1e-3; under 5 s."""
    started = time.monotonic()
    stage = Stage(StageConfig(robots=[RobotPlacement(id=0, x=0.5, y=1.0)]))
    stage.apply_command(AddressedCommand(Robot(0), Drive(0.1, 0.0, 2.0)))
    stage.step(2000)
    r = stage.robot(0)
    straight_ok = (abs(r.x - 0.7) < 1e-9 and abs(r.y - 1.0) < 1e-9
                   and abs(r.theta) < 1e-9)

    stage = Stage(StageConfig(robots=[RobotPlacement(id=0, x=1.0, y=1.0)]))
    stage.apply_command(AddressedCommand(Robot(0),
                                         Drive(0.0, math.pi / 2, 1.0)))
    stage.step(1000)
    rotation_ok = abs(stage.robot(0).theta - math.pi / 2) < 1e-9

    stage = Stage(StageConfig(robots=[RobotPlacement(id=0, x=1.0, y=0.5)]))
    stage.apply_command(AddressedCommand(Robot(0), Drive(0.1, 1.0, math.pi)))
    stage.step(4000)
    r = stage.robot(0)
    pos_err = math.hypot(r.x - 1.0, r.y - 0.7)  # closed form: (0, 0.2) offset
    theta_err = abs(wrap_angle(r.theta - math.pi))
    arc_ok = pos_err < 1e-3 and theta_err < 1e-3
    elapsed = time.monotonic() - started
    report("criterion 3: kinematics", straight_ok and rotation_ok and arc_ok
           and elapsed < 5.0,
           f"arc err {pos_err * 1000:.3f} mm, {elapsed:.2f}s")


def test_criterion_4_protocol():
    """decode(encode) identity over 1e5 randomized commands, the two
    hand-computed vectors bit-exact, every single-byte corruption rejected."""
    assert encode_command(AddressedCommand(BROADCAST, Drive(0.15, 0.0, 0.6))) \
        == bytes.fromhex("a501ff01009600000258" + "96")
    assert encode_command(AddressedCommand(Robot(3), STOP)) == \
        bytes.fromhex("a5010303a4")

    rng = np.random.default_rng(2024)
    n = 100_000
    checked = 0
    for _ in range(n):
        kind = rng.integers(0, 3)
        rid = int(rng.integers(0, 256))
        address = BROADCAST if rid == 255 else Robot(rid)
        if kind == 0:
            action = Drive(int(rng.integers(-300, 301)) / 1000.0,
                           int(rng.integers(-2000, 2001)) / 1000.0,
                           int(rng.integers(1, 5001)) / 1000.0)
        elif kind == 1:
            mode = [LedMode.OFF, LedMode.SOLID, LedMode.TOGGLE,
                    LedMode.STROBE][int(rng.integers(0, 4))]
            period = (int(rng.integers(1, 60001)) / 1000.0
                      if mode is LedMode.STROBE
                      else int(rng.integers(0, 60001)) / 1000.0)
            action = LedSet(mode, (int(rng.integers(0, 256)),
                                   int(rng.integers(0, 256)),
                                   int(rng.integers(0, 256))), period)
        else:
            action = STOP
        cmd = AddressedCommand(address, action)
        decoded = decode(encode_command(cmd))
        assert decoded.address == cmd.address and decoded.action == cmd.action
        checked += 1

    corruptions = 0
    for packet in (
        encode_command(AddressedCommand(BROADCAST, Drive(0.15, 0.0, 0.6))),
        encode_command(AddressedCommand(Robot(3), STOP)),
        encode_command(AddressedCommand(Robot(9),
                                        LedSet(LedMode.STROBE, (1, 2, 3),
                                               0.25))),
        encode_ping(4),
    ):
        for pos in range(len(packet)):
            for delta in range(1, 256):
                corrupted = bytearray(packet)
                corrupted[pos] = (corrupted[pos] + delta) % 256
                try:
                    decode(bytes(corrupted))
                except WireError:
                    corruptions += 1
                else:
                    report("criterion 4: protocol", False,
                           f"corruption accepted at byte {pos}")
    report("criterion 4: protocol", True,
           f"{checked} round trips, {corruptions} corruptions rejected")


def test_criterion_5_distributed_conformance():
    """A scripted 20-command sequence lands stage-sim and a robot agent
    (over loopback datagrams) within 2 mm / 2 mrad of each other."""
    agent = RobotAgent(robot_id=3, port=0, tick_ms=1.0, telemetry_ms=200.0)
    agent.bind()
    thread = threading.Thread(target=agent.run, daemon=True)
    thread.start()

    stage = Stage(StageConfig(robots=[RobotPlacement(id=3, x=1.0, y=1.0)]))
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.settimeout(2.0)
    rng = np.random.default_rng(7)
    try:
        for i in range(20):
            v = int(rng.integers(-120, 121)) / 1000.0
            omega = int(rng.integers(-1500, 1501)) / 1000.0
            duration = int(rng.integers(150, 301)) / 1000.0
            cmd = AddressedCommand(Robot(3), Drive(v, omega, duration))
            sock.sendto(encode_command(cmd), ("127.0.0.1", agent.port))
            stage.apply_command(cmd)
            stage.step_to_time(stage.sim_time + duration + 0.05)
            time.sleep(duration + 0.12)
        # drain stale telemetry, then ping for the settled pose
        sock.settimeout(0.05)
        while True:
            try:
                sock.recvfrom(2048)
            except socket.timeout:
                break
        sock.settimeout(2.0)
        sock.sendto(encode_ping(3), ("127.0.0.1", agent.port))
        state = decode(sock.recvfrom(2048)[0])
    finally:
        agent.stop()
        thread.join(timeout=2.0)
        sock.close()

    ref = stage.robot(3)
    pos_err = math.hypot(state.x - ref.x, state.y - ref.y)
    theta_err = abs(wrap_angle(state.theta - ref.theta))
    report("criterion 5: distributed conformance",
           pos_err <= 0.002 and theta_err <= 0.002,
           f"pos err {pos_err * 1000:.3f} mm, theta err "
           f"{theta_err * 1000:.3f} mrad")


def test_criterion_6_scenario_reproductions():
    """old_macdonald marks within 0.05 m; lightning parity; dance_demo
    bit-identical snapshot traces; under 60 s total."""
    started = time.monotonic()

    engine = Engine(EngineConfig(), lockstep=True)
    poses = {rid: engine.stage.robot(rid) for rid in engine.stage.robot_ids}
    marks = [(0, (0.5, 0.5)), (1, (1.0, 1.5)), (2, (1.5, 0.6))]
    seq = builtin_old_macdonald(marks, poses, engine.config.stage,
                                engine.config.roles)
    engine.run_script(seq, settle=True)
    errors = [math.hypot(engine.stage.robot(rid).x - tx,
                         engine.stage.robot(rid).y - ty)
              for rid, (tx, ty) in marks]
    engine.close()
    blocking_ok = all(err < 0.05 for err in errors)

    parity_ok = True
    for n in (1, 2, 3):
        engine = Engine(EngineConfig(), lockstep=True)
        initial = [r.led_on for r in engine.latest_snapshot.robots]
        engine.run_script(builtin_lightning(n, 0.4))
        final = [r.led_on for r in engine.latest_snapshot.robots]
        engine.close()
        if (final != initial) is not (n % 2 == 1):
            parity_ok = False

    def dance_snapshots():
        lines = []
        engine = Engine(EngineConfig(), record_sink=lines.append,
                        lockstep=True)
        engine.run_script(builtin_dance_demo())
        engine.close()
        return [l for l in lines if json.loads(l)["type"] == "snapshot"]

    dance_ok = dance_snapshots() == dance_snapshots()
    elapsed = time.monotonic() - started
    report("criterion 6: scenario reproductions",
           blocking_ok and parity_ok and dance_ok and elapsed < 60.0,
           f"marks {[f'{e * 1000:.1f}mm' for e in errors]}, parity ok, "
           f"dance identical, {elapsed:.1f}s")


def _shift_trace(frames, offset):
    from stagehand.landmarks import HandFrame
    return [HandFrame(t=f.t + offset, handedness=f.handedness,
                      points=np.array(f.points)) for f in frames]


def test_criterion_7_record_replay_closure():
    """Replaying a recorded run's input log reproduces an identical
    command log (byte-diff empty)."""
    config_obj = {"roles": {"finger_map": {"index": 1, "middle": 2}}}
    lines = []
    engine = Engine(config_from_obj(config_obj), record_sink=lines.append,
                    lockstep=True)
    engine.set_role(Role.DIRECTOR)
    engine.replay_trace(synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.PALM_PUSH), 1), finish=False)
    engine.replay_trace(_shift_trace(synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.GRASP_THEN_ROTATE,
                         direction=SynthDirection.RIGHT), 2), 1.0),
        finish=False)
    engine.set_role(Role.PUPPETEER)
    engine.inject_gesture(InjectGesture(GestureKind.FINGER_FLICK,
                                        finger=Finger.MIDDLE))
    engine.run_script(builtin_lightning(3, 0.4))
    engine.apply_direct(AddressedCommand(Robot(0), Drive(0.05, 0.0, 0.5)))
    engine.finish_input()
    engine.settle()
    engine.close()

    original = command_lines(lines)
    reproduced = command_lines(replay_log(config_from_obj(config_obj), lines))
    report("criterion 7: record/replay closure",
           len(original) >= 8 and original == reproduced,
           f"{len(original)} command records, byte-diff empty")
