import json
import subprocess
import sys

from stagehand.cli import main
from stagehand.landmarks import save_trace
from stagehand.synth import SyntheticGesture, SyntheticKind, synthesize_gesture_trace


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "stagehand.cli", *args],
        capture_output=True, text=True, timeout=120)


def test_script_list():
    result = run_cli("script", "list")
    assert result.returncode == 0
    names = result.stdout.split()
    assert {"dance_demo", "lightning", "old_macdonald"} <= set(names)


def test_script_run_dance_demo_records_log(tmp_path):
    log = tmp_path / "run.jsonl"
    result = run_cli("script", "run", "dance_demo", "--record", str(log),
                     "--no-api")
    assert result.returncode == 0, result.stderr
    records = [json.loads(l) for l in log.read_text().splitlines()]
    types = {r["type"] for r in records}
    assert {"role", "inject", "gesture", "command", "snapshot"} <= types


def test_script_run_lightning_headless():
    assert main(["script", "run", "lightning", "--no-api"]) == 0


def test_replay_trace_at_max_speed(tmp_path):
    trace_path = tmp_path / "push.jsonl"
    save_trace(trace_path, synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.PALM_PUSH), 0))
    log = tmp_path / "run.jsonl"
    result = run_cli("replay", "--trace", str(trace_path),
                     "--trace-speed", "max", "--record", str(log), "--no-api")
    assert result.returncode == 0, result.stderr
    records = [json.loads(l) for l in log.read_text().splitlines()]
    assert sum(r["type"] == "frame" for r in records) == 39
    # no role active: the gesture is recognized but maps to no command
    gestures = [r for r in records if r["type"] == "gesture"]
    assert gestures and gestures[0]["event"]["kind"] == "palm_push"


def test_cue_file_execution(tmp_path):
    cue_path = tmp_path / "cues.json"
    cue_path.write_text(json.dumps({"name": "t", "cues": [
        {"at": 0.0, "role": "director"},
        {"at": 0.1, "gesture": {"kind": "palm_push"}},
    ]}))
    log = tmp_path / "run.jsonl"
    result = run_cli("script", "run", str(cue_path), "--record", str(log),
                     "--no-api")
    assert result.returncode == 0, result.stderr
    records = [json.loads(l) for l in log.read_text().splitlines()]
    drives = [r for r in records if r["type"] == "command"
              and r["command"]["action"]["type"] == "drive"]
    assert drives


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("stage:\n  dt: 0\n")
    result = run_cli("script", "run", "dance_demo", "--config", str(bad),
                     "--no-api")
    assert result.returncode == 2
    assert "stage" in result.stderr


def test_debug_gestures_stream(tmp_path):
    trace_path = tmp_path / "fist.jsonl"
    save_trace(trace_path, synthesize_gesture_trace(
        SyntheticGesture(SyntheticKind.FIST_HOLD), 0))
    debug = tmp_path / "debug.jsonl"
    result = run_cli("replay", "--trace", str(trace_path), "--trace-speed",
                     "max", "--debug-gestures", str(debug), "--no-api")
    assert result.returncode == 0, result.stderr
    lines = [json.loads(l) for l in debug.read_text().splitlines()]
    assert len(lines) == 51
    assert lines[0]["pose"] == "fist"


def test_entry_points_installed():
    for prog in ("conductor", "robot-agent"):
        result = subprocess.run([prog, "--help"], capture_output=True,
                                text=True, timeout=60)
        assert result.returncode == 0, f"{prog} --help failed"
