import socket
import threading
import time

import pytest

from stagehand.agent import RobotAgent
from stagehand.commands import AddressedCommand, Drive, LedMode, LedSet, Robot
from stagehand.wire import StateTelemetry, decode, encode_command, encode_ping


@pytest.fixture
def agent():
    a = RobotAgent(robot_id=5, port=0, tick_ms=1.0, telemetry_ms=50.0)
    a.bind()
    thread = threading.Thread(target=a.run, daemon=True)
    thread.start()
    yield a
    a.stop()
    thread.join(timeout=2.0)


@pytest.fixture
def sock():
    s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    s.settimeout(2.0)
    yield s
    s.close()


def drain(s):
    s.settimeout(0.05)
    while True:
        try:
            s.recvfrom(2048)
        except socket.timeout:
            break
    s.settimeout(2.0)


def fresh_state(s, agent) -> StateTelemetry:
    drain(s)
    s.sendto(encode_ping(agent.robot_id), ("127.0.0.1", agent.port))
    state = decode(s.recvfrom(2048)[0])
    assert isinstance(state, StateTelemetry)
    return state


def test_ping_returns_state_with_initial_pose(agent, sock):
    state = fresh_state(sock, agent)
    assert state.robot_id == 5
    assert state.x == pytest.approx(1.0, abs=0.002)
    assert state.y == pytest.approx(1.0, abs=0.002)
    assert state.theta == pytest.approx(0.0, abs=0.002)


def test_drive_then_ping_matches_dead_reckoning(agent, sock):
    cmd = AddressedCommand(Robot(5), Drive(0.1, 0.0, 1.0))
    sock.sendto(encode_command(cmd), ("127.0.0.1", agent.port))
    time.sleep(1.3)  # let the 1.0 s drive complete
    state = fresh_state(sock, agent)
    assert state.x == pytest.approx(1.1, abs=0.003)  # 100 mm ± quantization
    assert state.y == pytest.approx(1.0, abs=0.003)


def test_datagram_for_other_robot_ignored(agent, sock):
    cmd = AddressedCommand(Robot(9), Drive(0.1, 0.0, 0.5))
    sock.sendto(encode_command(cmd), ("127.0.0.1", agent.port))
    time.sleep(0.7)
    state = fresh_state(sock, agent)
    assert state.x == pytest.approx(1.0, abs=0.002)


def test_broadcast_accepted(agent, sock):
    from stagehand.commands import BROADCAST
    cmd = AddressedCommand(BROADCAST, Drive(0.0, 1.0, 0.5))
    sock.sendto(encode_command(cmd), ("127.0.0.1", agent.port))
    time.sleep(0.8)
    state = fresh_state(sock, agent)
    assert state.theta == pytest.approx(0.5, abs=0.003)


def test_led_command_reflected_in_state(agent, sock):
    cmd = AddressedCommand(Robot(5), LedSet(LedMode.SOLID, (255, 0, 0)))
    sock.sendto(encode_command(cmd), ("127.0.0.1", agent.port))
    time.sleep(0.1)
    state = fresh_state(sock, agent)
    assert state.led_mode is LedMode.SOLID


def test_malformed_datagrams_counted_not_fatal(agent, sock):
    sock.sendto(b"\x00\x01\x02", ("127.0.0.1", agent.port))
    sock.sendto(b"\xa5\x01\x05\x01\xff\xff\xff\xff\xff\xff\x00",
                ("127.0.0.1", agent.port))
    time.sleep(0.2)
    assert agent.decode_errors >= 2
    # still alive
    state = fresh_state(sock, agent)
    assert state.robot_id == 5


def test_periodic_telemetry_flows_to_last_commander(agent, sock):
    sock.sendto(encode_ping(5), ("127.0.0.1", agent.port))
    sock.recvfrom(2048)
    states = 0
    deadline = time.monotonic() + 1.0
    while time.monotonic() < deadline:
        try:
            decoded = decode(sock.recvfrom(2048)[0])
        except socket.timeout:
            break
        if isinstance(decoded, StateTelemetry):
            states += 1
    # 50 ms cadence over ~1 s, scheduling slack allowed
    assert states >= 5
