#!/usr/bin/env python3
"""A remote robot agent over loopback datagrams.

Spawns the standalone agent (the stand-in for robot firmware), drives it
with wire packets, and reads back STATE telemetry. The same agent runs as
its own process via `robot-agent --id 3`.
"""

import socket
import threading
import time

from stagehand import AddressedCommand, Drive, Robot
from stagehand.agent import RobotAgent
from stagehand.wire import decode, encode_command, encode_ping

agent = RobotAgent(robot_id=3, port=0, tick_ms=1.0, telemetry_ms=100.0)
agent.bind()
thread = threading.Thread(target=agent.run, daemon=True)
thread.start()
print(f"agent for robot 3 on udp://127.0.0.1:{agent.port}")

sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
sock.settimeout(2.0)
addr = ("127.0.0.1", agent.port)

sock.sendto(encode_ping(3), addr)
state = decode(sock.recvfrom(2048)[0])
print(f"ping -> state: x={state.x:.3f} y={state.y:.3f} "
      f"theta={state.theta:.3f}")

print("driving 0.1 m/s for 1 s...")
sock.sendto(encode_command(
    AddressedCommand(Robot(3), Drive(0.1, 0.0, 1.0))), addr)
time.sleep(1.3)

# Drain buffered telemetry, then ping for the settled pose.
sock.settimeout(0.05)
while True:
    try:
        sock.recvfrom(2048)
    except socket.timeout:
        break
sock.settimeout(2.0)
sock.sendto(encode_ping(3), addr)
state = decode(sock.recvfrom(2048)[0])
print(f"after the drive: x={state.x:.3f} (expected 0.100 m further, "
      f"wire-quantized to the millimeter)")

# Commands for other robots are ignored.
sock.sendto(encode_command(
    AddressedCommand(Robot(9), Drive(0.2, 0.0, 0.5))), addr)
time.sleep(0.2)
sock.sendto(encode_ping(3), addr)
unmoved = decode(sock.recvfrom(2048)[0])
print("a command addressed to robot 9 left robot 3 at "
      f"x={unmoved.x:.3f}")

agent.stop()
thread.join(timeout=2.0)
sock.close()
