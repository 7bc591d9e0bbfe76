#!/usr/bin/env python3
"""The robot datagram protocol: fixed-point packets with XOR checksums.

Walks the byte layout of the two documented reference packets, shows the
negative-value encoding, and demonstrates corruption rejection. See
docs/protocol.md for the full table.
"""

from stagehand import (
    AddressedCommand,
    BROADCAST,
    Drive,
    Robot,
    STOP,
    decode,
    encode_command,
)
from stagehand.errors import DecodeError

drive = AddressedCommand(BROADCAST, Drive(v=0.15, omega=0.0, duration=0.6))
packet = encode_command(drive)
print("broadcast drive:", packet.hex(" "))
print("  magic/version/id/cmd:", packet[:4].hex(" "))
print("  v=150 mm/s:", packet[4:6].hex(" "))
print("  omega=0:", packet[6:8].hex(" "))
print("  duration=600 ms:", packet[8:10].hex(" "))
print("  checksum:", f"{packet[10]:02x}")

stop = encode_command(AddressedCommand(Robot(3), STOP))
print("stop robot 3:", stop.hex(" "))

reverse = encode_command(AddressedCommand(Robot(1), Drive(-0.15, 0.0, 0.6)))
print("v=-150 mm/s is two's complement:", reverse[4:6].hex(" "))

decoded = decode(packet)
print("decode inverts encode:", decoded.action == drive.action)

corrupted = bytearray(packet)
corrupted[5] ^= 0x01
try:
    decode(bytes(corrupted))
except DecodeError as exc:
    print("one flipped bit is rejected:", type(exc).__name__, "-", exc)
