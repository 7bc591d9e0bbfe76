#!/usr/bin/env python3
"""Role metaphors: one gesture vocabulary, four meanings.

The same events map to different commands depending on the active role:
ensemble commands (director), per-finger marionette moves (puppeteer),
stage-wide effects (wizard), or finger control plus scoped effects
(hybrid). Unlisted pairs are silently empty so a show never halts.
"""

from stagehand import (
    Direction,
    Finger,
    FingerMap,
    GestureEvent,
    GestureKind,
    Role,
    RoleController,
)


def show(cmd):
    addr = cmd.address.to_json_obj()
    action = cmd.action.to_json_obj()
    return f"{addr} <- {action}"


events = [
    GestureEvent(GestureKind.PALM_PUSH, t=1.0, strength=1.2),
    GestureEvent(GestureKind.GRASP_ROTATE, t=2.0, strength=0.6,
                 direction=Direction.RIGHT),
    GestureEvent(GestureKind.FINGER_FLICK, t=3.0, strength=2.8,
                 finger=Finger.INDEX),
    GestureEvent(GestureKind.FIST_ROTATE, t=4.0, strength=0.6,
                 direction=Direction.LEFT),
    GestureEvent(GestureKind.WAND_VERTICAL_FLICK, t=5.0, strength=0.2),
    GestureEvent(GestureKind.WAND_HORIZONTAL_SWISH, t=6.0, strength=0.3,
                 direction=Direction.LEFT),
]

controller = RoleController(finger_map=FingerMap({Finger.INDEX: 1,
                                                  Finger.MIDDLE: 2}))

for role in Role:
    stops = controller.set_role(role)
    print(f"\n== {role.value} (switch issued {len(stops)} broadcast stop)")
    for event in events:
        commands = controller.interpret(event)
        label = event.kind.value
        if commands:
            for cmd in commands:
                print(f"  {label:22s} {show(cmd)}")
        else:
            print(f"  {label:22s} (not in this role's vocabulary)")
