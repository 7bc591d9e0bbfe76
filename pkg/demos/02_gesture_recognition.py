#!/usr/bin/env python3
"""Gesture recognition: poses plus windowed motion detectors.

Feeds each synthetic gesture through the recognizer and shows the emitted
events: pushes, pulls, grasp-linked rotations, finger flicks, and the
wand vocabulary. A static hand emits nothing.
"""

from stagehand import (
    Finger,
    GestureRecognizer,
    SynthDirection,
    SyntheticGesture,
    SyntheticKind,
    synthesize_gesture_trace,
)


def recognize(spec):
    recognizer = GestureRecognizer()
    events = []
    for frame in synthesize_gesture_trace(spec, seed=0):
        events.extend(recognizer.update(frame))
    events.extend(recognizer.finish())
    return events


performances = [
    SyntheticGesture(SyntheticKind.OPEN_PALM_HOLD),
    SyntheticGesture(SyntheticKind.PALM_PUSH),
    SyntheticGesture(SyntheticKind.FIST_PULL),
    SyntheticGesture(SyntheticKind.GRASP_THEN_ROTATE,
                     direction=SynthDirection.RIGHT),
    SyntheticGesture(SyntheticKind.FIST_ROTATE,
                     direction=SynthDirection.LEFT),
    SyntheticGesture(SyntheticKind.FINGER_FLICK, finger=Finger.MIDDLE),
    SyntheticGesture(SyntheticKind.WAND_VERTICAL_FLICK),
    SyntheticGesture(SyntheticKind.WAND_HORIZONTAL_SWISH,
                     direction=SynthDirection.RIGHT),
]

for spec in performances:
    events = recognize(spec)
    shown = [
        f"{e.kind.value}"
        + (f"({e.direction.value})" if e.direction else "")
        + (f"[{e.finger.name.lower()}]" if e.finger else "")
        + f" @ {e.t:.2f}s strength {e.strength:.2f}"
        for e in events
    ]
    print(f"{spec.kind.value:24s} -> {shown or ['(no events)']}")

# The grasp matters: the same roll without a preceding open-to-fist grasp
# is a puppeteer-style synchronized rotate, not a director pivot.
grasped = recognize(SyntheticGesture(SyntheticKind.GRASP_THEN_ROTATE,
                                     direction=SynthDirection.RIGHT))
bare = recognize(SyntheticGesture(SyntheticKind.FIST_ROTATE,
                                  direction=SynthDirection.RIGHT))
print("\nsame roll, different history:",
      grasped[0].kind.value, "vs", bare[0].kind.value)
