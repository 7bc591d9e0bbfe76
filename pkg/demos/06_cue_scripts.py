#!/usr/bin/env python3
"""Cue scripts: choreography chaining, character blocking, lightning.

Sequences run on the simulated clock in lockstep, so a script plus an
initial stage state reproduces the exact same snapshot trace every time.
"""

import math

from stagehand import (
    Engine,
    EngineConfig,
    builtin_dance_demo,
    builtin_lightning,
    builtin_old_macdonald,
)

# Lightning: wand flicks toggle the lights, swishes whirl the ensemble.
engine = Engine(EngineConfig(), lockstep=True)
before = [r.led_on for r in engine.latest_snapshot.robots]
engine.run_script(builtin_lightning(n_strikes=3, cadence=0.4))
after = [r.led_on for r in engine.latest_snapshot.robots]
print(f"lightning x3: LEDs {before} -> {after} (odd strikes flip them)")
engine.close()

# Character blocking: each robot walks to its mark by dead reckoning,
# one character at a time with a beat between them.
engine = Engine(EngineConfig(), lockstep=True)
poses = {rid: engine.stage.robot(rid) for rid in engine.stage.robot_ids}
marks = [(0, (0.6, 0.6)), (1, (1.0, 1.4)), (2, (1.4, 0.6))]
seq = builtin_old_macdonald(marks, poses, engine.config.stage,
                            engine.config.roles)
print(f"\nold macdonald blocking: {len(seq.cues)} cues, "
      f"{seq.end_offset():.1f} s")
engine.run_script(seq, settle=True)
for rid, (tx, ty) in marks:
    robot = engine.stage.robot(rid)
    err = math.hypot(robot.x - tx, robot.y - ty)
    print(f"  robot {rid} reached ({robot.x:.3f}, {robot.y:.3f}), "
          f"{err * 1000:.1f} mm from its mark")
engine.close()

# The dance ostinato is deterministic: two runs, identical trajectories.
def final_poses():
    e = Engine(EngineConfig(), lockstep=True)
    e.run_script(builtin_dance_demo())
    poses = [(r.x, r.y, r.theta) for r in e.latest_snapshot.robots]
    e.close()
    return poses

print("\ndance demo runs bit-identically:", final_poses() == final_poses())
