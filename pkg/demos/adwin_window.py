"""
Watching an adaptive window shrink after a change
=================================================

A stream of 0/1 correctness values switches from mostly-right to
mostly-wrong halfway through. The window keeps growing while the data look
stationary and drops its stale prefix shortly after the switch.
"""

import random

from driftforest import Adwin

rng = random.Random(3)
values = [1.0 if rng.random() < 0.9 else 0.0 for _ in range(1000)]
values += [1.0 if rng.random() < 0.1 else 0.0 for _ in range(1000)]

window = Adwin(delta=0.002)
for t, v in enumerate(values):
    if window.add(v):
        print(f"t={t:5d}  cut -> width {window.width:4d}, mean {window.estimate():.3f}")
    elif t % 250 == 0:
        print(f"t={t:5d}  width {window.width:4d}, mean {window.estimate():.3f}")

# the first cut after t=1000 marks the detection delay
print("final width", window.width, "estimate", round(window.estimate(), 3))
