"""Compare the semi-naive engine with naive evaluation on generated instances.

    python3 demos/engine_cross_check.py [COUNT]
"""

import sys
import time

from behavspec.reasoner import infer, infer_naive
from behavspec.testing import random_instance

count = int(sys.argv[1]) if len(sys.argv) > 1 else 200
fast_time = slow_time = 0.0
derived = steps = 0
for seed in range(count):
    inst = random_instance(seed)
    t0 = time.perf_counter()
    fast = infer(inst.model, inst.wm)
    t1 = time.perf_counter()
    slow = infer_naive(inst.model, inst.wm)
    t2 = time.perf_counter()
    fast_time += t1 - t0
    slow_time += t2 - t1
    if fast.derived != slow.derived or fast.steps != slow.steps:
        sys.exit(f"seed {seed}: engines disagree")
    derived += len(fast.derived - fast.base)
    steps += len(fast.steps)

print(f"{count} instances agree; {derived} derived assertions, {steps} derivation steps")
print(f"semi-naive {fast_time:.2f}s, naive {slow_time:.2f}s")
