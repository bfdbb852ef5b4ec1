"""Run the double-collect write-snapshot algorithm and check every trace.

Pass a process count and a number of random schedules on the command line,
for example ``python demos/simulate_and_check.py 4 500``.
"""

import sys
from collections import Counter

from intlin import check_interval_linearizable, verify_witness, write_snapshot
from intlin.simulator import containment, fuzz_write_snapshot, self_inclusion, witness_from_trace

n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
count = int(sys.argv[2]) if len(sys.argv) > 2 else 200
spec = write_snapshot(n)
shapes = Counter()
failures = 0
for trace in fuzz_write_snapshot(n, seed=1, count=count, stop_prob=0.005):
    outputs = sorted(len(s) for s in trace.outputs.values())
    shapes[tuple(outputs)] += 1
    good = check_interval_linearizable(trace.execution, spec, canonical=False)
    w, appended = witness_from_trace(trace)
    direct = not verify_witness(trace.execution, spec, w, appended)
    failures += not (good and direct and self_inclusion(trace) and containment(trace))

print(f"{count} traces with n={n}, {failures} failures")
print("output sizes per trace (most common):")
for shape, k in shapes.most_common(8):
    print(f"  {shape}: {k}")
