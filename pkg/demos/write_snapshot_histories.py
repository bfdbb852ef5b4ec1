"""Two write-snapshot histories under three consistency conditions.

The first history is linearizable only against a sequential automaton that
lets early writers return values written later.  The second cannot be
explained by any sequence of sets of simultaneous operations, yet it has an
interval-sequential explanation.
"""

from importlib import resources

from intlin import (accepts, check_interval_linearizable, check_linearizable,
                    check_set_linearizable, load_execution, write_snapshot, ws_sequential)
from intlin.cli import witness_table

data = resources.files("intlin") / "data"
first = load_execution(data / "fig3.hist")
second = load_execution(data / "fig4.hist")

print("First history:")
print(first)
v = check_linearizable(first, ws_sequential(3))
print("linearizable against the sequential automaton:", bool(v))
print("states visited:", [sorted(q.snap) for q in accepts(ws_sequential(3), v.witness).states])
print()

print("Second history:")
print(second)
print("set-linearizable:", bool(check_set_linearizable(second, write_snapshot(3))))
v = check_interval_linearizable(second, write_snapshot(3))
print("interval-linearizable:", bool(v))
print(witness_table(v.witness))
