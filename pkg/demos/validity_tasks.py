"""A validity object, the validity task and the object built from the task.

Shows a legal interval execution with its witness table, then a history in
which two processes return a value nobody has proposed yet.  The task
rejects it at the shortest offending prefix, and so does the object
derived from the task.
"""

from importlib import resources

from intlin import (check_interval_linearizable, load_execution, satisfies_task,
                    task_to_object, validity, validity_task)
from intlin.cli import witness_table

data = resources.files("intlin") / "data"

ok = load_execution(data / "validity.hist")
v = check_interval_linearizable(ok, validity(3))
print("validity execution accepted:", bool(v))
print(witness_table(v.witness))
print()

future = load_execution(data / "validity_future.hist")
task = validity_task(3)
verdict = satisfies_task(future, task)
print("history answering with a future value:")
print(future)
print("satisfies the task:", bool(verdict), "| failing prefix length:", verdict.violating_prefix)
print("reason:", verdict.reason)
print("accepted by the task's object:", bool(check_interval_linearizable(future, task_to_object(task))))
