"""From the write-snapshot object to a refined task and back.

The derived task decorates each output with the inputs its process had
seen; the object rebuilt from it accepts exactly the same executions.
"""

from intlin import object_to_refined_task, refined_task_to_object, write_snapshot
from intlin.tasks import format_task

task = object_to_refined_task(write_snapshot(2), bound=4)
print(format_task(task))
print("executions enumerated:", task.notes["executions"])
spec = refined_task_to_object(task)
print("rebuilt object:", spec.name)
