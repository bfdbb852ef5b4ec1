"""A sequential one-shot queue that no plain task captures.

The naive task records which outputs the queue may give for each set of
inputs.  The third history mixes the first two: every process behaves as
in a correct run, yet the dequeue returns the value enqueued second.
"""

from importlib import resources

from intlin import check_linearizable, load_execution, naive_task_from_object, satisfies_task
from intlin.objects import restricted_queue

data = resources.files("intlin") / "data"
queue = restricted_queue()
naive = naive_task_from_object(queue)
for k in (1, 2, 3):
    e = load_execution(data / f"queue_alpha{k}.hist")
    print(f"alpha{k}:")
    print(e)
    print(f"  linearizable: {bool(check_linearizable(e, queue))}, "
          f"satisfies the naive task: {bool(satisfies_task(e, naive))}")
