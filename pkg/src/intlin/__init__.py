"""Interval-linearizability: objects, tasks, checking and simulation."""

from .bridges import (FaceSequences, claim2_violations, naive_task_from_object,
                      object_to_refined_task, refined_task_to_object, sequences, task_to_object,
                      task_to_split_sequential)
from .checker import (Verdict, all_witnesses, check_interval_linearizable, check_linearizable,
                      check_local, check_set_linearizable, compose_witness, nonblocking_extension,
                      verify_witness)
from .errors import *  # noqa: F401,F403
from .histories import (Event, Execution, Kind, OperationCall, PrecedenceOrder, complete, extend,
                        format_execution, invoke, load_execution, parse_execution, precedence,
                        prefixes, project_object, project_process, respond)
from .interval_spec import (ConcurrencyClass, Flavor, IntervalExecution, IntervalSpec, accepts,
                            invoking, is_total, project_interval, responding, step)
from .objects import (BuiltinObjectId, builtin_spec, parse_object_spec, restricted_queue,
                      safe_consensus, safe_consensus_check, validity, validity_abort,
                      write_snapshot, ws_sequential)
from .simulator import (RegisterArray, Schedule, SimTrace, containment, enumerate_schedules,
                        enumerate_traces, fuzz_write_snapshot, run_write_snapshot, self_inclusion,
                        witness_from_trace)
from .tasks import (Complex, Task, Vertex, builtin_task, format_task, immediate_snapshot_task,
                    k_set_agreement_task, load_task, parse_task, pseudosphere,
                    satisfies_refined_task, satisfies_task, validate_task, validity_task,
                    write_snapshot_task)

__version__ = "0.1.0"
