"""Step-by-step simulation of the double-collect write-snapshot algorithm.

Each process ``i`` writes ``i + 1`` into its own register, then collects the
whole array (reading registers in ascending order, one read per step) until
two successive collects agree, and returns the last one.  A schedule lists
which process takes the next step; scheduling a finished process is
recorded as a skip.  Invocations appear at a process's first step and
responses at the step completing its last collect.
"""

import random
from dataclasses import dataclass, field

from .errors import IllegalProcess
from .histories import Execution, Kind, invoke, respond
from .interval_spec import ConcurrencyClass, IntervalExecution

OBJECT = "X"
OPERATION = "ws"


class RegisterArray:
    """Single-writer multi-reader registers, initially empty (None)."""

    def __init__(self, n: int):
        self.cells = [None] * n

    def read(self, j: int):
        return self.cells[j]

    def write(self, writer: int, j: int, value):
        if writer != j:
            raise IllegalProcess(f"P{writer} cannot write register {j}")
        self.cells[j] = value


@dataclass(frozen=True)
class Schedule:
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class Collect:
    start: int  # step of the first read
    end: int  # step of the last read
    values: frozenset


@dataclass
class SimTrace:
    execution: Execution
    step_log: list  # (step, process, "read"/"write", register, value)
    skipped: list = field(default_factory=list)
    collects: dict = field(default_factory=dict)  # process -> [Collect]
    outputs: dict = field(default_factory=dict)  # process -> frozenset
    schedule: Schedule = Schedule()

    @property
    def pending(self) -> list[int]:
        return sorted(c.process for c in self.execution.pending_calls())


def _collect(n: int):
    values = set()
    for j in range(n):
        v = yield ("read", j)
        if v is not None:
            values.add(v)
    return frozenset(values)


def _write_snapshot_process(i: int, n: int):
    """Generator yielding register operations; returns the snapshot."""
    yield ("write", i, i + 1)
    new = yield from _collect(n)
    while True:
        old = new
        new = yield from _collect(n)
        if old == new:
            return new


class _Machine:
    def __init__(self, n: int):
        if n < 1:
            raise ValueError("need at least one process")
        self.n = n
        self.mem = RegisterArray(n)
        self.procs = {}
        self.next_op = {}
        self.done = set()
        self.events = []
        self.log = []
        self.skipped = []
        self.collects = {p: [] for p in range(n)}
        self.current = {}  # process -> (start step, values) of the collect in progress
        self.invocations = {}
        self.outputs = {}
        self.taken = []

    def live(self):
        return [p for p in range(self.n) if p not in self.done]

    def step(self, p: int):
        if not 0 <= p < self.n:
            raise IllegalProcess(f"process {p} outside 0..{self.n - 1}")
        t = len(self.taken)
        self.taken.append(p)
        if p in self.done:
            self.skipped.append(t)
            return
        if p not in self.procs:
            gen = _write_snapshot_process(p, self.n)
            self.procs[p] = gen
            self.next_op[p] = next(gen)
            self.invocations[p] = invoke(p, OBJECT, OPERATION, p + 1)
            self.events.append(self.invocations[p])
        op = self.next_op[p]
        if op[0] == "write":
            _, j, v = op
            self.mem.write(p, j, v)
            self.log.append((t, p, "write", j, v))
            result = None
        else:
            _, j = op
            result = self.mem.read(j)
            self.log.append((t, p, "read", j, result))
            start, seen = self.current.get(p, (t, frozenset())) if j else (t, frozenset())
            if result is not None:
                seen = seen | {result}
            self.current[p] = (start, seen)
            if j == self.n - 1:
                self.collects[p].append(Collect(start, t, seen))
        try:
            self.next_op[p] = self.procs[p].send(result)
        except StopIteration as stop:
            self.done.add(p)
            self.outputs[p] = stop.value
            self.events.append(respond(self.invocations[p], stop.value))

    def trace(self) -> SimTrace:
        return SimTrace(Execution(self.events, one_shot=True), list(self.log), list(self.skipped),
                        {p: list(c) for p, c in self.collects.items() if c}, dict(self.outputs),
                        Schedule(self.taken))


def run_write_snapshot(n: int, schedule) -> SimTrace:
    """Run the algorithm under ``schedule`` (a Schedule or a list of process ids)."""
    steps = schedule.steps if isinstance(schedule, Schedule) else tuple(schedule)
    m = _Machine(n)
    for p in steps:
        m.step(p)
    return m.trace()


def solo_schedule(n: int, order) -> Schedule:
    """Run the processes of ``order`` one after another, each to completion."""
    m = _Machine(n)
    for p in order:
        while p not in m.done:
            m.step(p)
    return Schedule(m.taken)


def enumerate_schedules(n: int, max_steps: int | None = None):
    """Every schedule without skips, in lexicographic order.

    A schedule ends when every process has finished or after ``max_steps``
    steps.  Distinct skip-free schedules produce distinct step logs, so each
    one is its own trace-equivalence class.
    """
    def rec(prefix):
        m = _Machine(n)
        for p in prefix:
            m.step(p)
        live = m.live()
        if not live or (max_steps is not None and len(prefix) >= max_steps):
            yield Schedule(prefix)
            return
        for p in live:
            yield from rec(prefix + [p])

    yield from rec([])


def enumerate_traces(n: int, max_steps: int | None = None):
    """Like :func:`enumerate_schedules`, yielding the resulting traces."""
    def rec(m_steps):
        m = _Machine(n)
        for p in m_steps:
            m.step(p)
        live = m.live()
        if not live or (max_steps is not None and len(m_steps) >= max_steps):
            yield m.trace()
            return
        for p in live:
            yield from rec(m_steps + [p])

    yield from rec([])


def fuzz_write_snapshot(n: int, seed: int, count: int, stop_prob: float = 0.0):
    """``count`` traces under pseudo-random schedules drawn from ``seed``.

    With ``stop_prob > 0`` a run may halt early after any step, leaving some
    invocations pending.
    """
    rng = random.Random(seed)
    for _ in range(count):
        m = _Machine(n)
        while m.live():
            m.step(rng.choice(m.live()))
            if stop_prob and rng.random() < stop_prob:
                break
        yield m.trace()


# --- properties ----------------------------------------------------------

def self_inclusion(trace: SimTrace) -> bool:
    return all(p + 1 in out for p, out in trace.outputs.items())


def containment(trace: SimTrace) -> bool:
    outs = list(trace.outputs.values())
    return all(a <= b or b <= a for a in outs for b in outs)


def witness_from_trace(trace: SimTrace):
    """Interval-linearization built from the double-collect times.

    Each finished process gets the time at which its next-to-last collect
    ended; between that time and its last collect the memory held exactly
    its output.  Processes are grouped by output, ordered by the earliest
    such time; class k invokes the newly visible writers and answers the
    processes returning the k-th set.  Pending invocations whose value was
    seen are answered in the last class with the last set.

    Returns ``(witness, appended responses)``.
    """
    e = trace.execution
    invs = {ev.process: ev for ev in e if ev.is_invocation}
    times = sorted((trace.collects[p][-2].end, p) for p in trace.outputs)
    order: list[frozenset] = []
    members: dict[frozenset, list[int]] = {}
    for _, p in times:
        s = trace.outputs[p]
        if s not in members:
            order.append(s)
            members[s] = []
        members[s].append(p)
    classes = []
    appended = []
    seen: frozenset = frozenset()
    for k, s in enumerate(order):
        new = [invs[v - 1] for v in sorted(s - seen)]
        responses = [respond(invs[p], s) for p in members[s]]
        if k == len(order) - 1:
            finished = set(trace.outputs)
            for v in sorted(s):
                p = v - 1
                if p not in finished:
                    r = respond(invs[p], s)
                    responses.append(r)
                    appended.append(r)
        classes.append(ConcurrencyClass(Kind.INV, new))
        classes.append(ConcurrencyClass(Kind.RES, responses))
        seen = s
    return IntervalExecution(classes), tuple(appended)
