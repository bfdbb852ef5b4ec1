"""Translations between tasks and interval-sequential objects.

* :func:`task_to_object` turns a task into an object whose interval-
  linearizable executions are exactly the executions satisfying the task.
* :func:`object_to_refined_task` goes the other way for one-shot objects
  with a single total operation, by enumerating small executions.
* :func:`refined_task_to_object` closes the loop for refined tasks.
* :func:`task_to_split_sequential` splits a task into a sequential object
  with separate ``set`` and ``get`` operations.
* :func:`naive_task_from_object` collects the plain input/output pairs of an
  object's correct executions; for the restricted queue it accepts an
  execution the object rejects.
"""

from dataclasses import dataclass, field
from itertools import combinations, product

from .checker import LINEAR, _check, check_interval_linearizable
from .errors import InvalidTask, NotOneShot, NotTotal
from .histories import Event, Execution, invoke, respond
from .interval_spec import (Flavor, IntervalSpec, _classes, explore, is_total, subsets,
                            transitions)
from .objects import OK
from .tasks import (Complex, Task, Vertex, format_simplex, ids, satisfies_task,
                    validate_task, vertex_key)
from .values import sort_key


# --- sequences of faces --------------------------------------------------

@dataclass(frozen=True)
class FaceSequences:
    """Chains of invocation sets ``A`` and response sets ``B``, both from the empty set."""

    A: tuple
    B: tuple

    @property
    def m(self) -> int:
        return len(self.A) - 1

    def batches(self):
        """(new invocations, new responses) for each step i = 1..m."""
        return [(self.A[i] - self.A[i - 1], self.B[i] - self.B[i - 1]) for i in range(1, len(self.A))]


def sequences(e: Execution) -> FaceSequences:
    """Split an execution into batches; a new batch opens when an invocation follows a response."""
    if len(e) == 0:
        return FaceSequences((frozenset(),), (frozenset(),))
    sigma = [frozenset(), frozenset()]
    tau = [frozenset(), frozenset()]
    A, B = [sigma[0]], [tau[0]]
    i = 1
    for ev in e:
        if ev.is_invocation:
            if not tau[i] - tau[i - 1]:
                sigma[i] = sigma[i] | {ev}
            else:
                sigma.append(sigma[i] | {ev})
                tau.append(tau[i])
                A.append(sigma[i])
                B.append(tau[i])
                i += 1
        else:
            tau[i] = tau[i] | {ev}
    A.append(sigma[i])
    B.append(tau[i])
    return FaceSequences(tuple(A), tuple(B))


def claim2_violations(e: Execution, fs: FaceSequences, task: Task | None = None) -> list[str]:
    """Which structural properties of ``sequences`` fail on ``e``?  Empty means none.

    Items: (1) equal lengths, (2) strict chains ending at all invocations /
    responses, (3) last response step strict iff ``e`` ends with a response,
    (4) each step inside the task's carrier (only when ``e`` satisfies
    ``task``), (5) real-time order of a response before a later
    non-matching invocation is reflected, (6) each response's step covers
    every invocation before it.
    """
    out = []
    A, B = fs.A, fs.B
    if len(A) != len(B):
        out.append("1: chains of different length")
        return out
    m = len(A) - 1
    invs = frozenset(ev for ev in e if ev.is_invocation)
    ress = frozenset(ev for ev in e if ev.is_response)
    if A[0] or B[0]:
        out.append("2: chains do not start empty")
    if A[m] != invs or B[m] != ress:
        out.append("2: chains do not end at all invocations/responses")
    if any(not A[i - 1] < A[i] for i in range(1, m + 1)):
        out.append("2: invocation chain not strictly increasing")
    if any(not B[i - 1] < B[i] for i in range(1, m)) or (m >= 1 and not B[m - 1] <= B[m]):
        out.append("2: response chain not increasing")
    if m >= 1 and len(e):
        if not e.pending_calls() and not B[m - 1] < B[m]:
            out.append("3: last response step is not strict")
        if e[-1].is_invocation and B[m - 1] != B[m]:
            out.append("3: execution ends with an invocation but the last step adds responses")
    if task is not None and m >= 1 and satisfies_task(e, task):
        for i in range(1, m + 1):
            s = frozenset(Vertex(ev.process, ev.payload) for ev in A[i])
            t = frozenset(Vertex(ev.process, ev.payload) for ev in B[i])
            if t not in task.carrier(s):
                out.append(f"4: step {i} leaves the carrier")
    first_tau = {}
    first_sigma = {}
    for i in range(m, -1, -1):
        for ev in B[i]:
            first_tau[ev] = i
        for ev in A[i]:
            first_sigma[ev] = i
    events = list(e)
    for a in range(len(events)):
        if not events[a].is_response:
            continue
        for b in range(a + 1, len(events)):
            if events[b].is_invocation and not first_tau[events[a]] < first_sigma[events[b]]:
                out.append(f"5: response at {a + 1} not before invocation at {b + 1}")
    for i in range(1, m + 1):
        for r in B[i] - B[i - 1]:
            pos = events.index(r)
            before = {ev for ev in events[:pos] if ev.is_invocation}
            if not before <= A[i]:
                out.append(f"6: step {i} misses invocations preceding a response")
    return out


# --- task -> object ------------------------------------------------------

@dataclass(frozen=True)
class TaskState:
    sigma: frozenset = frozenset()
    tau: frozenset = frozenset()
    pend: frozenset = frozenset()


def _input_vertex(t: Task, ev: Event) -> Vertex:
    return Vertex(ev.process, ev.payload if t.operation is not None else (ev.op, ev.payload))


def _invocation_for(t: Task, v: Vertex, obj: str) -> Event:
    if t.operation is not None:
        return invoke(v.process, obj, t.operation, v.value)
    op, arg = v.value
    return invoke(v.process, obj, op, arg)


def _object_for(t: Task, obj: str, refined: bool) -> IntervalSpec:
    problems = validate_task(t)
    if problems:
        raise InvalidTask(f"{t.name}: {problems[0]}")
    ops = {t.operation} if t.operation is not None else {v.value[0] for v in t.inputs.vertices}

    def delta(q, inv):
        new = [_input_vertex(t, ev) for ev in inv]
        if any(ev.op not in ops for ev in inv) or ids(new) & ids(q.sigma):
            return
        sigma = q.sigma | frozenset(new)
        if sigma not in t.inputs:
            return
        waiting = q.pend | inv
        by_proc = {ev.process: ev for ev in waiting}
        seen = set()
        for facet in t.carrier(sigma).sorted_facets():
            if not q.tau <= facet:
                continue
            fresh = [v for v in facet - q.tau if v.process in by_proc
                     and (not refined or v.view == sigma)]
            for group in subsets(sorted(fresh, key=vertex_key)):
                r_vertices = frozenset(group)
                if r_vertices in seen:
                    continue
                seen.add(r_vertices)
                r = frozenset(respond(by_proc[v.process], v.value) for v in r_vertices)
                pend = frozenset(ev for ev in waiting if ev.process not in ids(r_vertices))
                yield r, TaskState(sigma, q.tau | r_vertices, pend)

    def candidates(q):
        busy = ids(q.sigma)
        for v in sorted(t.inputs.vertices, key=vertex_key):
            if v.process not in busy and (q.sigma | {v}) in t.inputs:
                yield _invocation_for(t, v, obj)

    kind = "refined_task_to_object" if refined else "task_to_object"
    n = max(ids(t.inputs.vertices), default=-1) + 1
    return IntervalSpec(f"{kind}({t.name})", n, frozenset(ops), (TaskState(),), delta,
                        candidates, one_shot=True, params={"task": t.name})


def task_to_object(t: Task, obj: str = "X") -> IntervalSpec:
    """Object with states (inputs so far, outputs so far) answering inside the carrier."""
    if t.refined:
        raise InvalidTask("use refined_task_to_object for refined tasks")
    return _object_for(t, obj, refined=False)


def refined_task_to_object(t: Task, obj: str = "X") -> IntervalSpec:
    """As :func:`task_to_object`; a decorated output is emitted in the batch matching its view."""
    if not t.refined:
        raise InvalidTask("task is not refined")
    return _object_for(t, obj, refined=True)


# --- object -> task ------------------------------------------------------

def _input_universe(spec: IntervalSpec) -> dict:
    per_process: dict[int, list] = {}
    for q in spec.initial_states:
        for ev in spec.candidates(q):
            bucket = per_process.setdefault(ev.process, [])
            if ev not in bucket:
                bucket.append(ev)
    return per_process


def _response_universe(spec: IntervalSpec, per_process: dict) -> dict:
    """(op, payload) responses each process can receive in some reachable state."""
    out: dict[int, set] = {p: set() for p in per_process}
    for q in explore(spec):
        fresh = [ev for ev in spec.candidates(q)]
        for group in _classes(fresh):
            for r, _ in transitions(spec, q, group):
                for ev in r:
                    out.setdefault(ev.process, set()).add((ev.op, ev.payload))
    return out


def pending_free_executions(invocations, responses: dict, max_events: int):
    """All well-formed executions where every listed invocation completes.

    ``invocations`` holds one invocation per process; ``responses[p]`` the
    payloads process p may receive.
    """
    invs = sorted(invocations, key=lambda ev: ev.process)
    if 2 * len(invs) > max_events:
        return
    for payloads in product(*(sorted(responses.get(ev.process, ()), key=lambda x: sort_key(x[1]))
                              for ev in invs)):
        events = []
        for ev, (op, y) in zip(invs, payloads):
            if op != ev.op:
                break
            events.append((ev, respond(ev, y)))
        else:
            yield from _interleavings(events)


def _interleavings(pairs):
    """Every order of the events keeping each invocation before its response."""
    total = 2 * len(pairs)

    def rec(state, acc):
        if len(acc) == total:
            yield Execution(acc)
            return
        for k, (inv, res) in enumerate(pairs):
            if state[k] == 0:
                state[k] = 1
                yield from rec(state, acc + [inv])
                state[k] = 0
            elif state[k] == 1:
                state[k] = 2
                yield from rec(state, acc + [res])
                state[k] = 1

    yield from rec([0] * len(pairs), [])


def gamma(e: Execution) -> frozenset:
    """Decorated output simplex of a pending-free execution."""
    fs = sequences(e)
    out = set()
    for i in range(1, len(fs.A)):
        view = frozenset(Vertex(ev.process, ev.payload) for ev in fs.A[i])
        for r in fs.B[i] - fs.B[i - 1]:
            out.add(Vertex(r.process, r.payload, view))
    return frozenset(out)


def _simplices_of_inputs(per_process: dict):
    procs = sorted(per_process)
    for k in range(1, len(procs) + 1):
        for chosen in combinations(procs, k):
            for combo in product(*(per_process[p] for p in chosen)):
                yield combo


def object_to_refined_task(spec: IntervalSpec, n: int | None = None, bound: int = 4,
                           budget: int | None = None) -> Task:
    """Refined task whose carrier lists the decorated outputs of correct executions.

    Executions are enumerated up to ``bound`` events; input simplexes whose
    executions need more events are listed in ``notes['truncated']`` and get
    an empty carrier.
    """
    if len(spec.operations) != 1:
        raise NotOneShot(f"{spec.name} has operations {sorted(spec.operations)}; need exactly one")
    if not spec.one_shot:
        raise NotOneShot(f"{spec.name} is not one-shot")
    if spec.candidates is None or not spec.total or not is_total(spec):
        raise NotTotal(f"{spec.name} is not total")
    (op,) = spec.operations
    per_process = _input_universe(spec)
    if n is not None:
        per_process = {p: evs for p, evs in per_process.items() if p < n}
    responses = _response_universe(spec, per_process)
    delta = {}
    truncated = []
    explored = 0
    for combo in _simplices_of_inputs(per_process):
        sigma = frozenset(Vertex(ev.process, ev.payload) for ev in combo)
        if 2 * len(combo) > bound:
            truncated.append(sigma)
            delta[sigma] = Complex()
            continue
        found = set()
        for e in pending_free_executions(combo, responses, bound):
            explored += 1
            if check_interval_linearizable(e, {ev.obj: spec for ev in combo}, budget, canonical=False):
                found.add(gamma(e))
        delta[sigma] = Complex(frozenset(found))
    inputs = Complex(frozenset(delta))
    outputs = Complex(frozenset(f for c in delta.values() for f in c.facets))
    notes = {"bound": bound, "executions": explored,
             "truncated": [format_simplex(s) for s in truncated]}
    return Task(f"refined({spec.name})", inputs, outputs, delta, refined=True, operation=op,
                notes=notes)


def naive_task_from_object(spec: IntervalSpec, bound: int = 6, mode: str = LINEAR,
                           budget: int | None = None) -> Task:
    """Plain task from the input/output sets of correct pending-free executions.

    Inputs are ``(op, argument)`` pairs so objects with several operations
    fit; outputs are bare response payloads.
    """
    per_process = _input_universe(spec)
    responses = _response_universe(spec, per_process)
    delta = {}
    for combo in _simplices_of_inputs(per_process):
        sigma = frozenset(Vertex(ev.process, (ev.op, ev.payload)) for ev in combo)
        found = set()
        for e in pending_free_executions(combo, responses, bound):
            if _check(e, {ev.obj: spec for ev in combo}, mode, budget, canonical=False):
                found.add(frozenset(Vertex(ev.process, ev.payload) for ev in e if ev.is_response))
        delta[sigma] = Complex(frozenset(found))
    inputs = Complex(frozenset(delta))
    outputs = Complex(frozenset(f for c in delta.values() for f in c.facets))
    return Task(f"naive({spec.name})", inputs, outputs, delta, refined=False, operation=None)


# --- split set/get object ------------------------------------------------

@dataclass(frozen=True)
class SplitState:
    sigma: frozenset = frozenset()
    tau: frozenset = frozenset()
    pend: frozenset = field(default=frozenset())


def task_to_split_sequential(t: Task, obj: str = "X") -> IntervalSpec:
    """Sequential object: ``set(v)`` records an input, ``get()`` returns an output."""
    if t.refined:
        raise InvalidTask("split objects are built from plain tasks")
    problems = validate_task(t)
    if problems:
        raise InvalidTask(f"{t.name}: {problems[0]}")
    outputs_by_process: dict[int, list] = {}
    for v in sorted(t.outputs.vertices, key=vertex_key):
        outputs_by_process.setdefault(v.process, []).append(v.value)

    def delta(q, inv):
        if len(inv) != 1:
            return
        (ev,) = inv
        if ev.op == "set":
            v = Vertex(ev.process, ev.payload)
            if ev.process in ids(q.sigma) or (q.sigma | {v}) not in t.inputs:
                return
            yield frozenset([respond(ev, OK)]), SplitState(q.sigma | {v}, q.tau)
        elif ev.op == "get":
            if ev.process not in ids(q.sigma) or ev.process in ids(q.tau):
                return
            image = t.carrier(q.sigma)
            for y in outputs_by_process.get(ev.process, ()):
                tau = q.tau | {Vertex(ev.process, y)}
                if tau in image:
                    yield frozenset([respond(ev, y)]), SplitState(q.sigma, tau)

    def candidates(q):
        for v in sorted(t.inputs.vertices, key=vertex_key):
            if v.process not in ids(q.sigma) and (q.sigma | {v}) in t.inputs:
                yield invoke(v.process, obj, "set", v.value)
        for p in sorted(ids(q.sigma) - ids(q.tau)):
            yield invoke(p, obj, "get")

    n = max(ids(t.inputs.vertices), default=-1) + 1
    return IntervalSpec(f"split({t.name})", n, frozenset({"set", "get"}), (SplitState(),),
                        delta, candidates, flavor=Flavor.SEQUENTIAL, params={"task": t.name})


def round_trip_equivalent(e: Execution, spec: IntervalSpec, task: Task) -> bool:
    """Do the object and the task agree on ``e``?"""
    return bool(check_interval_linearizable(e, spec)) == bool(satisfies_task(e, task))

