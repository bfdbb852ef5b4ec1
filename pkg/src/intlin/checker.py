"""Deciding (interval-, set-) linearizability of executions.

The search places the events of an extension of the execution into an
alternating sequence of invoking and responding classes, one class at a
time, and advances every object's automaton as it goes.  Pruning:

* an invocation may be placed only once the responses of every call that
  precedes it in real time are placed;
* a responding class must be a transition the object actually offers, so
  spec violations are caught at the earliest class;
* responses for pending invocations (the extension) are taken from the
  object's own outputs, never from an open value universe;
* failed search nodes are memoised.

Pending invocations may also be left out of the witness altogether, which
is how ``comp`` of the extension drops them.
"""

import graphlib
import os
from dataclasses import dataclass, field
from itertools import product

from .errors import BudgetExceeded, NoResponseFound, NotLinearizable
from .histories import Event, Execution, Kind, complete, extend, project_object
from .interval_spec import (ConcurrencyClass, IntervalExecution, IntervalSpec,
                            accepts, project_interval, transitions)
from .values import sort_key

INTERVAL = "interval"
SET = "set"
LINEAR = "linear"

DEFAULT_BUDGET = 2_000_000


def default_budget() -> int:
    raw = os.environ.get("ILIN_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


@dataclass
class Verdict:
    """Outcome of a check.  Truthy iff the execution is accepted."""

    result: bool
    witness: IntervalExecution | None = None
    appended: tuple = ()
    nodes: int = 0
    failing_object: str | None = None
    per_object: dict = field(default_factory=dict)

    def __bool__(self):
        return self.result


class _Search:
    def __init__(self, e: Execution, specs: dict, mode: str, budget: int | None):
        self.e = e
        self.mode = mode
        self.budget = default_budget() if budget is None else budget
        self.nodes = 0
        self.calls = e.calls()
        self.objects = sorted({c.obj for c in self.calls})
        missing = [x for x in self.objects if x not in specs]
        if missing:
            raise KeyError(f"no spec for object(s) {missing}")
        self.specs = [specs[x] for x in self.objects]
        self.obj_of = [self.objects.index(c.obj) for c in self.calls]
        m = len(self.calls)
        self.completed = 0
        for i, c in enumerate(self.calls):
            if not c.pending:
                self.completed |= 1 << i
        self.preds = [0] * m
        for j, b in enumerate(self.calls):
            for i, a in enumerate(self.calls):
                if not a.pending and a.res_index < b.inv_index:
                    self.preds[j] |= 1 << i
        self.by_process: dict[int, list[int]] = {}
        for i, c in enumerate(self.calls):
            self.by_process.setdefault(c.process, []).append(i)
        n = len(e)
        # sort keys give a deterministic, index-based order to candidate classes
        self.inv_key = [c.inv_index for c in self.calls]
        self.res_key = [c.res_index if not c.pending else n + i for i, c in enumerate(self.calls)]

    # -- helpers --------------------------------------------------------------

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"search exceeded {self.budget} nodes")

    def _open_call(self, process: int, inv_mask: int, res_mask: int) -> int:
        for i in self.by_process[process]:
            bit = 1 << i
            if inv_mask & bit and not res_mask & bit:
                return i
        raise AssertionError(f"response for P{process} without an open call")

    def _enabled(self, inv_mask, res_mask, objstates):
        out = []
        for i in range(len(self.calls)):
            bit = 1 << i
            if inv_mask & bit or self.preds[i] & ~res_mask:
                continue
            if objstates[self.obj_of[i]][1] is not None:
                continue
            out.append(i)
        return out

    def _invoking_candidates(self, enabled):
        if self.mode == LINEAR:
            groups = [(i,) for i in enabled]
        else:
            groups = []
            k = len(enabled)
            for mask in range(1, 1 << k):
                groups.append(tuple(enabled[j] for j in range(k) if mask >> j & 1))
        groups.sort(key=lambda g: sorted(self.inv_key[i] for i in g))
        return groups

    def _responding_options(self, k, q, inv, inv_mask, res_mask):
        opts = []
        invokers = {ev.process for ev in inv}
        for r, q2 in transitions(self.specs[k], q, inv):
            if self.mode != INTERVAL and {ev.process for ev in r} != invokers:
                continue
            ids = []
            ok = True
            for ev in r:
                i = self._open_call(ev.process, inv_mask, res_mask)
                want = self.calls[i].response
                if want is not None and want != ev:
                    ok = False
                    break
                ids.append(i)
            if ok:
                key = sorted((self.res_key[i], sort_key(ev.payload)) for i, ev in zip(ids, r))
                opts.append((key, r, q2, ids))
        opts.sort(key=lambda o: o[0])
        return opts

    def _done(self, inv_mask, res_mask, objstates) -> bool:
        return (res_mask & self.completed == self.completed
                and inv_mask == res_mask
                and all(pend is None for _, pend in objstates))

    # -- search -------------------------------------------------------------

    def _starts(self):
        for qs in product(*(s.initial_states for s in self.specs)):
            yield tuple((q, None) for q in qs)

    def _invoke_moves(self, inv_mask, res_mask, objstates):
        """(invoking class, new inv mask, staged object states) per candidate."""
        for group in self._invoking_candidates(self._enabled(inv_mask, res_mask, objstates)):
            new_inv = inv_mask
            staged = list(objstates)
            per_obj: dict[int, list] = {}
            for i in group:
                new_inv |= 1 << i
                per_obj.setdefault(self.obj_of[i], []).append(self.calls[i].invocation)
            for k, evs in per_obj.items():
                staged[k] = (staged[k][0], frozenset(evs))
            cls = ConcurrencyClass(Kind.INV, [self.calls[i].invocation for i in group])
            yield cls, new_inv, tuple(staged)

    def _respond_moves(self, inv_mask, res_mask, objstates):
        """(responding class, new res mask, next object states) per candidate."""
        waiting = [k for k, (_, pend) in enumerate(objstates) if pend is not None]
        option_lists = []
        for k in waiting:
            q, inv = objstates[k]
            opts = self._responding_options(k, q, inv, inv_mask, res_mask)
            if self.mode != INTERVAL:
                if not opts:
                    return
                option_lists.append(opts)
            else:
                option_lists.append([None] + opts)
        for combo in product(*option_lists):
            if all(o is None for o in combo):
                continue
            new_res = res_mask
            staged = list(objstates)
            events = []
            for k, o in zip(waiting, combo):
                if o is None:
                    continue
                _, r, q2, ids = o
                for i in ids:
                    new_res |= 1 << i
                staged[k] = (q2, None)
                events.extend(r)
            yield ConcurrencyClass(Kind.RES, events), new_res, tuple(staged)

    def run(self, limit: int | None = None):
        """Depth-first search; ``limit`` caps the number of classes."""
        self.failed: dict = {}
        for objstates in self._starts():
            path: list = []
            if self._search(0, 0, objstates, path, limit):
                return path
        return None

    def _search(self, inv_mask, res_mask, objstates, path, limit) -> bool:
        if self._done(inv_mask, res_mask, objstates):
            return True
        remaining = _UNBOUNDED if limit is None else limit - len(path)
        if remaining < 2:
            return False
        key = (inv_mask, res_mask, objstates)
        if self.failed.get(key, -1) >= remaining:
            return False
        self._tick()
        for inv_cls, new_inv, staged in self._invoke_moves(inv_mask, res_mask, objstates):
            path.append(inv_cls)
            self._tick()
            for res_cls, new_res, nxt in self._respond_moves(new_inv, res_mask, staged):
                path.append(res_cls)
                if self._search(new_inv, new_res, nxt, path, limit):
                    return True
                path.pop()
            path.pop()
        self.failed[key] = remaining
        return False

    def walk(self, inv_mask, res_mask, objstates, path):
        """Yield every complete witness below this node (no memo)."""
        if self._done(inv_mask, res_mask, objstates):
            yield list(path)
            return
        self._tick()
        for inv_cls, new_inv, staged in self._invoke_moves(inv_mask, res_mask, objstates):
            path.append(inv_cls)
            for res_cls, new_res, nxt in self._respond_moves(new_inv, res_mask, staged):
                path.append(res_cls)
                yield from self.walk(new_inv, new_res, nxt, path)
                path.pop()
            path.pop()


_UNBOUNDED = float("inf")


def _appended(e: Execution, classes) -> tuple:
    """Responses of the witness that answer calls pending in ``e``.

    A process's k-th response in the witness answers its k-th call.
    """
    calls_of: dict[int, list] = {}
    for c in e.calls():
        calls_of.setdefault(c.process, []).append(c)
    count: dict[int, int] = {}
    out = []
    for c in classes:
        if c.is_invoking:
            continue
        for ev in c:
            k = count.get(ev.process, 0)
            count[ev.process] = k + 1
            if calls_of[ev.process][k].pending:
                out.append(ev)
    return tuple(out)


def _check(e: Execution, specs: dict, mode: str, budget=None, canonical=True) -> Verdict:
    search = _Search(e, specs, mode, budget)
    path = search.run()
    if path is None:
        return Verdict(False, nodes=search.nodes)
    if canonical and path:
        # iterative deepening: fewest classes first, then index order
        limit = 2
        while limit < len(path):
            shorter = search.run(limit)
            if shorter is not None:
                path = shorter
                break
            limit += 2
    witness = IntervalExecution(path)
    appended = _appended(e, path)
    problems = verify_witness(e, specs, witness, appended, mode)
    if problems:
        raise AssertionError("checker produced an invalid witness: " + "; ".join(problems))
    return Verdict(True, witness, appended, search.nodes)


def check_interval_linearizable(e: Execution, specs, budget=None, canonical=True) -> Verdict:
    """Is ``e`` interval-linearizable w.r.t. the per-object ``specs``?

    ``specs`` maps object ids to IntervalSpecs; a single spec is applied to
    every object in ``e``.
    """
    return _check(e, _as_map(e, specs), INTERVAL, budget, canonical)


def check_set_linearizable(e: Execution, specs, budget=None, canonical=True) -> Verdict:
    """Witness restricted to classes answered in the very next class."""
    return _check(e, _as_map(e, specs), SET, budget, canonical)


def check_linearizable(e: Execution, specs, budget=None, canonical=True) -> Verdict:
    """Witness restricted to singleton classes answered immediately."""
    return _check(e, _as_map(e, specs), LINEAR, budget, canonical)


def all_witnesses(e: Execution, specs, mode: str = INTERVAL, limit: int = 100, budget=None):
    """Experimental: distinct witnesses in search order, at most ``limit``.

    No memoisation is used, so this is exponential; meant for tiny inputs.
    """
    specs = _as_map(e, specs)
    search = _Search(e, specs, mode, budget)
    found: list[IntervalExecution] = []
    for objstates in search._starts():
        for path in search.walk(0, 0, objstates, []):
            w = IntervalExecution(path)
            if w not in found:
                found.append(w)
                if len(found) >= limit:
                    return found
    return found


def _as_map(e: Execution, specs) -> dict:
    if isinstance(specs, IntervalSpec):
        return {x: specs for x in e.objects}
    return dict(specs)


def verify_witness(e: Execution, specs, witness: IntervalExecution, appended=(),
                   mode: str = INTERVAL) -> list[str]:
    """Re-check the three conditions of an interval-linearization.

    Returns a list of problems; empty means the witness is valid.
    """
    specs = _as_map(e, specs)
    problems = []
    try:
        ext = extend(e, appended)
    except Exception as exc:  # noqa: BLE001 - reported as data
        return [f"bad extension: {exc}"]
    comp = complete(ext)
    procs = {ev.process for ev in comp} | {ev.process for c in witness for ev in c}
    for p in sorted(procs):
        mine = [ev for c in witness for ev in c if ev.process == p]
        theirs = [ev for ev in comp if ev.process == p]
        if mine != theirs:
            problems.append(f"P{p}: witness events differ from comp(extension)")
    for x in sorted({ev.obj for c in witness for ev in c}):
        if x not in specs:
            problems.append(f"no spec for {x}")
            continue
        if not accepts(specs[x], project_interval(witness, x)):
            problems.append(f"{x}: projection not accepted by {specs[x].name}")
    # class index of every event, matched per process in order
    where: dict[tuple[int, int], int] = {}
    count: dict[int, int] = {}
    for idx, c in enumerate(witness):
        for ev in c:
            k = count.get(ev.process, 0)
            where[(ev.process, k)] = idx
            count[ev.process] = k + 1
    nth: dict[int, int] = {}
    pos_key = []
    for ev in comp:
        k = nth.get(ev.process, 0)
        pos_key.append((ev.process, k))
        nth[ev.process] = k + 1
    calls = [c for c in comp.calls() if not c.pending]
    for a in calls:
        for b in calls:
            if a.res_index < b.inv_index:
                ra = where.get(pos_key[a.res_index])
                ib = where.get(pos_key[b.inv_index])
                if ra is None or ib is None or not ra < ib:
                    problems.append(f"real-time order broken between P{a.process} and P{b.process}")
    if mode != INTERVAL:
        for inv_c, res_c in witness.pairs():
            if inv_c.processes != res_c.processes:
                problems.append("a class is not answered in the very next class")
            if mode == LINEAR and len(inv_c) != 1:
                problems.append("a class is not a singleton")
    return problems


# --- locality ----------------------------------------------------------------

def check_local(e: Execution, specs, compose: bool = True, budget=None) -> Verdict:
    """Check every per-object projection independently.

    With ``compose`` the per-object witnesses are merged into one global
    witness: per-object orders plus cross-object real-time edges, a
    topological extension, then merging of consecutive same-kind classes.
    """
    specs = _as_map(e, specs)
    per_object = {}
    nodes = 0
    for x in e.objects:
        v = check_interval_linearizable(project_object(e, x), {x: specs[x]}, budget)
        per_object[x] = v
        nodes += v.nodes
        if not v:
            return Verdict(False, nodes=nodes, failing_object=x, per_object=per_object)
    if not compose:
        return Verdict(True, nodes=nodes, per_object=per_object)
    witness, appended = compose_witness(e, per_object)
    problems = verify_witness(e, specs, witness, appended)
    if problems:
        raise AssertionError("composed witness failed verification: " + "; ".join(problems))
    return Verdict(True, witness, appended, nodes, per_object=per_object)


def compose_witness(e: Execution, per_object: dict):
    """Merge per-object interval-linearizations into a global one."""
    appended = tuple(ev for x in sorted(per_object) for ev in per_object[x].appended)
    ext = extend(e, appended)
    comp = complete(ext)
    calls = comp.calls()
    # class node of every call's invocation / response
    node_of_inv: dict[int, tuple] = {}
    node_of_res: dict[int, tuple] = {}
    classes: dict[tuple, ConcurrencyClass] = {}
    graph: dict[tuple, set] = {}
    for x in sorted(per_object):
        w = per_object[x].witness
        queue: dict[int, list[int]] = {}
        for i, c in enumerate(calls):
            if c.obj == x:
                queue.setdefault(c.process, []).append(i)
        cursor = {p: 0 for p in queue}
        prev = None
        for j, cls in enumerate(w):
            node = (x, j)
            classes[node] = cls
            graph.setdefault(node, set())
            if prev is not None:
                graph[node].add(prev)
            prev = node
            for ev in cls:
                i = queue[ev.process][cursor[ev.process]]
                if cls.is_invoking:
                    node_of_inv[i] = node
                else:
                    node_of_res[i] = node
                    cursor[ev.process] += 1
    for ia, a in enumerate(calls):
        for ib, b in enumerate(calls):
            if a.obj != b.obj and a.res_index < b.inv_index:
                graph[node_of_inv[ib]].add(node_of_res[ia])
    ts = graphlib.TopologicalSorter(graph)
    try:
        ts.prepare()
    except graphlib.CycleError as exc:
        raise AssertionError(f"cross-object relation has a cycle: {exc.args[1]}") from None
    order = []
    last_kind = None

    def prio(node):
        return (classes[node].kind is not last_kind, node)

    pool = list(ts.get_ready())
    while pool or ts.is_active():
        if not pool:
            pool.extend(ts.get_ready())
        pool.sort(key=prio)
        node = pool.pop(0)
        order.append(node)
        last_kind = classes[node].kind
        ts.done(node)
        pool.extend(ts.get_ready())
    merged: list[ConcurrencyClass] = []
    for node in order:
        cls = classes[node]
        if merged and merged[-1].kind is cls.kind:
            merged[-1] = ConcurrencyClass(cls.kind, merged[-1].events | cls.events)
        else:
            merged.append(cls)
    return IntervalExecution(merged), appended


# --- non-blocking ------------------------------------------------------------

def nonblocking_extension(e: Execution, specs, pending) -> Event:
    """A response to the pending call that keeps ``e`` interval-linearizable."""
    specs = _as_map(e, specs)
    v = check_interval_linearizable(e, specs)
    if not v:
        raise NotLinearizable("the execution is not interval-linearizable")
    inv = pending.invocation
    if not pending.pending:
        raise ValueError("the call is not pending")
    candidates = [ev for ev in v.appended if ev.process == inv.process]
    spec = specs[inv.obj]
    run = accepts(spec, project_interval(v.witness, inv.obj))
    q = run.states[-1]
    for r, _ in transitions(spec, q, frozenset([inv])):
        for ev in sorted(r, key=lambda ev: ev.process):
            if ev.process == inv.process and ev not in candidates:
                candidates.append(ev)
    for ev in candidates:
        if check_interval_linearizable(extend(e, [ev]), specs, canonical=False):
            return ev
    raise NoResponseFound(
        f"no response for P{inv.process} keeps the execution interval-linearizable "
        f"({spec.name} is not total?)")
