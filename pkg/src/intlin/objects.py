"""Concrete interval-sequential objects.

Processes are numbered from 0; by default process ``i`` proposes ``i + 1``
so that outputs read like the usual ``{1,2,3}`` snapshots.
"""

from dataclasses import dataclass, field
from itertools import product

from .errors import BadParams, UnknownObject
from .histories import Event, Kind, invoke, respond
from .interval_spec import Flavor, IntervalExecution, IntervalSpec, subsets
from .values import sort_key

ABORTED = "aborted"
NOT_ABORTED = "notAborted"
OK = "ok"
BOTTOM = "bot"


def _by_process(events):
    return sorted(events, key=lambda ev: ev.process)


def _ids(events):
    return frozenset(ev.process for ev in events)


# --- validity ------------------------------------------------------------

@dataclass(frozen=True)
class ValidityState:
    vals: frozenset = frozenset()
    pend: frozenset = frozenset()


def validity(n: int, values=None, obj: str = "X") -> IntervalSpec:
    """Every response returns a value proposed no later than its own batch."""
    universe = sorted(values if values is not None else range(1, n + 1), key=sort_key)

    def delta(q, inv):
        if any(ev.op != "validity" for ev in inv):
            return
        vals = q.vals | {ev.payload for ev in inv}
        waiting = q.pend | inv
        ordered_vals = sorted(vals, key=sort_key)
        for group in subsets(_by_process(waiting)):
            pend = waiting - set(group)
            for choice in product(ordered_vals, repeat=len(group)):
                r = frozenset(respond(ev, v) for ev, v in zip(group, choice))
                yield r, ValidityState(vals, pend)

    def candidates(q):
        busy = _ids(q.pend)
        for p in range(n):
            if p not in busy:
                for v in universe:
                    yield invoke(p, obj, "validity", v)

    return IntervalSpec(f"validity(n={n})", n, frozenset({"validity"}),
                        (ValidityState(),), delta, candidates,
                        params={"n": n, "values": tuple(universe)})


# --- validity with k-abort -------------------------------------------------

@dataclass(frozen=True)
class ValidityAbortState:
    vals: frozenset = frozenset()
    pend: frozenset = frozenset()
    aborts: frozenset = frozenset()


def validity_abort(n: int, k: int, values=None, obj: str = "X") -> IntervalSpec:
    if not 1 <= k <= n:
        raise BadParams(f"need 1 <= k <= n, got k={k}, n={n}")
    universe = sorted(values if values is not None else range(1, n + 1), key=sort_key)

    def delta(q, inv):
        if any(ev.op not in ("validity", "abort") for ev in inv):
            return
        vals = q.vals | {ev.payload for ev in inv if ev.op == "validity"}
        aborting = q.aborts | {ev.process for ev in inv if ev.op == "abort"}
        waiting = q.pend | inv
        ordered_vals = sorted(vals, key=sort_key)
        for group in subsets(_by_process(waiting)):
            pend = waiting - set(group)
            if len(aborting) >= k:
                r = frozenset(respond(ev, ABORTED) for ev in group)
                yield r, ValidityAbortState(vals, pend, aborting)
                continue
            options = [ordered_vals if ev.op == "validity" else [NOT_ABORTED] for ev in group]
            not_aborted = {ev.process for ev in group if ev.op == "abort"}
            for choice in product(*options):
                r = frozenset(respond(ev, v) for ev, v in zip(group, choice))
                yield r, ValidityAbortState(vals, pend, aborting - not_aborted)

    def candidates(q):
        busy = _ids(q.pend)
        for p in range(n):
            if p not in busy:
                for v in universe:
                    yield invoke(p, obj, "validity", v)
                yield invoke(p, obj, "abort")

    return IntervalSpec(f"validity_abort(n={n},k={k})", n, frozenset({"validity", "abort"}),
                        (ValidityAbortState(),), delta, candidates,
                        params={"n": n, "k": k, "values": tuple(universe)})


# --- write-snapshot ------------------------------------------------------

@dataclass(frozen=True)
class WriteSnapshotState:
    vals: frozenset = frozenset()  # proposed (process, value) pairs
    pend: frozenset = frozenset()


def write_snapshot(n: int, pairs: bool = False, inputs=None, obj: str = "X") -> IntervalSpec:
    """Every response is exactly the union of all proposals up to its batch.

    With ``pairs=False`` a response lists proposed values only, which is the
    usual reading when process ``i`` proposes ``i + 1``.
    """
    inputs = inputs or {p: [p + 1] for p in range(n)}

    def view(vals):
        return frozenset(vals) if pairs else frozenset(v for _, v in vals)

    def delta(q, inv):
        if any(ev.op != "ws" for ev in inv):
            return
        seen = {p for p, _ in q.vals}
        if any(ev.process in seen for ev in inv):
            return
        vals = q.vals | {(ev.process, ev.payload) for ev in inv}
        out = view(vals)
        waiting = q.pend | inv
        for group in subsets(_by_process(waiting)):
            r = frozenset(respond(ev, out) for ev in group)
            yield r, WriteSnapshotState(vals, waiting - set(group))

    def candidates(q):
        used = {p for p, _ in q.vals}
        for p in range(n):
            if p not in used:
                for v in inputs.get(p, ()):
                    yield invoke(p, obj, "ws", v)

    return IntervalSpec(f"write_snapshot(n={n})", n, frozenset({"ws"}),
                        (WriteSnapshotState(),), delta, candidates,
                        one_shot=True, params={"n": n, "pairs": pairs})


# --- sequential write-snapshot automaton ---------------------------------

@dataclass(frozen=True)
class SnapshotPathState:
    snap: frozenset = frozenset()
    done: frozenset = frozenset()
    pend: frozenset = frozenset()


def ws_sequential(n: int, participants=None, obj: str = "X") -> IntervalSpec:
    """Non-deterministic sequential write-snapshot.

    From state ``s`` a process proposing ``v`` moves to any ``s2`` with
    ``s | {v} <= s2 <= participants`` and returns ``s2``.  Each process moves
    at most once.  Including not-yet-invoked values is how a sequential
    specification "predicts the future".
    """
    pool = frozenset(participants if participants is not None else range(1, n + 1))

    def delta(q, inv):
        if len(inv) != 1:
            return
        (ev,) = inv
        if ev.op != "ws" or ev.process in q.done:
            return
        base = q.snap | {ev.payload}
        extra = sorted(pool - base, key=sort_key)
        for add in subsets(extra, min_size=0):
            snap = base | set(add)
            yield frozenset([respond(ev, snap)]), SnapshotPathState(snap, q.done | {ev.process})

    def candidates(q):
        for p in range(n):
            if p not in q.done:
                yield invoke(p, obj, "ws", p + 1)

    return IntervalSpec(f"ws_sequential(n={n})", n, frozenset({"ws"}),
                        (SnapshotPathState(),), delta, candidates,
                        flavor=Flavor.SEQUENTIAL, one_shot=True,
                        params={"n": n, "participants": tuple(sorted(pool, key=sort_key))})


# --- safe-consensus --------------------------------------------------------

@dataclass(frozen=True)
class SafeConsensusState:
    decided: object = None
    started: bool = False
    invoked: frozenset = frozenset()
    pend: frozenset = frozenset()


def safe_consensus(n: int, values=None, obj: str = "X") -> IntervalSpec:
    """Agreement always; validity only when the first invoker ran alone.

    The first class decides whether the first invoker returns before anybody
    else invokes: a singleton first class must be answered at once (nobody
    else is pending), so its value is forced to the invoker's input.
    Otherwise the common value is arbitrary within ``values`` plus every
    proposal seen so far.
    """
    universe = frozenset(values if values is not None else range(1, n + 1))

    def delta(q, inv):
        if any(ev.op != "scons" or ev.process in q.invoked for ev in inv):
            return
        invoked = q.invoked | _ids(inv)
        waiting = q.pend | inv
        if not q.started and len(inv) == 1:
            (ev,) = inv
            yield frozenset([respond(ev, ev.payload)]), SafeConsensusState(ev.payload, True, invoked)
            return
        if q.started:
            choices = [q.decided]
        else:
            choices = sorted(universe | {ev.payload for ev in inv}, key=sort_key)
        for v in choices:
            for group in subsets(_by_process(waiting)):
                r = frozenset(respond(ev, v) for ev in group)
                yield r, SafeConsensusState(v, True, invoked, waiting - set(group))

    def candidates(q):
        for p in range(n):
            if p not in q.invoked:
                for v in sorted(universe, key=sort_key):
                    yield invoke(p, obj, "scons", v)

    return IntervalSpec(f"safe_consensus(n={n})", n, frozenset({"scons"}),
                        (SafeConsensusState(),), delta, candidates, one_shot=True,
                        params={"n": n, "values": tuple(sorted(universe, key=sort_key))})


def safe_consensus_check(h: IntervalExecution, n: int) -> bool:
    """Agreement, plus validity for a first invoker that returned before anyone else invoked."""
    for c in h.classes:
        for ev in c.events:
            if not 0 <= ev.process < n:
                raise BadParams(f"process {ev.process} outside 0..{n - 1}")
    decided = {ev.payload for c in h.classes if not c.is_invoking for ev in c.events}
    if len(decided) > 1:
        return False
    if not h.classes or not decided:
        return True
    first = h.classes[0]
    if len(first) == 1:
        (inv,) = first.events
        answered = {ev.process for ev in h.classes[1].events}
        if inv.process in answered:
            return decided == {inv.payload}
    return True


# --- restricted queue ----------------------------------------------------

@dataclass(frozen=True)
class QueueState:
    items: tuple = ()
    done: frozenset = frozenset()
    pend: frozenset = frozenset()


QUEUE_ROLES = {0: ("enq", 1), 1: ("enq", 2), 2: ("deq", None)}


def restricted_queue(obj: str = "X") -> IntervalSpec:
    """A one-shot FIFO queue: P0 enqueues 1, P1 enqueues 2, P2 dequeues."""

    def delta(q, inv):
        if len(inv) != 1:
            return
        (ev,) = inv
        if QUEUE_ROLES.get(ev.process) != (ev.op, ev.payload) or ev.process in q.done:
            return
        done = q.done | {ev.process}
        if ev.op == "enq":
            yield frozenset([respond(ev, OK)]), QueueState(q.items + (ev.payload,), done)
        elif q.items:
            yield frozenset([respond(ev, q.items[0])]), QueueState(q.items[1:], done)
        else:
            yield frozenset([respond(ev, BOTTOM)]), QueueState((), done)

    def candidates(q):
        for p, (op, arg) in QUEUE_ROLES.items():
            if p not in q.done:
                yield invoke(p, obj, op, arg)

    return IntervalSpec("restricted_queue", 3, frozenset({"enq", "deq"}),
                        (QueueState(),), delta, candidates,
                        flavor=Flavor.SEQUENTIAL, one_shot=True, params={"n": 3})


# --- lookup --------------------------------------------------------------

@dataclass(frozen=True)
class BuiltinObjectId:
    name: str
    params: dict = field(default_factory=dict)


_BUILDERS = {
    "validity": lambda p: validity(p["n"], p.get("U")),
    "validity_abort": lambda p: validity_abort(p["n"], p["k"], p.get("U")),
    "write_snapshot": lambda p: write_snapshot(p["n"], bool(p.get("pairs", 0))),
    "safe_consensus": lambda p: safe_consensus(p["n"], p.get("U")),
    "ws_sequential": lambda p: ws_sequential(p["n"], p.get("participants")),
    "restricted_queue": lambda p: restricted_queue(),
}

_REQUIRED = {
    "validity": {"n"},
    "validity_abort": {"n", "k"},
    "write_snapshot": {"n"},
    "safe_consensus": {"n"},
    "ws_sequential": {"n"},
    "restricted_queue": set(),
}

_ALLOWED = {
    "validity": {"n", "U"},
    "validity_abort": {"n", "k", "U"},
    "write_snapshot": {"n", "pairs"},
    "safe_consensus": {"n", "U"},
    "ws_sequential": {"n", "participants"},
    "restricted_queue": {"n"},
}


def builtin_spec(ident, **params) -> IntervalSpec:
    """Build a library object from a :class:`BuiltinObjectId` or a name."""
    if isinstance(ident, BuiltinObjectId):
        name, params = ident.name, {**ident.params, **params}
    else:
        name = ident
    if name not in _BUILDERS:
        raise UnknownObject(f"unknown object {name!r}; known: {', '.join(sorted(_BUILDERS))}")
    missing = _REQUIRED[name] - params.keys()
    unknown = params.keys() - _ALLOWED[name]
    if missing or unknown:
        raise BadParams(f"{name}: missing {sorted(missing)}, unknown {sorted(unknown)}")
    n = params.get("n", 3)
    if not isinstance(n, int) or n < 1:
        raise BadParams(f"{name}: n must be a positive integer")
    if name == "restricted_queue" and n != 3:
        raise BadParams("restricted_queue is defined for exactly 3 processes")
    return _BUILDERS[name](params)


def parse_params(text: str) -> dict:
    """``n=3,k=2,U=1+2+3`` -> {'n': 3, 'k': 2, 'U': (1, 2, 3)}."""
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise BadParams(f"malformed parameter {item!r}")
        parts = [_atom(x) for x in raw.split("+")]
        out[key.strip()] = parts[0] if len(parts) == 1 and key.strip() not in ("U", "participants") else tuple(parts)
    return out


def _atom(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return text


def parse_object_spec(text: str) -> IntervalSpec:
    """``validity_abort:n=3,k=2`` -> the corresponding IntervalSpec."""
    name, _, rest = text.partition(":")
    return builtin_spec(name.strip(), **parse_params(rest))


def role_invocation(process: int, obj: str = "X") -> Event:
    op, arg = QUEUE_ROLES[process]
    return Event(Kind.INV, process, obj, op, arg)
