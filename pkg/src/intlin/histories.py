"""Executions (histories) of processes on shared objects.

An execution is a totally ordered list of invocation and response events.
List order is real time; there are no timestamps.
"""

import enum
import re
from dataclasses import dataclass, field

from .errors import MalformedEvent, NoPendingMatch, NotWellFormed
from .values import format_value, parse_value


class Kind(enum.Enum):
    INV = "inv"
    RES = "res"


INV = Kind.INV
RES = Kind.RES


@dataclass(frozen=True, slots=True)
class Event:
    kind: Kind
    process: int
    obj: str
    op: str
    payload: object = None

    @property
    def is_invocation(self) -> bool:
        return self.kind is Kind.INV

    @property
    def is_response(self) -> bool:
        return self.kind is Kind.RES

    def __str__(self):
        return format_event(self)


def invoke(process: int, obj: str, op: str, payload=None) -> Event:
    return Event(INV, process, obj, op, payload)


def respond(invocation: Event, payload) -> Event:
    """The response event answering ``invocation`` with ``payload``."""
    return Event(RES, invocation.process, invocation.obj, invocation.op, payload)


@dataclass(frozen=True, slots=True)
class OperationCall:
    """An invocation together with its matching response (if any).

    ``inv_index`` / ``res_index`` are positions in the owning execution.
    """

    invocation: Event
    response: Event | None
    inv_index: int
    res_index: int | None = None

    @property
    def process(self) -> int:
        return self.invocation.process

    @property
    def obj(self) -> str:
        return self.invocation.obj

    @property
    def pending(self) -> bool:
        return self.response is None


def check_well_formed(events, one_shot: bool = False) -> None:
    """Raise NotWellFormed unless ``events`` is a well-formed sequence."""
    pending: dict[int, Event] = {}
    invoked: set[tuple[int, str]] = set()
    for pos, ev in enumerate(events, start=1):
        if not isinstance(ev, Event):
            raise NotWellFormed(f"event {pos} is not an Event: {ev!r}", pos)
        if ev.process < 0:
            raise NotWellFormed(f"event {pos}: negative process id", pos)
        if ev.is_invocation:
            if ev.process in pending:
                raise NotWellFormed(
                    f"event {pos}: P{ev.process} invokes while its call "
                    f"{format_event(pending[ev.process])} is pending", pos)
            if one_shot and (ev.process, ev.obj) in invoked:
                raise NotWellFormed(
                    f"event {pos}: P{ev.process} invokes {ev.obj} twice in one-shot mode", pos)
            pending[ev.process] = ev
            invoked.add((ev.process, ev.obj))
        else:
            inv = pending.get(ev.process)
            if inv is None:
                raise NotWellFormed(f"event {pos}: response without a pending invocation", pos)
            if (inv.obj, inv.op) != (ev.obj, ev.op):
                raise NotWellFormed(
                    f"event {pos}: response {ev.obj}.{ev.op} does not match pending "
                    f"{inv.obj}.{inv.op}", pos)
            del pending[ev.process]


@dataclass(frozen=True)
class Execution:
    events: tuple = ()
    one_shot: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        check_well_formed(self.events, self.one_shot)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i):
        return self.events[i]

    def __str__(self):
        return format_execution(self)

    @property
    def processes(self) -> list[int]:
        return sorted({ev.process for ev in self.events})

    @property
    def objects(self) -> list[str]:
        return sorted({ev.obj for ev in self.events})

    def calls(self) -> list[OperationCall]:
        """All operation calls, ordered by invocation position."""
        calls: list[OperationCall] = []
        open_call: dict[int, int] = {}
        for i, ev in enumerate(self.events):
            if ev.is_invocation:
                open_call[ev.process] = len(calls)
                calls.append(OperationCall(ev, None, i))
            else:
                k = open_call.pop(ev.process)
                c = calls[k]
                calls[k] = OperationCall(c.invocation, ev, c.inv_index, i)
        return calls

    def pending_calls(self) -> list[OperationCall]:
        return [c for c in self.calls() if c.pending]

    def is_one_shot(self) -> bool:
        seen = set()
        for ev in self.events:
            if ev.is_invocation:
                if (ev.process, ev.obj) in seen:
                    return False
                seen.add((ev.process, ev.obj))
        return True


def complete(e: Execution) -> Execution:
    """comp(E): drop the pending invocations."""
    drop = {c.inv_index for c in e.calls() if c.pending}
    return Execution([ev for i, ev in enumerate(e.events) if i not in drop], e.one_shot)


def extend(e: Execution, responses) -> Execution:
    """Append responses, each answering a distinct pending invocation of ``e``."""
    pending = {c.process: c.invocation for c in e.calls() if c.pending}
    used = set()
    for r in responses:
        inv = pending.get(r.process)
        if (not r.is_response or inv is None or r.process in used
                or (inv.obj, inv.op) != (r.obj, r.op)):
            raise NoPendingMatch(f"{format_event(r)} matches no pending invocation")
        used.add(r.process)
    return Execution(e.events + tuple(responses), e.one_shot)


@dataclass(frozen=True)
class PrecedenceOrder:
    """Real-time order on the completed calls: a before b iff term(a) < init(b)."""

    calls: tuple
    pairs: frozenset  # of (i, j) indices into ``calls``

    def precedes(self, a: int, b: int) -> bool:
        return (a, b) in self.pairs

    def concurrent(self, a: int, b: int) -> bool:
        return a != b and (a, b) not in self.pairs and (b, a) not in self.pairs


def precedence(e: Execution) -> PrecedenceOrder:
    calls = tuple(c for c in e.calls() if not c.pending)
    pairs = frozenset(
        (i, j)
        for i, a in enumerate(calls)
        for j, b in enumerate(calls)
        if a.res_index < b.inv_index
    )
    return PrecedenceOrder(calls, pairs)


def project_process(e: Execution, p: int) -> Execution:
    return Execution([ev for ev in e.events if ev.process == p], e.one_shot)


def project_object(e: Execution, x: str) -> Execution:
    return Execution([ev for ev in e.events if ev.obj == x], e.one_shot)


def prefixes(e: Execution) -> list[Execution]:
    return [Execution(e.events[:k], e.one_shot) for k in range(len(e.events) + 1)]


# --- history file format ---------------------------------------------------

_INV_LINE = re.compile(r"^P(\d+)\s+inv\s+([A-Za-z_][\w]*)\.([A-Za-z_][\w]*)\((.*)\)\s*$")
_RES_LINE = re.compile(r"^P(\d+)\s+res\s+([A-Za-z_][\w]*)\.([A-Za-z_][\w]*)\s*->\s*(.*?)\s*$")


def format_event(ev: Event) -> str:
    if ev.is_invocation:
        return f"P{ev.process} inv {ev.obj}.{ev.op}({format_value(ev.payload)})"
    return f"P{ev.process} res {ev.obj}.{ev.op} -> {format_value(ev.payload)}"


def parse_event(line: str) -> Event:
    m = _INV_LINE.match(line.strip())
    if m:
        return Event(INV, int(m[1]), m[2], m[3], parse_value(m[4]))
    m = _RES_LINE.match(line.strip())
    if m:
        if m[4] == "":
            raise MalformedEvent(f"response without payload: {line!r}")
        return Event(RES, int(m[1]), m[2], m[3], parse_value(m[4]))
    raise MalformedEvent(f"cannot parse event: {line!r}")


def parse_execution(text: str, one_shot: bool = False) -> Execution:
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            events.append(parse_event(line))
        except MalformedEvent as exc:
            raise MalformedEvent(f"line {lineno}: {exc}") from None
    return Execution(events, one_shot)


def format_execution(e: Execution) -> str:
    return "".join(format_event(ev) + "\n" for ev in e.events)


def load_execution(path, one_shot: bool = False) -> Execution:
    with open(path, encoding="utf-8") as fh:
        return parse_execution(fh.read(), one_shot)
