"""Tasks as chromatic simplicial complexes.

A vertex is a (process, value) pair, optionally decorated with a view: the
input simplex a process "saw" when it responded (refined tasks).  A simplex
is a frozenset of vertices with distinct processes.  A complex is stored by
its facets; membership of a simplex means being a face of some facet, and
the empty simplex belongs to every complex.
"""

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, product

from .errors import BadParams, InvalidTask, MalformedEvent, NotOneShot, UnknownVertex
from .histories import Execution
from .values import _Parser, format_value, sort_key


@dataclass(frozen=True, slots=True)
class Vertex:
    process: int
    value: object
    view: frozenset | None = None

    def plain(self) -> "Vertex":
        return Vertex(self.process, self.value)

    def __str__(self):
        text = f"({self.process},{format_value(self.value)})"
        if self.view is not None:
            text += "|" + format_simplex(self.view)
        return text

    __repr__ = __str__


def vertex_key(v: Vertex):
    view = None if v.view is None else tuple(sorted(vertex_key(w) for w in v.view))
    return (v.process, sort_key(v.value), () if view is None else (1, view))


def simplex(*vertices) -> frozenset:
    """Build a simplex from Vertex objects or (process, value) pairs."""
    out = frozenset(v if isinstance(v, Vertex) else Vertex(*v) for v in vertices)
    if not is_chromatic(out):
        raise InvalidTask(f"simplex {format_simplex(out)} repeats a process")
    return out


def ids(s) -> frozenset:
    return frozenset(v.process for v in s)


def vals(s) -> frozenset:
    return frozenset(v.value for v in s)


def is_chromatic(s) -> bool:
    return len(ids(s)) == len(s)


def faces(s, include_empty: bool = False):
    """All faces of ``s``, smallest first."""
    items = sorted(s, key=vertex_key)
    start = 0 if include_empty else 1
    for k in range(start, len(items) + 1):
        for combo in combinations(items, k):
            yield frozenset(combo)


def format_simplex(s) -> str:
    return "{" + ",".join(str(v) for v in sorted(s, key=vertex_key)) + "}"


@dataclass(frozen=True)
class Complex:
    facets: frozenset = frozenset()

    def __post_init__(self):
        facets = frozenset(frozenset(f) for f in self.facets if f)
        # keep only maximal simplexes
        maximal = frozenset(f for f in facets if not any(f < g for g in facets))
        object.__setattr__(self, "facets", maximal)

    def __contains__(self, s) -> bool:
        s = frozenset(s)
        return not s or any(s <= f for f in self.facets)

    @cached_property
    def simplices(self) -> frozenset:
        """Every non-empty simplex of the complex."""
        return frozenset(face for f in self.facets for face in faces(f))

    @cached_property
    def vertices(self) -> frozenset:
        return frozenset(v for f in self.facets for v in f)

    @property
    def dimension(self) -> int:
        return max((len(f) - 1 for f in self.facets), default=-1)

    def is_pure(self, dim: int | None = None) -> bool:
        dims = {len(f) - 1 for f in self.facets}
        if dim is None:
            return len(dims) <= 1
        return dims <= {dim}

    def __le__(self, other: "Complex") -> bool:
        return all(f in other for f in self.facets)

    def sorted_facets(self) -> list:
        return sorted(self.facets, key=lambda f: (len(f), sorted(vertex_key(v) for v in f)))

    def __str__(self):
        return "; ".join(format_simplex(f) for f in self.sorted_facets())


EMPTY = Complex()


@dataclass(frozen=True)
class Task:
    """Inputs, outputs and a carrier map defined on every non-empty input simplex.

    ``operation`` names the single operation the task describes.  When it is
    None, an input vertex's value is the pair ``(op, argument)`` so tasks over
    several operations can be expressed.
    """

    name: str
    inputs: Complex
    outputs: Complex
    delta: dict = field(compare=False)
    refined: bool = False
    operation: str | None = None
    notes: dict = field(default_factory=dict, compare=False)

    def carrier(self, s) -> Complex:
        s = frozenset(s)
        if not s:
            return EMPTY
        return self.delta.get(s, EMPTY)

    @property
    def processes(self) -> frozenset:
        return ids(self.inputs.vertices)


def validate_task(t: Task) -> list[str]:
    """Violations of the task conditions; an empty list means the task is valid."""
    problems = []
    for f in t.inputs.facets | t.outputs.facets:
        if not is_chromatic(f):
            problems.append(f"simplex {format_simplex(f)} is not chromatic")
    for s in sorted(t.delta, key=lambda s: (len(s), sorted(vertex_key(v) for v in s))):
        if s not in t.inputs:
            problems.append(f"carrier defined on {format_simplex(s)}, not an input simplex")
    for s in _ordered(t.inputs.simplices):
        name = format_simplex(s)
        if s not in t.delta:
            problems.append(f"carrier undefined on {name}")
            continue
        image = t.delta[s]
        for f in image.sorted_facets():
            plain = frozenset(v.plain() for v in f) if t.refined else f
            if plain not in _plain_outputs(t):
                problems.append(f"{format_simplex(f)} in carrier of {name} is not an output simplex")
            if len(f) != len(s):
                problems.append(f"carrier of {name} is not pure of dimension {len(s) - 1}")
            if ids(f) != ids(s):
                problems.append(f"carrier facet {format_simplex(f)} of {name} has other processes")
            if t.refined:
                for v in sorted(f, key=vertex_key):
                    if v.view is None or not v.view <= s or v.process not in ids(v.view):
                        problems.append(f"vertex {v} of the carrier of {name} has a bad view")
        for sub in faces(s):
            if sub != s and sub in t.delta and not t.delta[sub] <= image:
                problems.append(f"carrier not monotone: {format_simplex(sub)} inside {name}")
    return problems


def _plain_outputs(t: Task) -> Complex:
    if not t.refined:
        return t.outputs
    return Complex(frozenset(frozenset(v.plain() for v in f) for f in t.outputs.facets))


def _ordered(simplices):
    return sorted(simplices, key=lambda s: (len(s), sorted(vertex_key(v) for v in s)))


def pseudosphere(values, processes) -> Complex:
    """All assignments of a value from ``values`` to each process."""
    procs = sorted(processes)
    vs = sorted(values, key=sort_key)
    if not procs or not vs:
        raise BadParams("pseudosphere needs non-empty values and processes")
    return Complex(frozenset(
        frozenset(Vertex(p, x) for p, x in zip(procs, choice))
        for choice in product(vs, repeat=len(procs))
    ))


# --- satisfaction --------------------------------------------------------

@dataclass
class TaskVerdict:
    """Truthy iff every prefix satisfies the carrier condition."""

    result: bool
    violating_prefix: int | None = None  # length of the shortest failing prefix
    reason: str = ""

    def __bool__(self):
        return self.result


def _input_value(t: Task, ev):
    return ev.payload if t.operation is not None else (ev.op, ev.payload)


def _check_single(e: Execution, t: Task):
    if not e.is_one_shot() or len(e.objects) > 1:
        raise NotOneShot("task satisfaction needs a one-shot execution on one object")
    if t.operation is not None:
        ops = {ev.op for ev in e}
        if ops - {t.operation}:
            raise NotOneShot(f"operations {sorted(ops)} differ from the task's {t.operation!r}")


def satisfies_task(e: Execution, t: Task) -> TaskVerdict:
    """Does every prefix map its inputs to a simplex of the carrier?"""
    if t.refined:
        return satisfies_refined_task(e, t)
    _check_single(e, t)
    in_vertices = t.inputs.vertices
    out_vertices = _plain_outputs(t).vertices
    sigma: set = set()
    tau: set = set()
    for k, ev in enumerate(e, start=1):
        if ev.is_invocation:
            v = Vertex(ev.process, _input_value(t, ev))
            if v not in in_vertices:
                raise UnknownVertex(f"input {v} is not a vertex of {t.name}")
            sigma.add(v)
        else:
            v = Vertex(ev.process, ev.payload)
            if v not in out_vertices:
                raise UnknownVertex(f"output {v} is not a vertex of {t.name}")
            tau.add(v)
        s = frozenset(sigma)
        if s not in t.inputs:
            return TaskVerdict(False, k, f"inputs {format_simplex(s)} are not an input simplex")
        if frozenset(tau) not in t.carrier(s):
            return TaskVerdict(False, k, f"outputs {format_simplex(tau)} not allowed for {format_simplex(s)}")
    return TaskVerdict(True)


def satisfies_refined_task(e: Execution, t: Task) -> TaskVerdict:
    """As :func:`satisfies_task`, each output decorated with the inputs seen before it."""
    _check_single(e, t)
    in_vertices = t.inputs.vertices
    out_plain = {v.plain() for v in t.outputs.vertices}
    sigma: set = set()
    tau: set = set()
    for k, ev in enumerate(e, start=1):
        if ev.is_invocation:
            v = Vertex(ev.process, _input_value(t, ev))
            if v not in in_vertices:
                raise UnknownVertex(f"input {v} is not a vertex of {t.name}")
            sigma.add(v)
        else:
            plain = Vertex(ev.process, ev.payload)
            if plain not in out_plain:
                raise UnknownVertex(f"output {plain} is not a vertex of {t.name}")
            tau.add(Vertex(ev.process, ev.payload, frozenset(sigma)))
        s = frozenset(sigma)
        if s not in t.inputs:
            return TaskVerdict(False, k, f"inputs {format_simplex(s)} are not an input simplex")
        if frozenset(tau) not in t.carrier(s):
            return TaskVerdict(False, k, f"outputs {format_simplex(tau)} not allowed for {format_simplex(s)}")
    return TaskVerdict(True)


def execution_simplices(e: Execution, t: Task):
    """(sigma_E, tau_E) as plain simplexes."""
    sigma = frozenset(Vertex(ev.process, _input_value(t, ev)) for ev in e if ev.is_invocation)
    tau = frozenset(Vertex(ev.process, ev.payload) for ev in e if ev.is_response)
    return sigma, tau


# --- built-in tasks ------------------------------------------------------

def _task(name, inputs: Complex, image, operation, refined=False) -> Task:
    delta = {s: Complex(image(s)) for s in inputs.simplices}
    outputs = Complex(frozenset(f for c in delta.values() for f in c.facets))
    return Task(name, inputs, outputs, delta, refined, operation)


def validity_task(n: int, values=None) -> Task:
    """Each process outputs some input of a participating process."""
    universe = values if values is not None else range(1, n + 1)
    inputs = pseudosphere(universe, range(n))
    return _task(f"validity(n={n})", inputs,
                 lambda s: pseudosphere(vals(s), ids(s)).facets, "validity")


def _snapshot_facets(s, immediate: bool):
    """Views per process: own value included, pairwise comparable."""
    members = sorted(s, key=vertex_key)
    universe = sorted(vals(s), key=sort_key)
    options = []
    for v in members:
        others = [x for x in universe if x != v.value]
        options.append([frozenset((v.value,) + extra)
                        for k in range(len(others) + 1)
                        for extra in combinations(others, k)])
    for views in product(*options):
        ok = all(a <= b or b <= a for a, b in combinations(views, 2))
        if ok and immediate:
            ok = all(not (u.value in vb) or va <= vb
                     for (u, va), (_, vb) in product(zip(members, views), repeat=2))
        if ok:
            yield frozenset(Vertex(v.process, view) for v, view in zip(members, views))


def write_snapshot_task(n: int, inputs=None) -> Task:
    """Self-inclusion and containment over one input per process."""
    inputs = inputs or {p: p + 1 for p in range(n)}
    icx = Complex(frozenset([frozenset(Vertex(p, x) for p, x in inputs.items())]))
    return _task(f"write_snapshot(n={n})", icx, lambda s: _snapshot_facets(s, False), "ws")


def immediate_snapshot_task(n: int, inputs=None) -> Task:
    """Write-snapshot plus immediacy."""
    inputs = inputs or {p: p + 1 for p in range(n)}
    icx = Complex(frozenset([frozenset(Vertex(p, x) for p, x in inputs.items())]))
    return _task(f"immediate_snapshot(n={n})", icx, lambda s: _snapshot_facets(s, True), "ws")


def k_set_agreement_task(n: int, k: int, values=None) -> Task:
    """Outputs are inputs of participants, at most ``k`` distinct ones."""
    if not 1 <= k:
        raise BadParams("k must be positive")
    universe = values if values is not None else range(n)
    inputs = pseudosphere(universe, range(n))

    def image(s):
        procs = sorted(ids(s))
        for choice in product(sorted(vals(s), key=sort_key), repeat=len(procs)):
            if len(set(choice)) <= k:
                yield frozenset(Vertex(p, x) for p, x in zip(procs, choice))

    return _task(f"k_set_agreement(n={n},k={k})", inputs, image, "propose")


def builtin_task(name: str, **params) -> Task:
    builders = {
        "validity": (validity_task, {"n"}, {"n", "U"}),
        "write_snapshot": (write_snapshot_task, {"n"}, {"n"}),
        "immediate_snapshot": (immediate_snapshot_task, {"n"}, {"n"}),
        "k_set_agreement": (k_set_agreement_task, {"n", "k"}, {"n", "k", "U"}),
    }
    if name not in builders:
        raise BadParams(f"unknown task {name!r}; known: {', '.join(sorted(builders))}")
    build, required, allowed = builders[name]
    missing, unknown = required - params.keys(), params.keys() - allowed
    if missing or unknown:
        raise BadParams(f"{name}: missing {sorted(missing)}, unknown {sorted(unknown)}")
    n = params["n"]
    if not isinstance(n, int) or n < 1:
        raise BadParams(f"{name}: n must be a positive integer")
    args = {"n": n}
    if "k" in params:
        args["k"] = params["k"]
    if "U" in params:
        args["values"] = params["U"]
    return build(**args)


def parse_task_spec(text: str) -> Task:
    """``k_set_agreement:n=2,k=1`` -> the corresponding built-in task."""
    from .objects import parse_params

    name, _, rest = text.partition(":")
    return builtin_task(name.strip(), **parse_params(rest))


# --- task files ----------------------------------------------------------

def parse_simplex(text: str) -> frozenset:
    p = _Parser(text)
    p.take("{")
    out = []
    if p.at("}"):
        p.take("}")
    else:
        while True:
            pair = p.value()
            if not isinstance(pair, tuple) or len(pair) != 2 or not isinstance(pair[0], int):
                raise MalformedEvent(f"vertex must be (process,value), got {pair!r}")
            view = None
            if p.at("|"):
                p.take("|")
                view = parse_simplex_from(p)
            out.append(Vertex(pair[0], pair[1], view))
            if p.at(","):
                p.take(",")
                continue
            p.take("}")
            break
    if not p.done():
        raise MalformedEvent(f"trailing text in simplex {text!r}")
    s = frozenset(out)
    if not is_chromatic(s):
        raise InvalidTask(f"simplex {text!r} repeats a process")
    return s


def parse_simplex_from(p: _Parser) -> frozenset:
    start = p.pos
    depth = 0
    text = p.text
    i = text.index("{", start)
    for j in range(i, len(text)):
        if text[j] == "{":
            depth += 1
        elif text[j] == "}":
            depth -= 1
            if depth == 0:
                p.pos = j + 1
                return parse_simplex(text[i:j + 1])
    raise MalformedEvent(f"unbalanced braces in {text!r}")


def parse_task(text: str, name: str = "task") -> Task:
    """Read the INPUTS / OUTPUTS / DELTA format."""
    section = None
    inputs, outputs, delta = [], [], {}
    operation = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.upper()
        if head in ("INPUTS", "OUTPUTS", "DELTA"):
            section = head
            continue
        if head.startswith("OPERATION"):
            operation = line.split(None, 1)[1].strip() if " " in line else None
            continue
        if head.startswith("NAME"):
            name = line.split(None, 1)[1].strip()
            continue
        try:
            if section == "INPUTS":
                inputs.append(parse_simplex(line))
            elif section == "OUTPUTS":
                outputs.append(parse_simplex(line))
            elif section == "DELTA":
                left, arrow, right = line.partition("->")
                if not arrow:
                    raise MalformedEvent("DELTA lines need '->'")
                key = parse_simplex(left.strip())
                image = [parse_simplex(part.strip()) for part in right.split(";") if part.strip()]
                delta[key] = Complex(frozenset(image))
            else:
                raise MalformedEvent("content before any section header")
        except MalformedEvent as exc:
            raise MalformedEvent(f"line {lineno}: {exc}") from None
    refined = any(v.view is not None for f in outputs for v in f)
    return Task(name, Complex(frozenset(inputs)), Complex(frozenset(outputs)), delta, refined, operation)


def format_task(t: Task) -> str:
    lines = [f"NAME {t.name}"]
    if t.operation is not None:
        lines.append(f"OPERATION {t.operation}")
    lines.append("INPUTS")
    lines += [format_simplex(f) for f in t.inputs.sorted_facets()]
    lines.append("OUTPUTS")
    lines += [format_simplex(f) for f in t.outputs.sorted_facets()]
    lines.append("DELTA")
    for s in _ordered(t.delta):
        image = "; ".join(format_simplex(f) for f in t.delta[s].sorted_facets())
        lines.append(f"{format_simplex(s)} -> {image}".rstrip())
    return "\n".join(lines) + "\n"


def load_task(path) -> Task:
    with open(path, encoding="utf-8") as fh:
        return parse_task(fh.read())
