"""Command-line entry point: ``intlin check|simulate|convert|validate|demo``.

Exit codes: 0 for yes / success, 1 for no / violations, 2 for usage or
internal errors.  Results go to stdout, diagnostics to stderr.
"""

import argparse
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import redirect_stdout
from importlib import resources
from pathlib import Path

from . import checker
from .bridges import (naive_task_from_object, object_to_refined_task, refined_task_to_object,
                      task_to_object, task_to_split_sequential)
from .errors import IntlinError, UnknownDemo
from .histories import format_execution, load_execution, parse_execution
from .interval_spec import IntervalExecution, accepts, explore, transitions, _classes
from .objects import parse_object_spec, restricted_queue, validity, validity_abort, write_snapshot, ws_sequential
from .simulator import (containment, enumerate_traces, fuzz_write_snapshot, self_inclusion,
                        witness_from_trace)
from .tasks import format_task, load_task, parse_task_spec, satisfies_task, validate_task, validity_task

CONDITIONS = {
    "lin": checker.check_linearizable,
    "setlin": checker.check_set_linearizable,
    "intlin": checker.check_interval_linearizable,
    "local": checker.check_local,
}
MODES = {"lin": checker.LINEAR, "setlin": checker.SET, "intlin": checker.INTERVAL}


# --- rendering -----------------------------------------------------------

def witness_table(w: IntervalExecution) -> str:
    """One column per class, one row per process; cells show init(arg) / term(result)."""
    from .values import format_value

    procs = sorted({ev.process for c in w for ev in c})
    heads = [("I" if c.is_invoking else "R") + str(i // 2) for i, c in enumerate(w)]
    rows = []
    for p in procs:
        cells = []
        for c in w:
            ev = c.by_process().get(p)
            if ev is None:
                cells.append("")
            elif ev.is_invocation:
                cells.append(f"init {ev.obj}.{ev.op}({format_value(ev.payload)})")
            else:
                cells.append(f"term {format_value(ev.payload)}")
        rows.append([f"P{p}"] + cells)
    table = [["", *heads]] + rows
    widths = [max(len(r[k]) for r in table) for k in range(len(table[0]))]
    return "\n".join("  ".join(cell.ljust(wd) for cell, wd in zip(r, widths)).rstrip() for r in table)


def _specs(entries):
    """``--object`` values: ``SPEC`` for every object or ``ID=SPEC`` per object."""
    named = {}
    default = None
    for text in entries:
        eq, colon = text.find("="), text.find(":")
        if eq > 0 and (colon < 0 or eq < colon):
            named[text[:eq].strip()] = parse_object_spec(text[eq + 1:])
        else:
            default = parse_object_spec(text)
    return named, default


def _spec_map(e, named, default):
    out = {}
    for x in e.objects:
        if x in named:
            out[x] = named[x]
        elif default is not None:
            out[x] = default
        else:
            raise IntlinError(f"no --object given for {x}")
    return out


# --- subcommands ---------------------------------------------------------

def cmd_check(args) -> int:
    named, default = _specs(args.object)

    def one(path):
        e = load_execution(path, one_shot=args.one_shot)
        specs = _spec_map(e, named, default)
        buf = io.StringIO()
        if args.all:
            mode = MODES.get(args.condition, checker.INTERVAL)
            found = checker.all_witnesses(e, specs, mode, limit=args.all)
            print(f"{path}: {len(found)} witness(es) (experimental)", file=buf)
            for w in found:
                print(witness_table(w), file=buf)
                print(file=buf)
            return bool(found), buf.getvalue()
        v = CONDITIONS[args.condition](e, specs)
        verdict = "yes" if v else "no"
        extra = f" (failing object {v.failing_object})" if v.failing_object else ""
        print(f"{path}: {args.condition} {verdict}{extra} [{v.nodes} nodes]", file=buf)
        if v and args.witness and v.witness is not None:
            print(witness_table(v.witness), file=buf)
            if v.appended:
                print("appended: " + "; ".join(str(ev) for ev in v.appended), file=buf)
        return bool(v), buf.getvalue()

    if args.jobs > 1:
        with ThreadPoolExecutor(args.jobs) as pool:
            results = list(pool.map(one, args.histories))
    else:
        results = [one(p) for p in args.histories]
    for _, text in results:
        sys.stdout.write(text)
    return 0 if all(ok for ok, _ in results) else 1


def cmd_simulate(args) -> int:
    if args.algorithm != "write-snapshot":
        raise IntlinError(f"unknown algorithm {args.algorithm!r}")
    if args.enumerate:
        traces = enumerate_traces(args.n, args.max_steps)
    else:
        traces = fuzz_write_snapshot(args.n, args.seed, args.count, args.stop_prob)
    spec = write_snapshot(args.n)
    total = passed = props = 0
    emit = Path(args.emit) if args.emit else None
    if emit:
        emit.mkdir(parents=True, exist_ok=True)
    for k, tr in enumerate(traces):
        total += 1
        props += self_inclusion(tr) and containment(tr)
        if emit:
            (emit / f"trace_{k:05d}.hist").write_text(format_execution(tr.execution), encoding="utf-8")
        if args.check:
            v = checker.check_interval_linearizable(tr.execution, spec, canonical=False)
            w, appended = witness_from_trace(tr)
            direct = not checker.verify_witness(tr.execution, spec, w, appended)
            passed += bool(v) and direct
    print(f"traces: {total}")
    print(f"self-inclusion and containment: {props}/{total}")
    if args.check:
        print(f"interval-linearizable: {passed}/{total}")
    ok = props == total and (not args.check or passed == total)
    return 0 if ok else 1


def _load_task(args):
    if args.task_file:
        return load_task(args.task_file)
    if args.task:
        return parse_task_spec(args.task)
    raise IntlinError("give --task or --task-file")


def _summary(spec, bound) -> str:
    states = explore(spec, bound)
    edges = sum(1 for q in states for group in _classes(list(spec.candidates(q)))
                for _ in transitions(spec, q, group))
    return f"{spec.name}: {len(states)} reachable states, {edges} transitions"


def cmd_convert(args) -> int:
    if args.kind in ("task-to-object", "split"):
        t = _load_task(args)
        if args.kind == "split":
            spec = task_to_split_sequential(t)
        elif t.refined:
            spec = refined_task_to_object(t)
        else:
            spec = task_to_object(t)
        print(_summary(spec, args.state_bound))
        return 0
    if not args.object:
        raise IntlinError("object-to-task needs --object")
    spec = parse_object_spec(args.object)
    t = object_to_refined_task(spec, bound=args.bound)
    text = format_task(t)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    notes = t.notes
    print(f"# bound {notes['bound']} events, {notes['executions']} executions checked, "
          f"truncated: {', '.join(notes['truncated']) or 'none'}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    t = _load_task(args)
    problems = validate_task(t)
    for p in problems:
        print(p)
    print(f"{t.name}: {'valid' if not problems else f'{len(problems)} violation(s)'}")
    return 0 if not problems else 1


# --- demos ---------------------------------------------------------------

def _data(name: str):
    return parse_execution(resources.files("intlin").joinpath("data", name).read_text(encoding="utf-8"))


def _yes(v) -> str:
    return "yes" if v else "no"


def demo_fig3():
    e = _data("fig3.hist")
    v = checker.check_linearizable(e, ws_sequential(3))
    print(f"fig3 vs ws_sequential, linearizable: {_yes(v)}")
    run = accepts(ws_sequential(3), v.witness)
    print("automaton path: " + " -> ".join(_fmt_set(q.snap) for q in run.states))
    print(f"fig3 vs write_snapshot, set-linearizable: {_yes(checker.check_set_linearizable(e, write_snapshot(3)))}")


def _fmt_set(s) -> str:
    from .values import format_value
    return format_value(frozenset(s))


def demo_fig4():
    e = _data("fig4.hist")
    spec = write_snapshot(3)
    v = checker.check_interval_linearizable(e, spec)
    print(f"fig4 vs write_snapshot, interval-linearizable: {_yes(v)}")
    print(witness_table(v.witness))
    print(f"fig4 vs write_snapshot, set-linearizable: {_yes(checker.check_set_linearizable(e, spec))}")


def demo_validity():
    e = _data("validity.hist")
    v = checker.check_interval_linearizable(e, validity(3))
    print(f"validity execution, interval-linearizable: {_yes(v)}")
    print(witness_table(v.witness))
    f = _data("validity_future.hist")
    t = validity_task(3)
    sat = satisfies_task(f, t)
    print(f"future-predicting execution satisfies the validity task: {_yes(sat)} "
          f"(first violating prefix has {sat.violating_prefix} events)")
    lin = checker.check_interval_linearizable(f, task_to_object(t))
    print(f"same execution vs the task's object, interval-linearizable: {_yes(lin)}")


def demo_validity_abort():
    e = _data("validity_abort.hist")
    for k in (2, 3):
        v = checker.check_interval_linearizable(e, validity_abort(3, k))
        print(f"validity-abort k={k}, interval-linearizable: {_yes(v)}")
        if v:
            print(witness_table(v.witness))


def demo_lemma1():
    q = restricted_queue()
    naive = naive_task_from_object(q)
    for name in ("alpha1", "alpha2", "alpha3"):
        e = _data(f"queue_{name}.hist")
        print(f"{name}: linearizable {_yes(checker.check_linearizable(e, q))}, "
              f"satisfies naive task {_yes(satisfies_task(e, naive))}")


def demo_theorem1():
    spec = write_snapshot(2)
    total = ok = 0
    for tr in enumerate_traces(2):
        total += 1
        v = checker.check_interval_linearizable(tr.execution, spec, canonical=False)
        ok += bool(v) and self_inclusion(tr) and containment(tr)
    print(f"n=2 schedules: {total}, interval-linearizable with valid outputs: {ok} "
          f"({100 * ok // total}%)")


DEMOS = {
    "fig3": demo_fig3,
    "fig4": demo_fig4,
    "validity": demo_validity,
    "validity_abort": demo_validity_abort,
    "lemma1": demo_lemma1,
    "theorem1": demo_theorem1,
}


def run_demo(name: str) -> str:
    if name not in DEMOS:
        raise UnknownDemo(f"unknown demo {name!r}; known: {', '.join(DEMOS)}")
    buf = io.StringIO()
    with redirect_stdout(buf):
        DEMOS[name]()
    return buf.getvalue()


def golden(name: str) -> str:
    return resources.files("intlin").joinpath("golden", f"{name}.txt").read_text(encoding="utf-8")


def cmd_demo(args) -> int:
    actual = run_demo(args.name)
    sys.stdout.write(actual)
    if args.no_golden:
        return 0
    expected = golden(args.name)
    if actual != expected:
        print(f"demo {args.name}: output differs from the stored golden", file=sys.stderr)
        print("--- expected ---\n" + expected, file=sys.stderr)
        return 1
    print(f"demo {args.name}: matches golden", file=sys.stderr)
    return 0


# --- argument parsing ----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="intlin", description="Interval-linearizability toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="check histories against object specs")
    c.add_argument("--condition", choices=sorted(CONDITIONS), default="intlin")
    c.add_argument("--object", action="append", required=True,
                   help="SPEC for every object, or ID=SPEC; e.g. validity_abort:n=3,k=2")
    c.add_argument("--witness", action="store_true", help="print the witness table")
    c.add_argument("--all", type=int, nargs="?", const=20, default=0, metavar="N",
                   help="experimental: list up to N witnesses")
    c.add_argument("--one-shot", action="store_true", help="reject repeated calls per object")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("histories", nargs="+")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("simulate", help="run the write-snapshot algorithm")
    s.add_argument("algorithm", choices=["write-snapshot"])
    s.add_argument("-n", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--stop-prob", type=float, default=0.0)
    s.add_argument("--enumerate", action="store_true", help="all schedules instead of random ones")
    s.add_argument("--max-steps", type=int, default=None)
    s.add_argument("--emit", metavar="DIR")
    s.add_argument("--check", action="store_true")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("convert", help="translate between tasks and objects")
    v.add_argument("kind", choices=["task-to-object", "object-to-task", "split"])
    v.add_argument("--task")
    v.add_argument("--task-file")
    v.add_argument("--object")
    v.add_argument("--bound", type=int, default=4, help="event bound for object-to-task")
    v.add_argument("--state-bound", type=int, default=100_000)
    v.add_argument("--out")
    v.set_defaults(func=cmd_convert)

    t = sub.add_parser("validate", help="validate a task")
    t.add_argument("--task")
    t.add_argument("--task-file")
    t.set_defaults(func=cmd_validate)

    d = sub.add_parser("demo", help="replay a stored scenario")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("--no-golden", action="store_true", help="skip the golden comparison")
    d.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except (IntlinError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
