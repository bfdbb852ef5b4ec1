"""The ten acceptance criteria, each reported as one PASS/FAIL line."""

import random
import time
from importlib import resources

import pytest

from acceptance_log import record
from corpus import all_executions, sample_execution
from oracles import brute_force
from intlin.bridges import (claim2_violations, naive_task_from_object, object_to_refined_task,
                            refined_task_to_object, sequences, task_to_object)
from intlin.checker import (check_interval_linearizable, check_linearizable, check_local,
                            check_set_linearizable, nonblocking_extension, verify_witness)
from intlin.errors import NoResponseFound
from intlin.histories import extend, load_execution
from intlin.interval_spec import accepts
from intlin.objects import restricted_queue, validity, write_snapshot, ws_sequential
from intlin.simulator import (containment, enumerate_traces, fuzz_write_snapshot, self_inclusion,
                              witness_from_trace)
from intlin.tasks import (immediate_snapshot_task, satisfies_refined_task, satisfies_task,
                          validity_task, write_snapshot_task)

DATA = resources.files("intlin") / "data"


def load(name):
    return load_execution(DATA / name)


def shape(w):
    return [("I" if c.is_invoking else "R") + "".join(str(p) for p in sorted(c.processes)) for c in w]


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


@pytest.fixture(scope="module")
def validity_corpus():
    """Every n=2 validity execution: one call each with any input, or two calls each with fixed inputs."""
    one_shot = all_executions([0, 1], 1, lambda p, k: [1, 2], [1, 2, 3], 8)
    multi = all_executions([0, 1], 2, lambda p, k: [p + 1], [1, 2, 3], 8)
    return one_shot + multi


def test_criterion_01_figure_goldens():
    checks = []
    fig3, t = timed(lambda: check_linearizable(load("fig3.hist"), ws_sequential(3)))
    path = [set(q.snap) for q in accepts(ws_sequential(3), fig3.witness).states] if fig3 else None
    checks.append((bool(fig3) and path == [set(), {1, 2}, {1, 2}, {1, 2, 3}], t))
    fig4, t = timed(lambda: check_interval_linearizable(load("fig4.hist"), write_snapshot(3)))
    checks.append((bool(fig4) and shape(fig4.witness) == ["I01", "R0", "I2", "R12"], t))
    fig4_set, t = timed(lambda: check_set_linearizable(load("fig4.hist"), write_snapshot(3)))
    checks.append((not fig4_set, t))
    val, t = timed(lambda: check_interval_linearizable(load("validity.hist"), validity(3)))
    checks.append((bool(val) and shape(val.witness) == ["I01", "R0", "I2", "R12"], t))
    ok = all(good and secs < 1.0 for good, secs in checks)
    slowest = max(secs for _, secs in checks)
    record(1, ok, f"fig3 lin, fig4 intlin/setlin, validity witness: "
                  f"{sum(g for g, _ in checks)}/4 verdicts exact, slowest {slowest * 1000:.1f} ms")
    assert ok


def test_criterion_02_simulated_write_snapshot_traces():
    start = time.perf_counter()
    bad = []
    counts = {}
    for n, traces in ((2, enumerate_traces(2)), (3, fuzz_write_snapshot(3, seed=2024, count=1000)),
                      (3, fuzz_write_snapshot(3, seed=7, count=200, stop_prob=0.05))):
        spec = write_snapshot(n)
        for tr in traces:
            counts[n] = counts.get(n, 0) + 1
            v = check_interval_linearizable(tr.execution, spec, canonical=False)
            w, appended = witness_from_trace(tr)
            direct = verify_witness(tr.execution, spec, w, appended)
            if not (v and self_inclusion(tr) and containment(tr) and not direct):
                bad.append(tr.schedule)
    secs = time.perf_counter() - start
    ok = not bad and counts[2] == 483 and counts[3] >= 1000 and secs < 300
    record(2, ok, f"{counts[2]} exhaustive n=2 traces + {counts[3]} seeded n=3 traces, "
                  f"{len(bad)} failures, {secs:.1f} s")
    assert ok


def test_criterion_03_checker_matches_brute_force(validity_corpus):
    spec = {"X": validity(2)}
    wrong = []
    for e in validity_corpus:
        if bool(check_interval_linearizable(e, spec, canonical=False)) != brute_force(e, spec, [1, 2]):
            wrong.append(str(e))
    yes = sum(1 for e in validity_corpus if check_interval_linearizable(e, spec, canonical=False))
    ok = not wrong
    record(3, ok, f"{len(validity_corpus)} n=2 validity executions (<= 8 events), "
                  f"{yes} linearizable, {len(wrong)} disagreements")
    assert ok


def _two_object_payload(rng, inv, seen):
    invoked = {ev.payload for ev in seen[inv.obj]}
    if inv.obj == "X":
        pool = sorted(invoked) if rng.random() < 0.8 else [1, 2, 3]
        return rng.choice(pool)
    if rng.random() < 0.7:
        return frozenset(invoked)
    return frozenset({inv.payload} | {v for v in (1, 2, 3) if rng.random() < 0.5})


def test_criterion_04_locality():
    rng = random.Random(4)
    specs = {"X": validity(3), "Y": write_snapshot(3)}
    checked = agree = verified = yes = 0
    while checked < 600:
        n = rng.randint(2, 3)
        e = sample_execution(rng, n, 8, {"X": "validity", "Y": "ws"}, _two_object_payload)
        if len(e.objects) < 2:
            continue
        checked += 1
        local = check_local(e, specs)
        glob = check_interval_linearizable(e, specs, canonical=False)
        agree += bool(local) == bool(glob)
        if local:
            yes += 1
            verified += verify_witness(e, specs, local.witness, local.appended) == []
    ok = agree == checked and verified == yes and checked >= 500
    record(4, ok, f"{checked} two-object executions ({yes} yes), local = global on {agree}, "
                  f"{verified}/{yes} composed witnesses re-verify")
    assert ok


def test_criterion_05_nonblocking(validity_corpus):
    spec = validity(2)
    tried = blocked = 0
    for e in validity_corpus:
        pend = e.pending_calls()
        if not pend or not check_interval_linearizable(e, spec, canonical=False):
            continue
        for call in pend:
            tried += 1
            try:
                ev = nonblocking_extension(e, spec, call)
            except NoResponseFound:
                blocked += 1
                continue
            if not check_interval_linearizable(extend(e, [ev]), spec, canonical=False):
                blocked += 1
    ok = blocked == 0 and tried > 0
    record(5, ok, f"{tried} pending calls in linearizable n=2 validity executions, {blocked} blocked")
    assert ok


def _theorem4(task):
    spec = task_to_object(task)
    inputs = {p: sorted({v.value for v in task.inputs.vertices if v.process == p}) for p in (0, 1)}
    outputs = {p: sorted({v.value for v in task.outputs.vertices if v.process == p}, key=str)
               for p in (0, 1)}
    corpus = all_executions([0, 1], 1, lambda p, k: inputs[p], lambda p: outputs[p], 4,
                            op=task.operation)
    wrong = sum(bool(satisfies_task(e, task)) != bool(check_interval_linearizable(e, spec, canonical=False))
                for e in corpus)
    return len(corpus), wrong


def test_criterion_06_task_to_object():
    results = {t.name: _theorem4(t) for t in (validity_task(2), immediate_snapshot_task(2))}
    ok = all(wrong == 0 for _, wrong in results.values())
    detail = ", ".join(f"{name}: {total} executions, {wrong} disagreements"
                       for name, (total, wrong) in results.items())
    record(6, ok, detail)
    assert ok


def test_criterion_07_object_refined_task_round_trip():
    spec = write_snapshot(2)
    task = object_to_refined_task(spec, bound=4)
    back = refined_task_to_object(task)
    corpus = all_executions([0, 1], 1, lambda p, k: [p + 1],
                            lambda p: [frozenset({p + 1}), frozenset({1, 2})], 4, op="ws")
    wrong_task = wrong_object = 0
    for e in corpus:
        expected = bool(check_interval_linearizable(e, spec, canonical=False))
        wrong_task += bool(satisfies_refined_task(e, task)) != expected
        wrong_object += bool(check_interval_linearizable(e, back, canonical=False)) != expected
    ok = wrong_task == 0 and wrong_object == 0 and not task.notes["truncated"]
    record(7, ok, f"{len(corpus)} n=2 executions (<= 4 events): refined task {wrong_task}, "
                  f"object from refined task {wrong_object} disagreements")
    assert ok


def test_criterion_08_queue_separation():
    q = restricted_queue()
    naive = naive_task_from_object(q)
    lin = [bool(check_linearizable(load(f"queue_alpha{i}.hist"), q)) for i in (1, 2, 3)]
    sat = [bool(satisfies_task(load(f"queue_alpha{i}.hist"), naive)) for i in (1, 2, 3)]
    ok = lin == [True, True, False] and sat == [True, True, True]
    record(8, ok, f"linearizable alpha1..3 = {lin}, naive task satisfied = {sat}")
    assert ok


def _snapshot_payload(rng, inv, seen):
    invoked = {ev.payload for ev in seen[inv.obj]}
    if rng.random() < 0.7:
        return frozenset(invoked)
    return frozenset({inv.payload} | {v for v in invoked if rng.random() < 0.5})


def test_criterion_09_face_sequences():
    rng = random.Random(9)
    total = with_task = failures = 0
    tasks = {n: write_snapshot_task(n) for n in range(1, 5)}
    for _ in range(10_000):
        n = rng.randint(1, 4)
        e = sample_execution(rng, n, 12, {"X": "ws"}, _snapshot_payload)
        total += 1
        task = tasks[n]
        if satisfies_task(e, task):
            with_task += 1
        if claim2_violations(e, sequences(e), task):
            failures += 1
    ok = failures == 0 and total >= 10_000 and with_task > 0
    record(9, ok, f"{total} random executions, {failures} with violations, "
                  f"carrier item checked on {with_task}")
    assert ok


def test_criterion_10_future_predicting_validity_execution():
    e = load("validity_future.hist")
    verdict = satisfies_task(e, validity_task(3))
    r_inv = next(i for i, ev in enumerate(e, start=1) if ev.process == 2 and ev.is_invocation)
    lin = check_interval_linearizable(e, task_to_object(validity_task(3)))
    ok = (not verdict) and verdict.violating_prefix is not None and verdict.violating_prefix < r_inv \
        and not lin
    record(10, ok, f"task violated at prefix {verdict.violating_prefix} (third invocation is event "
                   f"{r_inv}), task object verdict {'yes' if lin else 'no'}")
    assert ok
