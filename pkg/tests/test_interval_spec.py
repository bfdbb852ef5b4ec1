import pytest
from hypothesis import given, settings, strategies as st

from intlin.errors import BudgetExceeded, IllegalInput, NotWellFormed
from intlin.histories import invoke, respond
from intlin.interval_spec import (ConcurrencyClass, Flavor, IntervalExecution, IntervalSpec,
                                  accepts, explore, invoking, is_total, project_interval,
                                  responding, step)
from intlin.objects import (ValidityState, WriteSnapshotState, restricted_queue, validity,
                            write_snapshot, ws_sequential)

p1, q2, r3 = invoke(0, "X", "validity", 1), invoke(1, "X", "validity", 2), invoke(2, "X", "validity", 3)


def test_classes_reject_mixed_kinds_and_repeated_processes():
    with pytest.raises(NotWellFormed):
        ConcurrencyClass(invoking(p1).kind, [p1, respond(q2, 1)])
    with pytest.raises(NotWellFormed):
        invoking(p1, invoke(0, "X", "validity", 2))
    with pytest.raises(NotWellFormed):
        invoking()


def test_interval_execution_shape():
    with pytest.raises(NotWellFormed):
        IntervalExecution([invoking(p1)])
    with pytest.raises(NotWellFormed):
        IntervalExecution([responding(respond(p1, 1)), invoking(p1)])
    with pytest.raises(NotWellFormed):
        IntervalExecution([invoking(p1), responding(respond(q2, 1))])
    IntervalExecution([invoking(p1, q2), responding(respond(p1, 2)),
                       invoking(r3), responding(respond(q2, 3), respond(r3, 1))])


def test_step_solo_validity_returns_own_value():
    out = step(validity(3), ValidityState(), invoking(p1))
    assert (responding(respond(p1, 1)), ValidityState(frozenset({1}), frozenset())) in out
    assert all(c.by_process()[0].payload == 1 for c, _ in out)


def test_step_two_invokers_one_answers_with_the_other_value():
    out = step(validity(3), ValidityState(), invoking(p1, q2))
    assert (responding(respond(p1, 2)), ValidityState(frozenset({1, 2}), frozenset({q2}))) in out


def test_step_write_snapshot_any_subset_of_pending_answers_with_union():
    q = WriteSnapshotState(frozenset({(0, 1), (1, 2)}), frozenset({invoke(1, "X", "ws", 2)}))
    r = invoke(2, "X", "ws", 3)
    out = step(write_snapshot(3), q, invoking(r))
    answered = {c.processes for c, _ in out}
    assert answered == {frozenset({1}), frozenset({2}), frozenset({1, 2})}
    assert all(ev.payload == frozenset({1, 2, 3}) for c, _ in out for ev in c.events)


def test_step_rejects_invoker_already_pending():
    q = ValidityState(frozenset({1}), frozenset({p1}))
    with pytest.raises(IllegalInput):
        step(validity(3), q, invoking(invoke(0, "X", "validity", 1)))


def test_accepts_the_validity_example():
    h = IntervalExecution([invoking(p1, q2), responding(respond(p1, 2)),
                           invoking(r3), responding(respond(q2, 3), respond(r3, 1))])
    run = accepts(validity(3), h)
    assert run and len(run.states) == 3


def test_accepts_empty_and_rejects_unproposed_value():
    assert accepts(validity(3), IntervalExecution())
    h = IntervalExecution([invoking(p1), responding(respond(p1, 9))])
    assert not accepts(validity(3), h)


def test_project_interval_splits_mixed_classes():
    a, b = invoke(0, "X", "op", 1), invoke(1, "Y", "op", 2)
    h = IntervalExecution([invoking(a, b), responding(respond(a, 1)), invoking(invoke(2, "X", "op", 3)),
                           responding(respond(b, 2), respond(invoke(2, "X", "op", 3), 3))])
    hx, hy = project_interval(h, "X"), project_interval(h, "Y")
    assert len(hx) == 4 and len(hy) == 2
    IntervalExecution(hx.classes)
    IntervalExecution(hy.classes)
    assert project_interval(hx, "X") == hx


def test_totality():
    assert is_total(validity(2))
    assert is_total(restricted_queue())
    assert is_total(write_snapshot(2))

    def delta(q, inv):
        return iter(())

    def candidates(q):
        yield invoke(0, "X", "op", 1)

    broken = IntervalSpec("mute", 1, frozenset({"op"}), (ValidityState(),), delta, candidates)
    assert not is_total(broken)


def test_explore_budget():
    with pytest.raises(BudgetExceeded):
        explore(validity(3), bound=5)


def test_flavor_rules_are_audited():
    def delta(q, inv):
        ev = next(iter(inv))
        yield frozenset([respond(ev, 1)]), ValidityState()

    cheat = IntervalSpec("cheat", 2, frozenset({"validity"}), (ValidityState(),), delta,
                         flavor=Flavor.SET_SEQUENTIAL)
    with pytest.raises(AssertionError):
        step(cheat, ValidityState(), invoking(p1, q2))


def test_response_determinism_is_audited():
    def delta(q, inv):
        ev = next(iter(inv))
        yield frozenset([respond(ev, 1)]), ValidityState()
        yield frozenset([respond(ev, 1)]), ValidityState(frozenset({5}))

    twin = IntervalSpec("twin", 1, frozenset({"validity"}), (ValidityState(),), delta)
    with pytest.raises(AssertionError):
        step(twin, ValidityState(), invoking(p1))


def _random_validity_runs(draw):
    spec = validity(3)
    q = spec.initial_states[0]
    classes = []
    for _ in range(draw(st.integers(0, 3))):
        busy = {ev.process for ev in q.pend}
        free = [p for p in range(3) if p not in busy and p not in {e.process for c in classes for e in c.events if c.is_invoking}]
        if not free:
            break
        chosen = draw(st.lists(st.sampled_from(free), min_size=1, unique=True))
        inv = invoking(*[invoke(p, "X", "validity", p + 1) for p in chosen])
        options = sorted(step(spec, q, inv), key=lambda o: str(o[0]))
        r, q = draw(st.sampled_from(options))
        classes += [inv, r]
    return IntervalExecution(classes)


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_accepted_runs_have_accepted_prefixes(data):
    h = data.draw(st.composite(_random_validity_runs)())
    spec = validity(3)
    assert accepts(spec, h)
    for k in range(0, len(h), 2):
        assert accepts(spec, IntervalExecution(h.classes[:k]))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_accepted_runs_only_return_proposed_values(data):
    h = data.draw(st.composite(_random_validity_runs)())
    proposed = set()
    for c in h:
        if c.is_invoking:
            proposed |= {ev.payload for ev in c.events}
        else:
            assert {ev.payload for ev in c.events} <= proposed


def test_sequential_runs_have_singleton_adjacent_classes():
    spec = ws_sequential(3)
    a, b = invoke(0, "X", "ws", 1), invoke(1, "X", "ws", 2)
    h = IntervalExecution([invoking(a), responding(respond(a, frozenset({1, 2}))),
                           invoking(b), responding(respond(b, frozenset({1, 2})))])
    assert accepts(spec, h)
    for inv_c, res_c in h.pairs():
        assert len(inv_c) == len(res_c) == 1 and inv_c.processes == res_c.processes
    assert step(spec, spec.initial_states[0], invoking(a, b)) == set()
