import subprocess
import sys
from importlib import resources

import pytest

from intlin.cli import DEMOS, golden, main, run_demo, witness_table
from intlin.checker import check_interval_linearizable
from intlin.errors import UnknownDemo
from intlin.histories import format_execution, load_execution, parse_execution
from intlin.objects import write_snapshot
from intlin.tasks import format_task, load_task

DATA = resources.files("intlin") / "data"


def path(name):
    return str(DATA / name)


def test_check_fig4_with_witness(capsys):
    code = main(["check", "--condition", "intlin", "--object", "write_snapshot:n=3", "--witness",
                 path("fig4.hist")])
    out = capsys.readouterr().out
    assert code == 0
    assert "intlin yes" in out
    assert "init X.ws(1)" in out and "term {1,2,3}" in out


def test_check_fig4_set_linearizable_is_no(capsys):
    assert main(["check", "--condition", "setlin", "--object", "write_snapshot:n=3",
                 path("fig4.hist")]) == 1
    assert "setlin no" in capsys.readouterr().out


def test_check_per_object_specs_and_local(capsys):
    args = ["check", "--condition", "local", "--object", "X=validity:n=2",
            "--object", "Y=write_snapshot:n=2", "--witness", path("two_objects.hist")]
    assert main(args) == 0
    assert "local yes" in capsys.readouterr().out


def test_check_several_histories_with_threads(capsys):
    files = [path("fig3.hist"), path("fig4.hist")] * 3
    assert main(["check", "--object", "write_snapshot:n=3", "--jobs", "3", *files]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in lines] == files


def test_check_lists_witnesses(capsys):
    assert main(["check", "--object", "write_snapshot:n=3", "--all", "3", path("fig4.hist")]) == 0
    assert "witness(es)" in capsys.readouterr().out


def test_check_errors(capsys):
    assert main(["check", "--object", "exchanger:n=2", path("fig4.hist")]) == 2
    assert main(["check", "--object", "validity:n=2,k=1", path("fig4.hist")]) == 2
    assert main(["check", "--object", "Y=validity:n=2", path("fig4.hist")]) == 2
    assert main(["check", "--object", "validity:n=3", "/nonexistent.hist"]) == 2
    assert main(["check", "--bogus"]) == 2
    assert main([]) == 2
    assert "error" in capsys.readouterr().err


def test_validate(capsys):
    assert main(["validate", "--task", "immediate_snapshot:n=3"]) == 0
    assert main(["validate", "--task-file", path("consensus2.task")]) == 0
    assert "valid" in capsys.readouterr().out
    assert main(["validate"]) == 2


def test_validate_reports_violations(tmp_path, capsys):
    text = (DATA / "consensus2.task").read_text()
    broken = text.replace("{(0,0)} -> {(0,0)}", "{(0,0)} -> {(0,1)}")
    f = tmp_path / "broken.task"
    f.write_text(broken)
    assert main(["validate", "--task-file", str(f)]) == 1
    assert "violation" in capsys.readouterr().out


def test_convert_object_to_task_round_trips(tmp_path, capsys):
    out = tmp_path / "ws2.task"
    assert main(["convert", "object-to-task", "--object", "write_snapshot:n=2", "--out", str(out)]) == 0
    assert "executions checked" in capsys.readouterr().err
    t = load_task(out)
    assert t.refined and format_task(t) == out.read_text()
    assert main(["validate", "--task-file", str(out)]) == 0
    assert main(["convert", "task-to-object", "--task-file", str(out)]) == 0


def test_convert_task_to_object_and_split(capsys):
    assert main(["convert", "task-to-object", "--task", "validity:n=2"]) == 0
    assert main(["convert", "split", "--task", "k_set_agreement:n=2,k=1"]) == 0
    out = capsys.readouterr().out
    assert "task_to_object" in out and "split" in out
    assert main(["convert", "object-to-task"]) == 2


def test_simulate(tmp_path, capsys):
    emit = tmp_path / "h"
    assert main(["simulate", "write-snapshot", "-n", "3", "--seed", "42", "--count", "20",
                 "--emit", str(emit), "--check"]) == 0
    out = capsys.readouterr().out
    assert "interval-linearizable: 20/20" in out
    files = sorted(emit.glob("*.hist"))
    assert len(files) == 20
    e = load_execution(files[0])
    assert check_interval_linearizable(e, write_snapshot(3))


def test_simulate_enumerate(capsys):
    assert main(["simulate", "write-snapshot", "-n", "2", "--enumerate", "--check"]) == 0
    assert "traces: 483" in capsys.readouterr().out


@pytest.mark.parametrize("name", sorted(DEMOS))
def test_demos_match_goldens(name, capsys):
    assert main(["demo", name]) == 0
    assert capsys.readouterr().out == golden(name)


def test_demo_content():
    assert "interval-linearizable: yes" in run_demo("fig4")
    assert "set-linearizable: no" in run_demo("fig4")
    assert "{} -> {1,2} -> {1,2} -> {1,2,3}" in run_demo("fig3")
    lemma = run_demo("lemma1").splitlines()
    assert lemma == ["alpha1: linearizable yes, satisfies naive task yes",
                     "alpha2: linearizable yes, satisfies naive task yes",
                     "alpha3: linearizable no, satisfies naive task yes"]
    assert "(100%)" in run_demo("theorem1")


def test_unknown_demo():
    with pytest.raises(UnknownDemo):
        run_demo("fig9")
    assert main(["demo", "fig9"]) == 2


def test_witness_table_layout():
    e = load_execution(DATA / "validity.hist")
    from intlin.objects import validity
    table = witness_table(check_interval_linearizable(e, validity(3)).witness).splitlines()
    assert table[0].split() == ["I0", "R0", "I1", "R1"]
    assert table[1].split()[0] == "P0"


@pytest.mark.parametrize("name", sorted(p.name for p in DATA.iterdir() if p.name.endswith(".hist")))
def test_shipped_histories_round_trip(name):
    text = (DATA / name).read_text()
    e = parse_execution(text)
    assert parse_execution(format_execution(e)) == e


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "intlin", "validate", "--task", "validity:n=2"],
                          capture_output=True, text=True)
    assert done.returncode == 0 and "valid" in done.stdout
