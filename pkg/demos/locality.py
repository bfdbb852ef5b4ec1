"""Check a two-object history one object at a time and merge the witnesses."""

from importlib import resources

from intlin import check_local, load_execution, validity, write_snapshot
from intlin.cli import witness_table

e = load_execution(resources.files("intlin") / "data" / "two_objects.hist")
specs = {"X": validity(2), "Y": write_snapshot(2)}
v = check_local(e, specs)
print(e)
for obj, part in v.per_object.items():
    print(f"object {obj}:")
    print(witness_table(part.witness))
print("merged:")
print(witness_table(v.witness))
