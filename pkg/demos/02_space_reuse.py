"""Copy-on-write and space-reuse annotations, measured in bytes.

simple_arith computes x + y, then reuses the result; with annotations the
interpreter may overwrite operands that are dead after the statement.
"""

from rosa import corpus
from rosa.interp import run_program
from rosa.optimizer import space_reuse_annotations

for name in ("cow", "simple_arith"):
    prog = corpus.load(name)
    ann = space_reuse_annotations(prog)
    plain, reused = run_program(prog), run_program(prog, ann)
    print(f"== {name}")
    for sid, a in sorted(ann.items()):
        print(f"  stmt {sid}: dead after -> {sorted(a.dead_after)}")
    for key in ("peak_bytes", "steady_bytes", "copies", "in_place_reuses"):
        print(f"  {key:16s} {plain.metrics[key]:>10} -> {reused.metrics[key]:>10}")
    assert plain.output == reused.output
