"""Emit C for binsearch, build it, and compare with the interpreter.

Needs a C compiler (gcc or cc, or ROSA_CC).
"""

import tempfile

from rosa import corpus
from rosa.codegen import build_and_run, emit
from rosa.interp import run_program

unit = emit(corpus.load("binsearch", full_scale=True), name="binsearch")
print("\n".join(unit.main.splitlines()[:30]))
print("...")

ov = corpus.default_overrides("binsearch")
with tempfile.TemporaryDirectory() as d:
    native = build_and_run(unit, 7, ov, workdir=d)
ref = run_program(corpus.load("binsearch"), seed=7)
print(f"compiled stdout == interpreted stdout: {native.stdout == ref.output}")
print(f"timers: native {native.timings}  interpreted {ref.timings}")
