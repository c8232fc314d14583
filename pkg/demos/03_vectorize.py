"""Loop vectorization: one loop is rewritten, one is refused with a reason."""

from rosa import corpus
from rosa.frontend import deparse
from rosa.interp import run_program
from rosa.optimizer import optimize

prog = corpus.load("simple_vec")
res = optimize(prog, ["vectorize"])
print("== simple_vec after vectorize")
print(deparse(res.program.root))
before, after = run_program(prog), run_program(res.program)
t0, t1 = sum(before.timings.values()), sum(after.timings.values())
print(f"loop time {t0:.3f}s -> {t1:.4f}s ({t0 / t1:.0f}x), same output: {before.output == after.output}")

print("\n== scalar_acc")
for skip in optimize(corpus.load("scalar_acc"), ["vectorize"]).skips:
    print(f"  skipped `{skip.text}`: {skip.reason}")
