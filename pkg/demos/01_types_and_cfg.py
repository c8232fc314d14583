"""Walk through the front half of the toolkit on the euclidean program.

Parse, build per-function CFGs, then infer a type for every variable.
"""

from rosa import corpus
from rosa import rtypes as T
from rosa.cfg import build_cfg, cfg_stats, dump_cfg

prog = corpus.load("euclidean")
cfgs = build_cfg(prog)

print("== functions and their graphs")
for scope, g in cfgs.items():
    st = cfg_stats(g)
    print(f"{scope:8s} nodes={st['nodes']:3d} loops={st['loops']} depth={st['max_loop_depth']}")

print("\n== the dist graph, block by block")
print(dump_cfg(cfgs["dist"]))

print("== inferred types")
for name, t in sorted(T.infer(prog).table().items()):
    print(f"  {name:6s} {t}")
