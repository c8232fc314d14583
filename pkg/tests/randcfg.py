"""Seeded generator of small arbitrary CFGs (not just structured ones)."""

from __future__ import annotations

import random

from rosa.cfg import BasicBlock, Cfg, classify
from rosa.frontend import ast as A

VARS = ("a", "b", "c", "d", "e")


def _stmt(rng: random.Random):
    x, y, z = (rng.choice(VARS) for _ in range(3))
    r = rng.random()
    if r < 0.35:
        node = A.assign(A.sym(x), A.sym(y))
    elif r < 0.6:
        node = A.assign(A.sym(x), A.call("+", A.sym(y), A.sym(z)))
    elif r < 0.7:
        node = A.assign(A.sym(x), A.num(1.0))
    elif r < 0.85:
        node = A.assign(A.SNode(A.INDEX, None, [A.sym(x), A.num(1.0)]), A.sym(y))
    else:
        node = A.call("print", A.sym(y))
    return classify(node)


def random_cfg(seed: int, max_blocks: int = 12) -> Cfg:
    rng = random.Random(seed)
    n = rng.randint(3, max_blocks)
    entry, exit_ = 0, 1
    middle = list(range(2, n))
    blocks = {b: BasicBlock(b) for b in range(n)}
    for b in middle:
        blocks[b].stmts = [_stmt(rng) for _ in range(rng.randint(0, 3))]
    edges = set()
    if middle:
        edges.add((entry, middle[0]))
        for i, b in enumerate(middle):
            nxt = middle[i + 1] if i + 1 < len(middle) else exit_
            edges.add((b, nxt))
            for _ in range(rng.randint(0, 1)):
                edges.add((b, rng.choice(middle + [exit_])))
    else:
        edges.add((entry, exit_))
    for src, dst in sorted(edges):
        blocks[src].succs.append(dst)
        blocks[dst].preds.append(src)
    free = frozenset(v for v in VARS if rng.random() < 0.2)
    return Cfg(f"rand{seed}", [blocks[b] for b in range(n)], entry, exit_, {}, [], free)
