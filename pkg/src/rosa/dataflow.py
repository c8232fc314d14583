"""Worklist fixed-point solver and the concrete dataflow analyses.

Facts are immutable frozensets:

* live variables: a set of names;
* alias sets: a family (frozenset) of name sets, each of size >= 2;
* reaching definitions: a set of ``(name, stmt_id)`` pairs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from .cfg import COPY, Cfg, Stmt
from .frontend import ast as A

FORWARD, BACKWARD = "forward", "backward"

# Builtins without side effects or hidden state (safe to hoist or reorder).
PURE_BUILTINS = frozenset({
    "+", "-", "*", "/", "^", "%%", "%/%", "==", "!=", "<", ">", "<=", ">=", "!", "&", "|",
    "&&", "||", ":", "(", "c", "numeric", "vector", "length", "nrow", "ncol", "matrix", "rep",
    "sqrt", "floor", "sum", "mean", "abs", "paste", "unique", "sort", "seq_along", "as.integer",
    "as.double", "as.numeric", "as.logical", "as.character", "min", "max", "list", "na.omit",
    "rev", "exp", "log", "integer", "logical", "character", "is.na", "seq_len", "ceiling",
})


class NonTermination(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalysisSpec:
    name: str
    direction: str
    transfer: Callable[[Stmt, FrozenSet], FrozenSet]
    meet: Callable[[Iterable[FrozenSet]], FrozenSet]
    init: FrozenSet = frozenset()
    boundary: FrozenSet = frozenset()
    universe_size: int = 0
    # Optional gen/kill view for set-valued analyses.
    gen: Optional[Callable[[List[Stmt]], FrozenSet]] = None
    kill: Optional[Callable[[List[Stmt]], FrozenSet]] = None
    labels: Tuple[str, str] = ("in", "out")

    def block_transfer(self, stmts: List[Stmt], fact: FrozenSet) -> FrozenSet:
        seq = stmts if self.direction == FORWARD else reversed(stmts)
        for s in seq:
            fact = self.transfer(s, fact)
        return fact


@dataclass
class FactTable:
    analysis: str
    direction: str
    inn: Dict[int, FrozenSet]
    out: Dict[int, FrozenSet]
    iterations: int
    labels: Tuple[str, str] = ("in", "out")
    _spec: Optional[AnalysisSpec] = field(default=None, repr=False, compare=False)
    _cfg: Optional[Cfg] = field(default=None, repr=False, compare=False)
    _per_stmt: Optional[Dict[int, Tuple[FrozenSet, FrozenSet]]] = field(default=None, repr=False,
                                                                         compare=False)

    def same_facts(self, other: "FactTable") -> bool:
        return self.inn == other.inn and self.out == other.out

    def stmt_facts(self) -> Dict[int, Tuple[FrozenSet, FrozenSet]]:
        """Facts immediately before and after each statement, in execution order."""
        if self._per_stmt is None:
            res: Dict[int, Tuple[FrozenSet, FrozenSet]] = {}
            spec, cfg = self._spec, self._cfg
            for b in cfg.blocks:
                if spec.direction == FORWARD:
                    f = self.inn[b.id]
                    for s in b.stmts:
                        g = spec.transfer(s, f)
                        res[s.sid] = (f, g)
                        f = g
                else:
                    f = self.out[b.id]
                    for s in reversed(b.stmts):
                        g = spec.transfer(s, f)
                        res[s.sid] = (g, f)
                        f = g
            self._per_stmt = res
        return self._per_stmt

    def before(self, sid: int) -> FrozenSet:
        return self.stmt_facts()[sid][0]

    def after(self, sid: int) -> FrozenSet:
        return self.stmt_facts()[sid][1]


def solve(cfg: Cfg, spec: AnalysisSpec, order: Optional[List[int]] = None,
          chaotic: bool = False) -> FactTable:
    """Iterate ``spec`` over ``cfg`` to its least fixed point.

    ``order`` overrides the worklist seeding order; ``chaotic`` switches to
    round-robin sweeps over that order until nothing changes.
    """
    fwd = spec.direction == FORWARD
    ids = cfg.block_ids
    if order is None:
        rpo = cfg.rpo()
        order = rpo if fwd else rpo[::-1]
    inn = {b: spec.init for b in ids}
    out = {b: spec.init for b in ids}
    start = cfg.entry if fwd else cfg.exit
    if fwd:
        inn[start] = spec.boundary
    else:
        out[start] = spec.boundary
    flow_in = cfg.pred if fwd else cfg.succ
    flow_out = cfg.succ if fwd else cfg.pred
    limit = len(ids) * (spec.universe_size + 1) + 1
    limit = max(limit, 4 * len(ids) + 1)
    steps = 0

    def visit(b) -> bool:
        if b != start:
            merged = spec.meet(((out if fwd else inn)[p] for p in flow_in(b)))
            if fwd:
                inn[b] = merged
            else:
                out[b] = merged
        src = inn[b] if fwd else out[b]
        res = spec.block_transfer(cfg.block(b).stmts, src)
        old = out[b] if fwd else inn[b]
        if res != old:
            if fwd:
                out[b] = res
            else:
                inn[b] = res
            return True
        return False

    if chaotic:
        changed = True
        first = True
        while changed or first:
            changed = False
            for b in order:
                steps += 1
                if steps > limit * len(ids):
                    raise NonTermination(spec.name)
                changed |= visit(b)
            first = False
    else:
        work = list(order)
        queued = set(work)
        pos = {b: i for i, b in enumerate(order)}
        while work:
            b = work.pop(0)
            queued.discard(b)
            steps += 1
            if steps > limit:
                raise NonTermination(f"{spec.name}: exceeded {limit} block visits")
            if visit(b):
                for s in flow_out(b):
                    if s not in queued:
                        queued.add(s)
                        work.append(s)
                work.sort(key=lambda x: pos.get(x, 0))
    return FactTable(spec.name, spec.direction, inn, out, steps, spec.labels, spec, cfg)


def residual(cfg: Cfg, table: FactTable) -> int:
    """Number of dataflow equations violated by ``table`` (0 at a fixed point)."""
    spec = table._spec
    fwd = spec.direction == FORWARD
    bad = 0
    start = cfg.entry if fwd else cfg.exit
    for b in cfg.block_ids:
        flow_in = cfg.pred(b) if fwd else cfg.succ(b)
        if b == start:
            expect_in = spec.boundary
        else:
            expect_in = spec.meet((table.out if fwd else table.inn)[p] for p in flow_in)
        got_in = table.inn[b] if fwd else table.out[b]
        got_out = table.out[b] if fwd else table.inn[b]
        if expect_in != got_in:
            bad += 1
        if spec.block_transfer(cfg.block(b).stmts, got_in) != got_out:
            bad += 1
    return bad


def random_orders(cfg: Cfg, n: int, seed: int = 0) -> List[List[int]]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        ids = list(cfg.block_ids)
        rng.shuffle(ids)
        out.append(ids)
    return out


def _union(facts) -> FrozenSet:
    acc = frozenset()
    for f in facts:
        acc = acc | f
    return acc


# -- live variables ---------------------------------------------------------------

def _live_transfer(s: Stmt, out: FrozenSet) -> FrozenSet:
    return s.uses | (out - s.defs)


def live_gen(stmts: List[Stmt]) -> FrozenSet:
    """Variables read in the block before any redefinition."""
    gen, killed = set(), set()
    for s in stmts:
        gen |= s.uses - killed
        killed |= s.defs
    return frozenset(gen)


def live_kill(stmts: List[Stmt]) -> FrozenSet:
    return frozenset(v for s in stmts for v in s.defs)


def live_spec(cfg: Cfg) -> AnalysisSpec:
    return AnalysisSpec("live", BACKWARD, _live_transfer, _union, frozenset(),
                        frozenset(cfg.free_vars), len(cfg.variables()), live_gen, live_kill,
                        ("live_in", "live_out"))


def live_variables(cfg: Cfg, **kw) -> FactTable:
    return solve(cfg, live_spec(cfg), **kw)


# -- alias sets ----------------------------------------------------------------------

def alias_transfer(s: Stmt, fam: FrozenSet) -> FrozenSet:
    if not s.defs:
        return fam
    x = s.target
    if s.kind == COPY:
        y = s.copy_source
        if x == y:
            return fam
        out = set()
        for S in fam:
            if y in S:
                out.add(S | {x})
            else:
                T = S - {x}
                if len(T) >= 2:
                    out.add(T)
        out.add(frozenset({x, y}))
        return frozenset(out)
    out = set()
    for S in fam:
        T = S - {x}
        if len(T) >= 2:
            out.add(T)
    return frozenset(out)


def alias_spec(cfg: Cfg) -> AnalysisSpec:
    n = len(cfg.variables())
    return AnalysisSpec("alias", FORWARD, alias_transfer, _union, frozenset(), frozenset(),
                        n * n, None, None, ("alias_in", "alias_out"))


def alias_sets(cfg: Cfg, **kw) -> FactTable:
    return solve(cfg, alias_spec(cfg), **kw)


def alias_pairs(fam: FrozenSet) -> FrozenSet:
    """Unordered pairs that share some alias set."""
    out = set()
    for S in fam:
        xs = sorted(S)
        for i, a in enumerate(xs):
            for b in xs[i + 1:]:
                out.add((a, b))
    return frozenset(out)


def canonical_family(fam: FrozenSet) -> List[List[str]]:
    """Family with sets contained in larger sets removed, sorted for display."""
    keep = [S for S in fam if not any(S < T for T in fam)]
    return sorted(sorted(S) for S in keep)


def aliases_of(fam: FrozenSet, x: str) -> FrozenSet:
    out = set()
    for S in fam:
        if x in S:
            out |= S
    out.discard(x)
    return frozenset(out)


# -- reaching definitions ----------------------------------------------------------

def _reach_transfer(s: Stmt, fact: FrozenSet) -> FrozenSet:
    if not s.defs:
        return fact
    kept = frozenset(d for d in fact if d[0] not in s.defs)
    return kept | frozenset((v, s.sid) for v in s.defs)


def reach_gen(stmts: List[Stmt]) -> FrozenSet:
    f = frozenset()
    for s in stmts:
        f = _reach_transfer(s, f)
    return f


def reach_kill(stmts: List[Stmt], all_defs: FrozenSet) -> FrozenSet:
    names = {v for s in stmts for v in s.defs}
    return frozenset(d for d in all_defs if d[0] in names)


def reach_spec(cfg: Cfg) -> AnalysisSpec:
    all_defs = frozenset((v, s.sid) for s in cfg.statements() for v in s.defs)
    return AnalysisSpec("reach", FORWARD, _reach_transfer, _union, frozenset(), frozenset(),
                        len(all_defs), reach_gen, lambda st: reach_kill(st, all_defs),
                        ("reach_in", "reach_out"))


def reaching_definitions(cfg: Cfg, **kw) -> FactTable:
    return solve(cfg, reach_spec(cfg), **kw)


# -- loop invariants ---------------------------------------------------------------

def is_pure_expr(node: A.SNode, user_functions=()) -> bool:
    for n in node.walk():
        if n.kind == A.CALL:
            name = n.call_name()
            if name is None or name not in PURE_BUILTINS or name in user_functions:
                return False
    return True


def loop_invariants(cfg: Cfg, reach: FactTable, user_functions=()) -> Dict[int, List[int]]:
    """Invariant statement ids per loop, in program order."""
    facts = reach.stmt_facts()
    blk = cfg.stmt_block()
    result: Dict[int, List[int]] = {}
    for lid, lp in cfg.loops.items():
        in_loop = [s for b in cfg.blocks if b.id in lp.body for s in b.stmts]
        loop_sids = {s.sid for s in in_loop}
        cands = [s for s in in_loop
                 if s.role is None and s.kind in ("assign", COPY)
                 and is_pure_expr(s.ast.children[1], user_functions)]
        inv: set = set()
        changed = True
        while changed:
            changed = False
            for s in cands:
                if s.sid in inv:
                    continue
                ok = True
                for u in s.uses:
                    defs = [d for d in facts[s.sid][0] if d[0] == u]
                    inside = [d for d in defs if d[1] in loop_sids]
                    if not inside:
                        continue
                    if len(defs) == 1 and inside[0][1] in inv:
                        continue
                    ok = False
                    break
                if ok:
                    inv.add(s.sid)
                    changed = True
        order = {s.sid: i for i, s in enumerate(cfg.statements())}
        result[lid] = sorted(inv, key=lambda x: (blk[x], order[x]))
    return result


# -- reports ---------------------------------------------------------------------

def _render(table: FactTable, fact) -> list:
    if table.analysis == "alias":
        return canonical_family(fact)
    if table.analysis == "reach":
        return [f"{v}@s{sid}" for v, sid in sorted(fact)]
    return sorted(fact)


def report(table: FactTable) -> dict:
    lin, lout = table.labels
    return {
        "analysis": table.analysis,
        "direction": table.direction,
        "iterations": table.iterations,
        "blocks": {str(b): {lin: _render(table, table.inn[b]), lout: _render(table, table.out[b])}
                   for b in sorted(table.inn)},
    }


def report_text(table: FactTable) -> str:
    lin, lout = table.labels
    lines = [f"{table.analysis} ({table.direction}, {table.iterations} block visits)"]
    for b in sorted(table.inn):
        lines.append(f"  B{b}: {lin}={_fmt(_render(table, table.inn[b]))} "
                     f"{lout}={_fmt(_render(table, table.out[b]))}")
    return "\n".join(lines) + "\n"


def _fmt(items) -> str:
    parts = []
    for x in items:
        parts.append("{" + ", ".join(x) + "}" if isinstance(x, list) else str(x))
    return "{" + ", ".join(parts) + "}"


def analyze_cfg(cfg: Cfg, user_functions=()) -> dict:
    live = live_variables(cfg)
    alias = alias_sets(cfg)
    reach = reaching_definitions(cfg)
    inv = loop_invariants(cfg, reach, user_functions)
    return {"live": live, "alias": alias, "reach": reach, "invariants": inv}
