"""Brute-force reference answers for liveness and aliasing.

Both oracles work on the statement-level graph of a :class:`~rosa.cfg.Cfg`
and explore every path (loops included) by searching the finite space of
(program point, abstract state) pairs, so they give the exact
meet-over-all-paths solution the dataflow analyses must reproduce.
"""

from __future__ import annotations

from collections import deque
from typing import Dict, FrozenSet, Tuple

from .cfg import COPY, Cfg


def live_out_oracle(cfg: Cfg) -> Dict[int, FrozenSet[str]]:
    """For each statement, the variables read on some path before being redefined."""
    g = cfg.stmt_succs()
    stmts = {s.sid: s for s in cfg.statements()}
    variables = cfg.variables()
    result: Dict[int, FrozenSet[str]] = {}
    for sid in stmts:
        live = set()
        for v in variables:
            if _reads_before_def(g, stmts, sid, v, cfg.free_vars):
                live.add(v)
        result[sid] = frozenset(live)
    return result


def _reads_before_def(g, stmts, start, v, exit_live) -> bool:
    seen = set()
    work = deque(g[start])
    while work:
        n = work.popleft()
        if n in seen:
            continue
        seen.add(n)
        if n == "exit":
            if v in exit_live:
                return True
            continue
        s = stmts[n]
        if v in s.uses:
            return True
        if v in s.defs:
            continue
        work.extend(g[n])
    return False


def _canon(locs: Dict[str, int]) -> Tuple:
    groups: Dict[int, list] = {}
    for v, l in locs.items():
        groups.setdefault(l, []).append(v)
    return tuple(sorted(tuple(sorted(m)) for m in groups.values() if len(m) >= 2))


def alias_pairs_oracle(cfg: Cfg) -> Dict[int, FrozenSet[Tuple[str, str]]]:
    """Pairs of variables that share a location right after each statement on some path.

    Copy assignments copy the source's location; every other definition gives
    the target a fresh location.
    """
    g = cfg.stmt_succs()
    stmts = {s.sid: s for s in cfg.statements()}
    result: Dict[int, set] = {sid: set() for sid in stmts}
    start_state: Tuple = ()
    seen = set()
    work = deque((n, start_state) for n in g["entry"])
    while work:
        node, state = work.popleft()
        if node == "exit" or (node, state) in seen:
            continue
        seen.add((node, state))
        s = stmts[node]
        new = _step(s, state)
        for grp in new:
            for i, a in enumerate(grp):
                for b in grp[i + 1:]:
                    result[node].add((a, b))
        for n in g[node]:
            work.append((n, new))
    return {k: frozenset(v) for k, v in result.items()}


def _step(s, state: Tuple) -> Tuple:
    if not s.defs:
        return state
    x = s.target
    locs: Dict[str, int] = {}
    for i, grp in enumerate(state):
        for v in grp:
            locs[v] = i
    fresh = len(state) + 1
    if s.kind == COPY:
        y = s.copy_source
        if x == y:
            return state
        if y not in locs:
            locs[y] = fresh
            fresh += 1
        locs[x] = locs[y]
    else:
        locs.pop(x, None)
    return _canon(locs)
