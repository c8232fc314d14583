"""Control-flow graphs with one simple statement per node.

Each function and the top level get their own :class:`Cfg`.  Statements are
grouped into maximal basic blocks; the entry and exit blocks are empty.  A
``for`` loop expands into an init statement, a header holding the bound
test, the body, and a latch holding the increment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional

from .frontend import ast as A
from .frontend.normalize import NormalizedProgram
from .frontend.printer import deparse

TOP = "<top>"

ASSIGN, COPY, SUBASSIGN, CALL, BRANCH, HEADER, RETURN, HINT = (
    "assign", "copy-assign", "sub-assign", "call", "branch-condition", "loop-header", "return", "hint")


@dataclass(eq=False)
class Stmt:
    sid: int
    ast: A.SNode
    kind: str
    defs: FrozenSet[str]
    uses: FrozenSet[str]
    text: str
    # AST node id of the source statement (the FOR node for loop plumbing).
    origin: int = 0
    role: Optional[str] = None  # "param" | "init" | "test" | "incr"

    @property
    def copy_source(self) -> Optional[str]:
        if self.kind == COPY:
            return self.ast.children[1].value
        return None

    @property
    def target(self) -> Optional[str]:
        return next(iter(self.defs)) if self.defs else None

    def __repr__(self):
        return f"<s{self.sid} {self.text}>"


@dataclass(eq=False)
class BasicBlock:
    id: int
    stmts: List[Stmt] = field(default_factory=list)
    succs: List[int] = field(default_factory=list)
    preds: List[int] = field(default_factory=list)


@dataclass
class LoopEntry:
    loop_id: int
    header: int
    body: FrozenSet[int]  # block ids, header and latch included
    var: Optional[str]
    range: Optional[A.SNode]
    parent: Optional[int] = None


@dataclass
class Cfg:
    name: str
    blocks: List[BasicBlock]
    entry: int
    exit: int
    loops: Dict[int, LoopEntry]
    params: List[str] = field(default_factory=list)
    free_vars: FrozenSet[str] = frozenset()

    def __post_init__(self):
        self._by_id = {b.id: b for b in self.blocks}

    def block(self, bid: int) -> BasicBlock:
        return self._by_id[bid]

    def succ(self, bid: int) -> List[int]:
        return self._by_id[bid].succs

    def pred(self, bid: int) -> List[int]:
        return self._by_id[bid].preds

    @property
    def block_ids(self) -> List[int]:
        return [b.id for b in self.blocks]

    def statements(self) -> List[Stmt]:
        return [s for b in self.blocks for s in b.stmts]

    def stmt(self, sid: int) -> Stmt:
        for s in self.statements():
            if s.sid == sid:
                return s
        raise KeyError(sid)

    def stmt_block(self) -> Dict[int, int]:
        return {s.sid: b.id for b in self.blocks for s in b.stmts}

    def variables(self) -> FrozenSet[str]:
        out = set(self.params) | set(self.free_vars)
        for s in self.statements():
            out |= s.defs | s.uses
        return frozenset(out)

    def rpo(self) -> List[int]:
        return reverse_post_order(self)

    def loop_of_block(self) -> Dict[int, Optional[int]]:
        """Innermost loop containing each block."""
        inner: Dict[int, Optional[int]] = {b.id: None for b in self.blocks}
        for lid in sorted(self.loops, key=lambda l: len(self.loops[l].body), reverse=True):
            for bid in self.loops[lid].body:
                inner[bid] = lid
        return inner

    def loop_depth(self, loop_id: int) -> int:
        d = 0
        while loop_id is not None:
            d += 1
            loop_id = self.loops[loop_id].parent
        return d

    def stmt_succs(self) -> Dict[object, List[object]]:
        """Statement-level successor map; nodes are stmt ids plus "entry"/"exit"."""
        def head(bid, seen=()):
            b = self._by_id[bid]
            if bid == self.exit:
                return ["exit"]
            if b.stmts:
                return [b.stmts[0].sid]
            out = []
            for s in b.succs:
                if s not in seen:
                    out += head(s, seen + (bid,))
            return out

        g: Dict[object, List[object]] = {}
        g["entry"] = _dedupe(x for s in self.block(self.entry).succs for x in head(s))
        g["exit"] = []
        for b in self.blocks:
            for i, st in enumerate(b.stmts):
                if i + 1 < len(b.stmts):
                    g[st.sid] = [b.stmts[i + 1].sid]
                else:
                    g[st.sid] = _dedupe(x for s in b.succs for x in head(s))
        return g


def _dedupe(items) -> list:
    out = []
    for x in items:
        if x not in out:
            out.append(x)
    return out


def reverse_post_order(cfg: Cfg) -> List[int]:
    seen, post = set(), []

    def dfs(b):
        stack = [(b, iter(cfg.succ(b)))]
        seen.add(b)
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                post.append(node)
                stack.pop()
            elif nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(cfg.succ(nxt))))

    dfs(cfg.entry)
    for b in cfg.block_ids:  # unreachable leftovers, for completeness
        if b not in seen:
            dfs(b)
    return post[::-1]


# -- statement classification ------------------------------------------------------

def _reads(node: A.SNode, fn_free: Dict[str, FrozenSet[str]]) -> FrozenSet[str]:
    out = set(A.symbols_read(node))
    for n in node.walk():
        name = n.call_name()
        if name is not None and name in fn_free:
            out.add(name)
            out |= fn_free[name]
    return frozenset(out)


def classify(node: A.SNode, fn_free: Dict[str, FrozenSet[str]] = None) -> Stmt:
    fn_free = fn_free or {}
    text = deparse(node)
    if node.kind == A.ASSIGN:
        target, rhs = node.children
        name = A.assign_target_name(node)
        if target.kind == A.INDEX:
            uses = _reads(target, fn_free) | _reads(rhs, fn_free) | {name}
            return Stmt(node.id, node, SUBASSIGN, frozenset({name}), frozenset(uses), text, node.id)
        if rhs.kind == A.FUNDEF:
            return Stmt(node.id, node, ASSIGN, frozenset({name}), frozenset(), _first_line(text), node.id)
        kind = COPY if rhs.kind == A.SYM and rhs.value not in ("", "T", "F") and node.value in ("=", "<-", "<<-") else ASSIGN
        return Stmt(node.id, node, kind, frozenset({name}), _reads(rhs, fn_free), text, node.id)
    if A.is_hint(node):
        return Stmt(node.id, node, HINT, frozenset(), frozenset(), deparse_hint(node), node.id)
    kind = RETURN if node.call_name() == "return" else CALL
    return Stmt(node.id, node, kind, frozenset(), _reads(node, fn_free), text, node.id)


def deparse_hint(node: A.SNode) -> str:
    kind = node.children[1].value
    rest = " ".join(str(c.value) for c in node.children[2:])
    return f"#{kind} {rest}".rstrip()


def _first_line(text: str) -> str:
    return text.split("\n", 1)[0].rstrip(" {") + " ..."


# -- builder -----------------------------------------------------------------------

class _Builder:
    def __init__(self, name, params, fn_free):
        self.name = name
        self.params = params
        self.fn_free = fn_free
        self.blocks: Dict[int, BasicBlock] = {}
        self._next = 0
        self.entry = self.new()
        self.exit = self.new()
        self.loops: Dict[int, LoopEntry] = {}
        self.loop_stack: List[tuple] = []  # (loop_id, break target, next target)

    def new(self) -> int:
        b = BasicBlock(self._next)
        self.blocks[b.id] = b
        self._next += 1
        return b.id

    def edge(self, a, b):
        if b not in self.blocks[a].succs:
            self.blocks[a].succs.append(b)

    def emit(self, cur, stmt: Stmt) -> int:
        self.blocks[cur].stmts.append(stmt)
        return cur

    def build(self, stmts) -> Cfg:
        cur = self.new()
        self.edge(self.entry, cur)
        for p in self.params:
            node = A.assign(A.sym(p), A.sym(""))
            self.emit(cur, Stmt(A.fresh_id(), node, ASSIGN, frozenset({p}), frozenset(),
                                f"{p} <- <argument>", 0, "param"))
        cur = self.seq(stmts, cur)
        if cur is not None:
            self.edge(cur, self.exit)
        return self.finish()

    def seq(self, stmts, cur):
        for s in stmts:
            if cur is None:
                break  # unreachable remainder is dropped
            cur = self.stmt(s, cur)
        return cur

    def stmt(self, s: A.SNode, cur):
        k = s.kind
        if k == A.IF:
            cond = Stmt(s.id, s.children[0], BRANCH, frozenset(), _reads(s.children[0], self.fn_free),
                        deparse(s.children[0]), s.id)
            self.emit(cur, cond)
            join = self.new()
            for arm in s.children[1:3]:
                if arm.children:
                    b = self.new()
                    self.edge(cur, b)
                    end = self.seq(arm.children, b)
                    if end is not None:
                        self.edge(end, join)
                else:
                    self.edge(cur, join)
            return join if self.blocks[join].succs or self._has_pred(join) else None
        if k == A.WHILE:
            header = self.new()
            self.edge(cur, header)
            test = Stmt(s.id, s.children[0], HEADER, frozenset(), _reads(s.children[0], self.fn_free),
                        deparse(s.children[0]), s.id, "test")
            self.emit(header, test)
            after = self.new()
            body = self.new()
            self.edge(header, body)
            self.edge(header, after)
            first = self._next
            self.loop_stack.append((s.id, after, header))
            end = self.seq(s.children[1].children, body)
            self.loop_stack.pop()
            if end is not None:
                self.edge(end, header)
            self._record_loop(s, header, {header, body} | self._since(first), None, None)
            return after
        if k == A.FOR:
            return self.for_loop(s, cur)
        if k == A.BREAK or k == A.NEXT:
            if not self.loop_stack:
                return cur
            _, brk, nxt = self.loop_stack[-1]
            self.edge(cur, brk if k == A.BREAK else nxt)
            return None
        st = classify(s, self.fn_free)
        self.emit(cur, st)
        if st.kind == RETURN:
            self.edge(cur, self.exit)
            return None
        return cur

    def for_loop(self, s: A.SNode, cur):
        var = s.value
        rng = s.children[0]
        is_range = rng.call_name() == ":" and len(rng.children) == 3
        if is_range:
            lo, hi = rng.children[1], rng.children[2]
            init_ast = A.assign(A.sym(var), lo.clone(fresh=False))
            test_ast = A.call("<=", A.sym(var), hi.clone(fresh=False))
            init_uses = _reads(lo, self.fn_free) | _reads(hi, self.fn_free)
            test_uses = frozenset({var}) | _reads(hi, self.fn_free)
            incr_uses = frozenset({var})
        else:
            init_ast = A.assign(A.sym(var), A.SNode(A.INDEX, None, [rng.clone(fresh=False), A.num(1)]))
            test_ast = A.call("%in_seq%", A.sym(var), rng.clone(fresh=False))
            init_uses = _reads(rng, self.fn_free)
            test_uses = frozenset({var}) | init_uses
            incr_uses = frozenset({var}) | init_uses
        incr_ast = A.assign(A.sym(var), A.call("+", A.sym(var), A.num(1)))
        init = Stmt(A.fresh_id(), init_ast, ASSIGN, frozenset({var}), frozenset(init_uses),
                    deparse(init_ast), s.id, "init")
        test = Stmt(A.fresh_id(), test_ast, HEADER, frozenset(), frozenset(test_uses),
                    deparse(test_ast) if is_range else f"{var} in {deparse(rng)}", s.id, "test")
        incr = Stmt(A.fresh_id(), incr_ast, ASSIGN, frozenset({var}), frozenset(incr_uses),
                    deparse(incr_ast) if is_range else f"{var} <- next element of {deparse(rng)}",
                    s.id, "incr")
        self.emit(cur, init)
        header = self.new()
        self.edge(cur, header)
        self.emit(header, test)
        after = self.new()
        latch = self.new()
        first = self._next
        body = self.new()
        self.edge(header, body)
        self.edge(header, after)
        self.loop_stack.append((s.id, after, latch))
        end = self.seq(s.children[1].children, body)
        self.loop_stack.pop()
        if end is not None:
            self.edge(end, latch)
        self.emit(latch, incr)
        self.edge(latch, header)
        self._record_loop(s, header, {header, latch, body} | self._since(first), var, rng)
        return after

    def _since(self, first: int) -> set:
        return {bid for bid in self.blocks if bid >= first}

    def _has_pred(self, bid) -> bool:
        return any(bid in b.succs for b in self.blocks.values())

    def _record_loop(self, s, header, body, var, rng):
        self.loops[s.id] = LoopEntry(s.id, header, frozenset(body), var, rng)

    # -- cleanup: drop empty and unreachable blocks, merge straight chains -------
    def finish(self) -> Cfg:
        blocks = self.blocks
        keep = {self.entry, self.exit}
        changed = True
        while changed:
            changed = False
            reach = _reachable(blocks, self.entry)
            for bid in list(blocks):
                if bid not in reach and bid not in keep:
                    self._drop(bid)
                    changed = True
            for bid in list(blocks):
                b = blocks[bid]
                if bid in keep or b.stmts or len(b.succs) != 1 or b.succs[0] == bid:
                    continue
                target = b.succs[0]
                for p in blocks.values():
                    if bid in p.succs:
                        p.succs = _dedupe(target if x == bid else x for x in p.succs)
                self._redirect_loops(bid, target)
                self._drop(bid)
                changed = True
            preds = _preds(blocks)
            for bid in list(blocks):
                b = blocks.get(bid)
                if b is None or bid in keep or len(b.succs) != 1:
                    continue
                nxt = b.succs[0]
                if nxt in keep or nxt == bid or len(preds.get(nxt, ())) != 1:
                    continue
                if b.stmts and b.stmts[-1].kind in (BRANCH, HEADER):
                    continue
                if any(l.header == nxt for l in self.loops.values()):
                    continue
                nb = blocks[nxt]
                b.stmts.extend(nb.stmts)
                b.succs = list(nb.succs)
                self._redirect_loops(nxt, bid)
                self._drop(nxt)
                changed = True
                break
        # nest loops
        ids = list(self.loops)
        for lid in ids:
            lp = self.loops[lid]
            cands = [o for o in ids if o != lid and lp.body < self.loops[o].body]
            if cands:
                lp.parent = min(cands, key=lambda o: len(self.loops[o].body))
        # renumber blocks by reverse post order
        tmp = Cfg(self.name, list(blocks.values()), self.entry, self.exit, {}, self.params)
        order = reverse_post_order(tmp)
        if self.exit not in order:
            order.append(self.exit)
        ren = {old: new for new, old in enumerate(order)}
        out = []
        for old in order:
            b = blocks[old]
            out.append(BasicBlock(ren[old], b.stmts, [ren[s] for s in b.succs]))
        for b in out:
            for s in b.succs:
                out[s].preds.append(b.id)
        loops = {lid: LoopEntry(lid, ren[l.header], frozenset(ren[x] for x in l.body if x in ren),
                                l.var, l.range, l.parent) for lid, l in self.loops.items()}
        return Cfg(self.name, out, ren[self.entry], ren[self.exit], loops, list(self.params))

    def _drop(self, bid):
        del self.blocks[bid]
        for b in self.blocks.values():
            if bid in b.succs:
                b.succs.remove(bid)
        for lid, lp in list(self.loops.items()):
            if bid in lp.body:
                lp.body = lp.body - {bid}

    def _redirect_loops(self, old, new):
        for lp in self.loops.values():
            if lp.header == old:
                lp.header = new


def _reachable(blocks, entry) -> set:
    seen, stack = {entry}, [entry]
    while stack:
        for s in blocks[stack.pop()].succs:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def _preds(blocks) -> dict:
    out: Dict[int, list] = {}
    for b in blocks.values():
        for s in b.succs:
            out.setdefault(s, []).append(b.id)
    return out


# -- public API ------------------------------------------------------------------

def free_variables(program: NormalizedProgram) -> Dict[str, FrozenSet[str]]:
    """Variables each function reads without binding them locally."""
    out: Dict[str, FrozenSet[str]] = {}
    for name, fn in program.functions.items():
        params = set(fn.names[:-1])
        defs, uses = set(), set()
        for n in fn.children[-1].walk():
            if n.kind == A.ASSIGN:
                defs.add(A.assign_target_name(n))
            if n.kind == A.FOR:
                defs.add(n.value)
        uses = A.symbols_read(fn.children[-1])
        out[name] = frozenset(uses - defs - params - set(program.functions))
    return out


def build_cfg(program: NormalizedProgram) -> Dict[str, Cfg]:
    """One CFG per function plus the top level (keyed ``"<top>"``)."""
    free = free_variables(program)
    out: Dict[str, Cfg] = {}
    top = _Builder(TOP, [], free).build(program.statements)
    out[TOP] = top
    for name, fn in program.functions.items():
        b = _Builder(name, list(fn.names[:-1]), free)
        cfg = b.build(fn.children[-1].children)
        cfg.free_vars = free.get(name, frozenset())
        out[name] = cfg
    return out


def build_function_cfg(program: NormalizedProgram, name: str) -> Cfg:
    return build_cfg(program)[name]


def cfg_stats(cfg: Cfg) -> dict:
    """Node count = simple statements plus the entry and exit nodes."""
    g = cfg.stmt_succs()
    edges = sum(len(v) for v in g.values())
    depth = max((cfg.loop_depth(l) for l in cfg.loops), default=0)
    return {
        "nodes": len(cfg.statements()) + 2,
        "blocks": len(cfg.blocks),
        "edges": edges,
        "block_edges": sum(len(b.succs) for b in cfg.blocks),
        "loops": len(cfg.loops),
        "max_loop_depth": depth,
    }


def cfg_to_json(cfg: Cfg) -> dict:
    return {
        "function": cfg.name,
        "entry": cfg.entry,
        "exit": cfg.exit,
        "blocks": [
            {
                "id": b.id,
                "stmts": [
                    {"stmt-id": s.sid, "kind": s.kind, "text": s.text,
                     "defs": sorted(s.defs), "uses": sorted(s.uses)}
                    for s in b.stmts
                ],
                "succs": list(b.succs),
            }
            for b in cfg.blocks
        ],
        "loops": [
            {"loop-id": l.loop_id, "header": l.header, "body": sorted(l.body), "var": l.var,
             "range": deparse(l.range) if l.range is not None else None}
            for l in sorted(cfg.loops.values(), key=lambda l: l.header)
        ],
    }


def dump_cfg(cfg: Cfg, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(cfg_to_json(cfg), indent=1) + "\n"
    if fmt == "dot":
        return _dot(cfg)
    if fmt != "text":
        raise ValueError(f"unknown CFG format {fmt!r}")
    lines = [f"cfg {cfg.name} entry=B{cfg.entry} exit=B{cfg.exit}"]
    for b in cfg.blocks:
        tag = " (entry)" if b.id == cfg.entry else " (exit)" if b.id == cfg.exit else ""
        lines.append(f"B{b.id}{tag}:")
        for s in b.stmts:
            lines.append(f"  s{s.sid} [{s.kind}] {s.text}")
            lines.append(f"      defs={{{', '.join(sorted(s.defs))}}} uses={{{', '.join(sorted(s.uses))}}}")
        lines.append("  -> " + (", ".join(f"B{x}" for x in b.succs) if b.succs else "(none)"))
    for l in sorted(cfg.loops.values(), key=lambda l: l.header):
        lines.append(f"loop header=B{l.header} var={l.var} depth={cfg.loop_depth(l.loop_id)} "
                     f"blocks={{{', '.join(f'B{x}' for x in sorted(l.body))}}}")
    return "\n".join(lines) + "\n"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\l")


def _dot(cfg: Cfg) -> str:
    out = [f'digraph "{_dot_escape(cfg.name)}" {{', "  node [shape=box, fontname=monospace];"]
    for b in cfg.blocks:
        if b.id == cfg.entry:
            label = "ENTRY"
        elif b.id == cfg.exit:
            label = "EXIT"
        else:
            label = f"B{b.id}\\l" + "".join(_dot_escape(s.text.split("\n")[0]) + "\\l" for s in b.stmts)
        out.append(f'  B{b.id} [label="{label}"];')
    for b in cfg.blocks:
        for s in b.succs:
            out.append(f"  B{b.id} -> B{s};")
    out.append("}")
    return "\n".join(out) + "\n"
