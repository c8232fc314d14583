"""Bring parsed programs into the canonical shape the analyses expect.

After normalization:

* every IF has a then-block and an else-block (possibly empty);
* FOR and WHILE bodies are blocks and every FOR carries a loop annotation;
* assignments and IF-expressions never nest inside other expressions;
* ``system.time(e)`` becomes ``e`` bracketed by timer hints and ``gc(...)``
  becomes a gc hint;
* top-level ``f <- function(...)`` definitions populate the function table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from . import ast as A
from .parser import UnsupportedConstruct

TEMP_PREFIX = A.RESERVED_PREFIX + "t"


@dataclass
class LoopInfo:
    node_id: int
    kind: str  # "for" | "while"
    var: Optional[str]
    range: Optional[A.SNode]
    body_ids: List[int]


@dataclass
class NormalizedProgram:
    root: A.SNode
    functions: Dict[str, A.SNode] = field(default_factory=dict)
    loops: Dict[int, LoopInfo] = field(default_factory=dict)

    @property
    def statements(self) -> list:
        return self.root.children

    def function_body(self, name: str) -> A.SNode:
        return self.functions[name].children[-1]

    def params(self, name: str) -> list:
        return list(self.functions[name].names[:-1])

    def find(self, node_id: int) -> Optional[A.SNode]:
        for n in self.root.walk():
            if n.id == node_id:
                return n
        return None

    def clone(self) -> "NormalizedProgram":
        """Deep copy keeping node ids."""
        return normalize(self.root.clone(fresh=False))


class _Normalizer:
    def __init__(self, root: A.SNode):
        self.root = root
        self.functions: Dict[str, A.SNode] = {}
        self.loops: Dict[int, LoopInfo] = {}
        used = {n.value for n in root.walk() if n.kind == A.SYM and isinstance(n.value, str)}
        self._temps = (f"{TEMP_PREFIX}{i}" for i in itertools.count(1) if f"{TEMP_PREFIX}{i}" not in used)
        timers = [n.children[2].value for n in root.walk() if A.is_hint(n, "timer_start")]
        self._timers = (f"t{i}" for i in itertools.count(1) if f"t{i}" not in timers)

    def run(self) -> NormalizedProgram:
        stmts = self.block_stmts(self.root.children if self.root.kind == A.BLOCK else [self.root],
                                 top=True, in_function=False)
        root = A.SNode(A.BLOCK, None, stmts, id=self.root.id, span=self.root.span)
        return NormalizedProgram(root, self.functions, self.loops)

    # -- statements -------------------------------------------------------------
    def block_stmts(self, stmts, top: bool, in_function: bool) -> list:
        out: list = []
        for s in stmts:
            self.stmt(s, out, top, in_function)
        return out

    def as_block(self, node: A.SNode, in_function: bool) -> A.SNode:
        if node.kind == A.BLOCK:
            return A.SNode(A.BLOCK, None, self.block_stmts(node.children, False, in_function),
                           id=node.id, span=node.span)
        return A.block(self.block_stmts([node], False, in_function), span=node.span)

    def stmt(self, s: A.SNode, out: list, top: bool, in_function: bool):
        k = s.kind
        if k == A.BLOCK:
            out.extend(self.block_stmts(s.children, top, in_function))
            return
        if A.is_hint(s):
            out.append(s)
            return
        name = s.call_name()
        if name == "system.time" and len(s.children) == 2:
            key = next(self._timers)
            out.append(A.hint("timer_start", A.SNode(A.STR, key)))
            self.stmt(s.children[1], out, top, in_function)
            out.append(A.hint("timer_stop", A.SNode(A.STR, key)))
            return
        if name == "gc":
            out.append(A.hint("gc"))
            return
        if k == A.IF:
            cond = self.expr(s.children[0], out, in_function)
            then = self.as_block(s.children[1], in_function)
            other = self.as_block(s.children[2], in_function) if len(s.children) > 2 else A.block([])
            out.append(A.SNode(A.IF, None, [cond, then, other], id=s.id, span=s.span))
            return
        if k == A.FOR:
            rng = self.expr(s.children[0], out, in_function)
            body = self.as_block(s.children[1], in_function)
            node = A.SNode(A.FOR, s.value, [rng, body], id=s.id, span=s.span)
            self.loops[node.id] = LoopInfo(node.id, "for", s.value, rng, [c.id for c in body.children])
            out.append(node)
            return
        if k == A.WHILE:
            pre: list = []
            cond = self.expr(s.children[0], pre, in_function)
            if pre:
                raise UnsupportedConstruct("assignment inside a while condition", s.span)
            body = self.as_block(s.children[1], in_function)
            node = A.SNode(A.WHILE, None, [cond, body], id=s.id, span=s.span)
            self.loops[node.id] = LoopInfo(node.id, "while", None, None, [c.id for c in body.children])
            out.append(node)
            return
        if k == A.ASSIGN:
            self.assignment(s, out, top, in_function)
            return
        if k == A.FUNDEF:
            raise UnsupportedConstruct("anonymous function definition", s.span)
        out.append(self.expr(s, out, in_function))

    def assignment(self, s: A.SNode, out: list, top: bool, in_function: bool):
        target, rhs = s.children
        op = s.value
        if rhs.kind == A.FUNDEF:
            if in_function or not top or target.kind != A.SYM:
                raise UnsupportedConstruct("nested function definition", rhs.span)
            fn = self.fundef(rhs)
            node = A.SNode(A.ASSIGN, op, [target, fn], id=s.id, span=s.span)
            self.functions[target.value] = fn
            out.append(node)
            return
        if rhs.kind == A.IF:
            # x <- if (c) a else b  ==>  if (c) { x <- a } else { x <- b }
            cond = self.expr(rhs.children[0], out, in_function)
            arms = []
            for arm in rhs.children[1:3]:
                arms.append(self._assign_arm(target, op, arm, in_function))
            if len(arms) == 1:
                arms.append(self._assign_arm(target, op, A.SNode(A.NULL_LIT), in_function))
            out.append(A.SNode(A.IF, None, [cond, *arms], id=rhs.id, span=rhs.span))
            return
        if rhs.kind == A.ASSIGN:
            # a <- b <- e  ==>  b <- e; a <- b
            self.assignment(rhs, out, top, in_function)
            inner_target = rhs.children[0]
            if inner_target.kind != A.SYM:
                tmp = next(self._temps)
                raise UnsupportedConstruct(f"chained sub-assignment ({tmp})", rhs.span)
            rhs = A.sym(inner_target.value)
        new_target = target
        if target.kind == A.INDEX:
            new_target = A.SNode(A.INDEX, None,
                                 [target.children[0]] + [self.expr(c, out, in_function) for c in target.children[1:]],
                                 id=target.id, span=target.span)
        new_rhs = self.expr(rhs, out, in_function)
        out.append(A.SNode(A.ASSIGN, op, [new_target, new_rhs], id=s.id, span=s.span))

    def _assign_arm(self, target, op, arm, in_function) -> A.SNode:
        if arm.kind == A.BLOCK:
            if not arm.children:
                return self.as_block(A.assign(target.clone(), A.SNode(A.NULL_LIT), op), in_function)
            *init, last = arm.children
            stmts = list(init) + [A.SNode(A.ASSIGN, "[<-" if target.kind == A.INDEX else op,
                                          [target.clone(), last])]
            return self.as_block(A.block(stmts, span=arm.span), in_function)
        assign = A.SNode(A.ASSIGN, "[<-" if target.kind == A.INDEX else op, [target.clone(), arm])
        return self.as_block(assign, in_function)

    def fundef(self, fn: A.SNode) -> A.SNode:
        *defaults, body = fn.children
        nb = self.as_block(body, in_function=True)
        return A.SNode(A.FUNDEF, None, [*defaults, nb], list(fn.names), id=fn.id, span=fn.span)

    # -- expressions --------------------------------------------------------------
    def expr(self, e: A.SNode, out: list, in_function: bool) -> A.SNode:
        """Return ``e`` with nested assignments and IF-expressions hoisted into ``out``."""
        k = e.kind
        if k == A.ASSIGN:
            self.assignment(e, out, False, in_function)
            t = e.children[0]
            if t.kind != A.SYM:
                raise UnsupportedConstruct("sub-assignment used as a value", e.span)
            return A.sym(t.value, t.span)
        if k == A.IF:
            tmp = next(self._temps)
            self.assignment(A.SNode(A.ASSIGN, "<-", [A.sym(tmp), e], span=e.span), out, False, in_function)
            return A.sym(tmp, e.span)
        if k == A.FUNDEF:
            raise UnsupportedConstruct("nested function definition", e.span)
        if k == A.CALL and e.call_name() == "system.time":
            raise UnsupportedConstruct("system.time used as a value", e.span)
        if k in (A.BLOCK, A.FOR, A.WHILE):
            raise UnsupportedConstruct(f"{k.lower()} used as a value", e.span)
        if not e.children:
            return e
        kids = [e.children[0]] if k == A.CALL and e.children[0].kind == A.SYM else []
        start = len(kids)
        kids += [self.expr(c, out, in_function) for c in e.children[start:]]
        if all(a is b for a, b in zip(kids, e.children)):
            return e
        return A.SNode(k, e.value, kids, e.names, id=e.id, span=e.span, text=e.text)


def normalize(root) -> NormalizedProgram:
    """Normalize a parsed program (or re-normalize a :class:`NormalizedProgram`)."""
    if isinstance(root, NormalizedProgram):
        root = root.root
    return _Normalizer(root).run()


def is_temp(name: str) -> bool:
    return name.startswith(TEMP_PREFIX)
