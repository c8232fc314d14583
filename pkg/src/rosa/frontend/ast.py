"""S-expression AST shared by every pass.

A program is a tree of :class:`SNode`.  Calls keep the callee in head
position (``children[0]``), the way R's own LANGSXP cells do, so that
``a + b`` is ``CALL(SYM +, SYM a, SYM b)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional

# Node kinds.
SYM = "SYM"
NUM_INT = "NUM_INT"
NUM_DBL = "NUM_DBL"
NUM_CPLX = "NUM_CPLX"
STR = "STR"
LOGICAL = "LOGICAL"
NULL_LIT = "NULL_LIT"
NA_LIT = "NA_LIT"
CALL = "CALL"
FUNDEF = "FUNDEF"
BLOCK = "BLOCK"
IF = "IF"
FOR = "FOR"
WHILE = "WHILE"
BREAK = "BREAK"
NEXT = "NEXT"
INDEX = "INDEX"
ASSIGN = "ASSIGN"

LITERAL_KINDS = frozenset({NUM_INT, NUM_DBL, NUM_CPLX, STR, LOGICAL, NULL_LIT, NA_LIT})
ASSIGN_OPS = frozenset({"=", "<-", "<<-", "[<-"})

# Names beginning with this prefix cannot be written in ordinary source.
RESERVED_PREFIX = "%"
HINT = RESERVED_PREFIX + "hint"

_ids = itertools.count(1)


def fresh_id() -> int:
    return next(_ids)


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    length: int
    offset: int = 0

    def __str__(self):
        return f"{self.line}:{self.column}"


@dataclass(eq=False)
class SNode:
    """One AST node.

    ``names`` runs parallel to ``children`` and carries argument tags for
    calls (``sample(x, size=N)``) and parameter names for FUNDEF nodes.
    A missing argument (``x[, j]``) is the empty symbol ``SYM ""``.
    """

    kind: str
    value: object = None
    children: list = field(default_factory=list)
    names: Optional[list] = None
    id: int = field(default_factory=fresh_id)
    span: Optional[Span] = None
    # Original lexeme of numeric literals (``1`` vs ``1.0`` vs ``1e9``).
    text: Optional[str] = None

    # -- helpers -----------------------------------------------------------
    def name_at(self, i: int) -> Optional[str]:
        if self.names is None:
            return None
        return self.names[i]

    @property
    def callee(self) -> "SNode":
        return self.children[0]

    @property
    def args(self) -> list:
        return self.children[1:]

    def arg_names(self) -> list:
        if self.names is None:
            return [None] * (len(self.children) - 1)
        return self.names[1:]

    def call_name(self) -> Optional[str]:
        """Callee symbol name for CALL nodes with a symbol in head position."""
        if self.kind == CALL and self.children and self.children[0].kind == SYM:
            return self.children[0].value
        return None

    def is_empty_arg(self) -> bool:
        return self.kind == SYM and self.value == ""

    def walk(self) -> Iterator["SNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def shape(self):
        """Structural signature ignoring ids and spans."""
        return (
            self.kind,
            _norm_value(self.value),
            tuple(self.names) if self.names is not None else None,
            tuple(c.shape() for c in self.children),
        )

    def clone(self, fresh: bool = True) -> "SNode":
        return SNode(
            self.kind,
            self.value,
            [c.clone(fresh) for c in self.children],
            list(self.names) if self.names is not None else None,
            fresh_id() if fresh else self.id,
            self.span,
            self.text,
        )

    def __repr__(self):
        if self.kind == SYM:
            return f"SYM({self.value})"
        if self.kind in LITERAL_KINDS:
            return f"{self.kind}({self.value!r})"
        inner = ", ".join(repr(c) for c in self.children)
        if self.value is not None:
            return f"{self.kind}[{self.value}]({inner})"
        return f"{self.kind}({inner})"


def _norm_value(v):
    if isinstance(v, float) and v != v:
        return "nan"
    if isinstance(v, list):
        return tuple(v)
    return v


# -- constructors ------------------------------------------------------------

def sym(name: str, span=None) -> SNode:
    return SNode(SYM, name, span=span)


def num(value, span=None) -> SNode:
    if isinstance(value, bool):
        return SNode(LOGICAL, value, span=span)
    if isinstance(value, int):
        return SNode(NUM_INT, value, span=span)
    return SNode(NUM_DBL, float(value), span=span)


def dbl(value: float, text: Optional[str] = None, span=None) -> SNode:
    return SNode(NUM_DBL, float(value), span=span, text=text)


def call(fn, *args, names=None, span=None) -> SNode:
    head = sym(fn) if isinstance(fn, str) else fn
    kids = [head, *args]
    nm = None
    if names is not None:
        nm = [None, *names]
    return SNode(CALL, None, kids, nm, span=span)


def block(stmts, span=None) -> SNode:
    return SNode(BLOCK, None, list(stmts), span=span)


def assign(target: SNode, rhs: SNode, op: str = "<-", span=None) -> SNode:
    if target.kind == INDEX:
        op = "[<-"
    return SNode(ASSIGN, op, [target, rhs], span=span)


def hint(kind: str, *args) -> SNode:
    return call(HINT, SNode(STR, kind), *args)


def is_hint(node: SNode, kind: Optional[str] = None) -> bool:
    if node.kind != CALL or node.call_name() != HINT:
        return False
    return kind is None or node.children[1].value == kind


def assign_target_name(node: SNode) -> Optional[str]:
    """Variable written by an ASSIGN (the base of a sub-assignment)."""
    if node.kind != ASSIGN:
        return None
    t = node.children[0]
    while t.kind == INDEX:
        t = t.children[0]
    return t.value if t.kind == SYM else None


def symbols_read(node: SNode) -> set:
    """Free symbols read while evaluating ``node`` as an expression.

    Callee names of calls are not variable reads.
    """
    out = set()
    _collect_reads(node, out)
    return out


def _collect_reads(node: SNode, out: set):
    k = node.kind
    if k == SYM:
        if node.value and node.value not in ("T", "F"):
            out.add(node.value)
        return
    if k == CALL:
        head = node.children[0]
        if head.kind != SYM:
            _collect_reads(head, out)
        for a in node.children[1:]:
            _collect_reads(a, out)
        return
    if k == ASSIGN:
        target, rhs = node.children
        _collect_reads(rhs, out)
        if target.kind == INDEX:
            _collect_reads(target, out)
        return
    if k == FUNDEF:
        return
    for c in node.children:
        _collect_reads(c, out)
