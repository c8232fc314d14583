"""Deparse ASTs back to R source, and dump them as trees or JSON."""

from __future__ import annotations

import json
import re

from . import ast as A

_IDENT_OK = re.compile(r"^(?:[A-Za-z]|\.(?![0-9]))[A-Za-z0-9._]*$")
_RESERVED_WORDS = {
    "if", "else", "for", "while", "repeat", "function", "break", "next", "in",
    "TRUE", "FALSE", "NULL", "NA", "Inf", "NaN",
}

# Precedence used to decide where parentheses are required (higher binds tighter).
_PREC = {
    "=": 1, "<-": 2, "<<-": 2, "||": 4, "|": 4, "&&": 5, "&": 5, "!": 6,
    "==": 7, "!=": 7, "<": 7, ">": 7, "<=": 7, ">=": 7,
    "+": 8, "-": 8, "*": 9, "/": 9, "%": 10, ":": 11, "unary": 12, "^": 13,
}
_RIGHT_ASSOC = {"^", "<-", "<<-", "="}
_TIGHT = {"^", ":"}  # printed without surrounding spaces
_ATOM = 100


def fmt_symbol(name: str) -> str:
    if name == "...":
        return name
    if _IDENT_OK.match(name) and name not in _RESERVED_WORDS:
        return name
    return "`" + name + "`"


def fmt_double(v: float) -> str:
    if v != v:
        return "NaN"
    if v in (float("inf"), float("-inf")):
        return "Inf" if v > 0 else "-Inf"
    s = format(v, ".15g")
    if float(s) != v:
        s = repr(v)
    return s


def fmt_string(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return '"' + out + '"'


def _binop(node: A.SNode):
    """Operator name when ``node`` is an infix/prefix call we print specially."""
    if node.kind != A.CALL:
        return None
    name = node.call_name()
    if name is None:
        return None
    nargs = len(node.children) - 1
    if nargs == 2 and (name in _PREC or (name.startswith("%") and name.endswith("%") and len(name) > 1)):
        return name
    if nargs == 1 and name in ("-", "+", "!"):
        return "unary" if name != "!" else "!"
    return None


def _prec(node: A.SNode) -> int:
    if node.kind == A.ASSIGN:
        return _PREC["<-"] if node.value != "=" else _PREC["="]
    if node.kind in (A.IF, A.FOR, A.WHILE, A.FUNDEF):
        return 0
    if node.kind in (A.NUM_DBL, A.NUM_INT) and node.value < 0:
        return _PREC["unary"]
    op = _binop(node)
    if op is None:
        return _ATOM
    if op.startswith("%") and op != "%":
        return _PREC["%"]
    return _PREC[op]


class Printer:
    def __init__(self, indent: str = "  "):
        self.indent = indent

    # -- statements ----------------------------------------------------------
    def program(self, root: A.SNode) -> str:
        if root.kind != A.BLOCK:
            return self.expr(root, 0) + "\n"
        lines = self.stmt_lines(root.children, 0)
        return "\n".join(lines) + ("\n" if lines else "")

    def stmt_lines(self, stmts, depth: int) -> list:
        pad = self.indent * depth
        out = []
        i = 0
        while i < len(stmts):
            s = stmts[i]
            if A.is_hint(s, "timer_start"):
                j, inner = self._timed_region(stmts, i)
                out.append(pad + self._system_time(inner, depth))
                i = j + 1
                continue
            if A.is_hint(s, "gc"):
                out.append(pad + "gc(T)")
                i += 1
                continue
            out.append(pad + self.expr(s, depth))
            i += 1
        return out

    def _timed_region(self, stmts, i):
        key = stmts[i].children[2].value
        for j in range(i + 1, len(stmts)):
            if A.is_hint(stmts[j], "timer_stop") and stmts[j].children[2].value == key:
                return j, stmts[i + 1:j]
        raise ValueError("unbalanced timing markers")

    def _system_time(self, inner, depth) -> str:
        if len(inner) == 1:
            return "system.time(" + self.expr(inner[0], depth) + ")"
        body = A.block(inner)
        return "system.time(" + self.expr(body, depth) + ")"

    # -- expressions -----------------------------------------------------------
    def expr(self, node: A.SNode, depth: int = 0) -> str:
        k = node.kind
        if k == A.SYM:
            return fmt_symbol(node.value) if node.value else ""
        if k == A.NUM_DBL:
            if node.text and not node.text.lower().startswith(("0x", "-0x")):
                return node.text
            return fmt_double(node.value)
        if k == A.NUM_INT:
            return f"{node.value}L"
        if k == A.NUM_CPLX:
            return fmt_double(node.value.imag) + "i"
        if k == A.STR:
            return fmt_string(node.value)
        if k == A.LOGICAL:
            return "TRUE" if node.value else "FALSE"
        if k == A.NA_LIT:
            return node.value if isinstance(node.value, str) else "NA"
        if k == A.NULL_LIT:
            return "NULL"
        if k == A.BLOCK:
            if not node.children:
                return "{\n" + self.indent * depth + "}"
            inner = self.stmt_lines(node.children, depth + 1)
            return "{\n" + "\n".join(inner) + "\n" + self.indent * depth + "}"
        if k == A.IF:
            s = "if (" + self.expr(node.children[0], depth) + ") " + self.expr(node.children[1], depth)
            if len(node.children) > 2:
                other = node.children[2]
                s += " else " + self.expr(other, depth)
            return s
        if k == A.FOR:
            return (f"for ({fmt_symbol(node.value)} in " + self.expr(node.children[0], depth)
                    + ") " + self.expr(node.children[1], depth))
        if k == A.WHILE:
            return "while (" + self.expr(node.children[0], depth) + ") " + self.expr(node.children[1], depth)
        if k == A.BREAK:
            return "break"
        if k == A.NEXT:
            return "next"
        if k == A.FUNDEF:
            params = []
            for name, default in zip(node.names[:-1], node.children[:-1]):
                if default.is_empty_arg():
                    params.append(fmt_symbol(name))
                else:
                    params.append(f"{fmt_symbol(name)} = " + self.expr(default, depth))
            return "function(" + ", ".join(params) + ") " + self.expr(node.children[-1], depth)
        if k == A.ASSIGN:
            op = "<-" if node.value == "[<-" else node.value
            target, rhs = node.children
            lhs = self.expr(target, depth)
            right = self._operand(rhs, _PREC[op], right_side=True, op=op, depth=depth)
            return f"{lhs} {op} {right}"
        if k == A.INDEX:
            base = self._operand(node.children[0], _ATOM, depth=depth)
            return base + "[" + ", ".join(self.expr(c, depth) for c in node.children[1:]) + "]"
        if k == A.CALL:
            return self._call(node, depth)
        raise ValueError(f"cannot print node kind {k}")

    def _operand(self, child, parent_prec, right_side=False, op=None, depth=0) -> str:
        text = self.expr(child, depth)
        cp = _prec(child)
        if right_side and op == "^" and cp == _PREC["unary"]:
            return text
        if cp < parent_prec or (cp == parent_prec and cp != _ATOM and (
                (right_side and op not in _RIGHT_ASSOC) or (not right_side and op in _RIGHT_ASSOC))):
            # Assignments and control forms on the right of an assignment are fine.
            if right_side and op in ("<-", "<<-", "=") and child.kind in (A.IF, A.FUNDEF, A.ASSIGN):
                return text
            return "(" + text + ")"
        return text

    def _call(self, node: A.SNode, depth: int) -> str:
        name = node.call_name()
        if name == "(" and len(node.children) == 2:
            return "(" + self.expr(node.children[1], depth) + ")"
        if name == "$" and len(node.children) == 3:
            return self._operand(node.children[1], _ATOM, depth=depth) + "$" + fmt_symbol(node.children[2].value)
        if name == "[[":
            base = self._operand(node.children[1], _ATOM, depth=depth)
            return base + "[[" + ", ".join(self.expr(c, depth) for c in node.children[2:]) + "]]"
        op = _binop(node)
        if op in ("unary", "!"):
            p = _PREC[op]
            return name + self._operand(node.children[1], p, right_side=True, op=name, depth=depth)
        if op is not None:
            p = _prec(node)
            left = self._operand(node.children[1], p, right_side=False, op=op, depth=depth)
            right = self._operand(node.children[2], p, right_side=True, op=op, depth=depth)
            if op in _TIGHT:
                return f"{left}{op}{right}"
            return f"{left} {op} {right}"
        head = node.children[0]
        fn = fmt_symbol(head.value) if head.kind == A.SYM else "(" + self.expr(head, depth) + ")"
        parts = []
        for i, arg in enumerate(node.children[1:], start=1):
            nm = node.name_at(i)
            val = self.expr(arg, depth)
            parts.append(f"{fmt_symbol(nm)} = {val}" if nm else val)
        return fn + "(" + ", ".join(parts) + ")"


def deparse(node: A.SNode) -> str:
    """R source text for a program root (BLOCK) or a single expression."""
    p = Printer()
    if node.kind == A.BLOCK:
        return p.program(node)
    return p.expr(node)


# -- tree dumps -----------------------------------------------------------------

def _payload(node: A.SNode) -> str:
    if node.kind in (A.SYM,):
        return node.value
    if node.kind == A.NUM_DBL:
        return fmt_double(node.value)
    if node.kind == A.NUM_INT:
        return f"{node.value}L"
    if node.kind == A.NUM_CPLX:
        return fmt_double(node.value.imag) + "i"
    if node.kind == A.STR:
        return fmt_string(node.value)
    if node.kind == A.LOGICAL:
        return "TRUE" if node.value else "FALSE"
    if node.kind == A.NA_LIT:
        return str(node.value)
    if node.kind in (A.ASSIGN, A.FOR):
        return str(node.value)
    if node.kind == A.FUNDEF:
        return "(" + ", ".join(node.names[:-1]) + ")"
    return ""


def dump_tree(node: A.SNode, indent: str = "  ") -> str:
    """Indented dump, one node per line: ``KIND payload``."""
    lines = []

    def rec(n, depth):
        label = n.kind
        pay = _payload(n)
        line = indent * depth + label + (" " + pay if pay else "")
        if n.names is not None and n.kind == A.CALL:
            tags = [t for t in n.names[1:] if t]
            if tags:
                line += "  [" + ", ".join(f"{t}=" for t in tags) + "]"
        lines.append(line)
        for c in n.children:
            rec(c, depth + 1)

    rec(node, 0)
    return "\n".join(lines) + "\n"


def to_json(node: A.SNode) -> dict:
    d = {"kind": node.kind, "id": node.id}
    v = node.value
    if isinstance(v, complex):
        d["value"] = {"re": v.real, "im": v.imag}
    elif isinstance(v, float) and (v != v or v in (float("inf"), float("-inf"))):
        d["value"] = fmt_double(v)
    elif v is not None:
        d["value"] = v
    if node.names is not None:
        d["names"] = node.names
    if node.span is not None:
        d["span"] = [node.span.line, node.span.column, node.span.length]
    if node.children:
        d["children"] = [to_json(c) for c in node.children]
    return d


def dump_json(node: A.SNode) -> str:
    return json.dumps(to_json(node), indent=1, sort_keys=True)


def from_json(d: dict) -> A.SNode:
    v = d.get("value")
    kind = d["kind"]
    if kind == A.NUM_CPLX and isinstance(v, dict):
        v = complex(v["re"], v["im"])
    elif kind == A.NUM_DBL and isinstance(v, str):
        v = float(v.replace("Inf", "inf").replace("NaN", "nan"))
    elif kind == A.NUM_DBL:
        v = float(v)
    return A.SNode(
        kind, v, [from_json(c) for c in d.get("children", [])],
        d.get("names"), d.get("id", A.fresh_id()),
        A.Span(*d["span"]) if "span" in d else None,
    )
