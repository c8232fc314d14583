"""Pratt parser producing S-expression trees with R operator precedence."""

from __future__ import annotations

from typing import List, Optional

from . import ast as A
from . import lexer as L
from .lexer import Token, tokenize


class ParseError(Exception):
    def __init__(self, message: str, span: A.Span, expected=()):
        exp = f" (expected one of: {', '.join(sorted(expected))})" if expected else ""
        super().__init__(f"{span}: {message}{exp}")
        self.span = span
        self.expected = set(expected)


class UnsupportedConstruct(Exception):
    def __init__(self, message: str, span: Optional[A.Span] = None):
        super().__init__(f"{span}: {message}" if span else message)
        self.span = span


# Binary operators: lexeme -> (left binding power, right binding power).
_BINARY = {
    "?": (1, 2),
    "=": (3, 2),
    "<-": (5, 4), "<<-": (5, 4),
    "->": (6, 7), "->>": (6, 7),
    "~": (8, 9),
    "||": (10, 11), "|": (10, 11),
    "&&": (12, 13), "&": (12, 13),
    "==": (16, 17), "!=": (16, 17), "<": (16, 17), ">": (16, 17), "<=": (16, 17), ">=": (16, 17),
    "+": (18, 19), "-": (18, 19),
    "*": (20, 21), "/": (20, 21),
    "%%": (22, 23),  # all %op% share this entry
    "|>": (22, 23),
    ":": (24, 25),
    "^": (29, 28),
}
_NOT_BP = 14
_UNARY_BP = 26
_POSTFIX_BP = 30


def parse(tokens, allow_reserved: bool = False) -> A.SNode:
    """Parse a token list (or source text) into a program BLOCK."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens, allow_reserved=allow_reserved)
    return _Parser(tokens).program()


def parse_source(source: str, allow_reserved: bool = False) -> A.SNode:
    return parse(tokenize(source, allow_reserved=allow_reserved))


class _Parser:
    def __init__(self, tokens: List[Token]):
        self.toks = tokens
        self.pos = 0
        # >0 while inside ( ) or [ ]: newlines are insignificant there.
        self.paren_depth = 0
        self.brace_depth = 0

    # -- token helpers -------------------------------------------------------
    def peek(self, skip_nl: Optional[bool] = None) -> Token:
        if skip_nl is None:
            skip_nl = self.paren_depth > 0
        i = self.pos
        if skip_nl:
            while self.toks[i].kind == L.NEWLINE:
                i += 1
        return self.toks[i]

    def next(self, skip_nl: Optional[bool] = None) -> Token:
        if skip_nl is None:
            skip_nl = self.paren_depth > 0
        if skip_nl:
            self.skip_newlines()
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def skip_newlines(self):
        while self.toks[self.pos].kind == L.NEWLINE:
            self.pos += 1

    def expect(self, lexeme: str, skip_nl: Optional[bool] = None) -> Token:
        t = self.next(skip_nl)
        if t.lexeme != lexeme or t.kind in (L.STRING, L.IDENT):
            raise ParseError(f"unexpected {t.lexeme or 'end of input'!r}", t.span, {lexeme})
        return t

    # -- statements ----------------------------------------------------------
    def program(self) -> A.SNode:
        stmts = self.statements(until=L.EOF)
        return A.block(stmts, span=A.Span(1, 1, 0, 0))

    def statements(self, until) -> list:
        out = []
        while True:
            t = self.peek(skip_nl=False)
            if t.kind == L.NEWLINE or t.is_op(";"):
                self.pos += 1
                continue
            if until == L.EOF and t.kind == L.EOF:
                return out
            if until == "}" and t.is_op("}"):
                return out
            if t.kind == L.EOF:
                raise ParseError("unexpected end of input", t.span, {"}"})
            out.append(self.expr(0))
            t = self.peek(skip_nl=False)
            if not (t.kind in (L.NEWLINE, L.EOF) or t.is_op(";", "}")):
                raise ParseError(f"unexpected {t.lexeme!r}", t.span, {"newline", ";"})

    # -- expressions -----------------------------------------------------------
    def expr(self, min_bp: int) -> A.SNode:
        left = self.prefix()
        while True:
            t = self.peek()
            if t.kind == L.DELIM and t.lexeme in ("(", "[", "[["):
                if _POSTFIX_BP < min_bp:
                    break
                left = self.postfix(left)
                continue
            if t.kind == L.OPERATOR and t.lexeme in ("$", "@"):
                self.next()
                name = self.next()
                if name.kind not in (L.IDENT, L.STRING):
                    raise ParseError("expected a name after $", name.span, {"identifier"})
                left = A.call(t.lexeme, left, A.sym(name.value, name.span), span=t.span)
                continue
            if t.kind != L.OPERATOR:
                break
            op = t.lexeme
            key = "%%" if op.startswith("%") else op
            if key not in _BINARY:
                if op in ("::", ":::"):
                    raise UnsupportedConstruct(f"namespace operator {op}", t.span)
                if op == "!":
                    break
                raise ParseError(f"unexpected operator {op!r}", t.span)
            lbp, rbp = _BINARY[key]
            if lbp < min_bp:
                break
            self.next()
            self.skip_newlines()
            right = self.expr(rbp)
            left = self.binary(op, left, right, t.span)
        return left

    def binary(self, op, left, right, span) -> A.SNode:
        if op in ("<-", "<<-", "="):
            return self.make_assign(op, left, right, span)
        if op in ("->", "->>"):
            return self.make_assign("<-" if op == "->" else "<<-", right, left, span)
        if op == "?":
            raise UnsupportedConstruct("help operator", span)
        if op == "~":
            raise UnsupportedConstruct("formula", span)
        if op == "|>":
            raise UnsupportedConstruct("native pipe", span)
        return A.call(op, left, right, span=span)

    def make_assign(self, op, target, value, span) -> A.SNode:
        if target.kind == A.STR:
            target = A.sym(target.value, target.span)
        if target.kind == A.SYM:
            return A.SNode(A.ASSIGN, op, [target, value], span=span)
        if target.kind == A.INDEX:
            base = target
            while base.kind == A.INDEX:
                base = base.children[0]
            if base.kind != A.SYM:
                raise UnsupportedConstruct("sub-assignment to a non-variable", span)
            if op == "<<-":
                raise UnsupportedConstruct("super sub-assignment", span)
            return A.SNode(A.ASSIGN, "[<-", [target, value], span=span)
        raise UnsupportedConstruct("replacement function assignment", span)

    def prefix(self) -> A.SNode:
        t = self.next()
        k = t.kind
        if k == L.NUMBER:
            if t.integer:
                return A.SNode(A.NUM_INT, t.value, span=t.span, text=t.lexeme)
            if isinstance(t.value, complex):
                return A.SNode(A.NUM_CPLX, t.value, span=t.span, text=t.lexeme)
            return A.SNode(A.NUM_DBL, t.value, span=t.span, text=t.lexeme)
        if k == L.STRING:
            return A.SNode(A.STR, t.value, span=t.span)
        if k == L.LOGICAL:
            return A.SNode(A.LOGICAL, t.value, span=t.span)
        if k == L.NA:
            return A.SNode(A.NA_LIT, t.lexeme, span=t.span)
        if k == L.NULL:
            return A.SNode(A.NULL_LIT, None, span=t.span)
        if k == L.IDENT:
            return A.sym(t.value, t.span)
        if k == L.KEYWORD:
            return self.keyword(t)
        if k == L.OPERATOR:
            if t.lexeme in ("-", "+"):
                self.skip_newlines()
                operand = self.expr(_UNARY_BP)
                if t.lexeme == "-" and operand.kind in (A.NUM_DBL, A.NUM_INT) and operand.value >= 0:
                    text = "-" + operand.text if operand.text else None
                    return A.SNode(operand.kind, -operand.value, span=t.span, text=text)
                return A.call(t.lexeme, operand, span=t.span)
            if t.lexeme == "!":
                self.skip_newlines()
                return A.call("!", self.expr(_NOT_BP), span=t.span)
            if t.lexeme == "~":
                raise UnsupportedConstruct("formula", t.span)
        if k == L.DELIM:
            if t.lexeme == "(":
                self.paren_depth += 1
                inner = self.expr(0)
                self.expect(")")
                self.paren_depth -= 1
                return A.call("(", inner, span=t.span)
            if t.lexeme == "{":
                saved = self.paren_depth
                self.paren_depth = 0
                self.brace_depth += 1
                stmts = self.statements(until="}")
                self.expect("}", skip_nl=True)
                self.brace_depth -= 1
                self.paren_depth = saved
                return A.block(stmts, span=t.span)
        if k == L.EOF:
            raise ParseError("unexpected end of input", t.span, {"expression"})
        raise ParseError(f"unexpected {t.lexeme!r}", t.span, {"expression"})

    def keyword(self, t: Token) -> A.SNode:
        w = t.lexeme
        if w == "if":
            self.expect("(", skip_nl=True)
            self.paren_depth += 1
            cond = self.expr(0)
            self.expect(")")
            self.paren_depth -= 1
            self.skip_newlines()
            then = self.expr(2)
            # Inside braces or parens R lets `else` start the next line.
            nxt = self.peek(skip_nl=self.brace_depth > 0 or self.paren_depth > 0)
            if nxt.kind == L.KEYWORD and nxt.lexeme == "else":
                self.next(skip_nl=True)
                self.skip_newlines()
                other = self.expr(2)
                return A.SNode(A.IF, None, [cond, then, other], span=t.span)
            return A.SNode(A.IF, None, [cond, then], span=t.span)
        if w == "for":
            self.expect("(", skip_nl=True)
            self.paren_depth += 1
            var = self.next()
            if var.kind != L.IDENT:
                raise ParseError("expected loop variable", var.span, {"identifier"})
            kw = self.next()
            if kw.lexeme != "in":
                raise ParseError(f"unexpected {kw.lexeme!r}", kw.span, {"in"})
            seq = self.expr(0)
            self.expect(")")
            self.paren_depth -= 1
            self.skip_newlines()
            body = self.expr(2)
            return A.SNode(A.FOR, var.value, [seq, body], span=t.span)
        if w == "while":
            self.expect("(", skip_nl=True)
            self.paren_depth += 1
            cond = self.expr(0)
            self.expect(")")
            self.paren_depth -= 1
            self.skip_newlines()
            body = self.expr(2)
            return A.SNode(A.WHILE, None, [cond, body], span=t.span)
        if w == "function":
            return self.fundef(t)
        if w == "break":
            return A.SNode(A.BREAK, span=t.span)
        if w == "next":
            return A.SNode(A.NEXT, span=t.span)
        if w == "repeat":
            raise UnsupportedConstruct("repeat loops", t.span)
        raise ParseError(f"unexpected keyword {w!r}", t.span, {"expression"})

    def fundef(self, t: Token) -> A.SNode:
        self.expect("(", skip_nl=True)
        self.paren_depth += 1
        names, defaults = [], []
        if not self.peek().is_op(")"):
            while True:
                p = self.next()
                if p.kind != L.IDENT:
                    raise ParseError("expected parameter name", p.span, {"identifier"})
                if p.value == "...":
                    raise UnsupportedConstruct("'...' parameters", p.span)
                names.append(p.value)
                if self.peek().is_op("="):
                    self.next()
                    defaults.append(self.expr(4))
                else:
                    defaults.append(A.sym(""))
                if self.peek().is_op(","):
                    self.next()
                    continue
                break
        self.expect(")")
        self.paren_depth -= 1
        self.skip_newlines()
        body = self.expr(2)
        return A.SNode(A.FUNDEF, None, [*defaults, body], [*names, None], span=t.span)

    def postfix(self, left: A.SNode) -> A.SNode:
        t = self.next()
        closer = {"(": ")", "[": "]", "[[": "]"}[t.lexeme]
        self.paren_depth += 1
        args, names = self.arglist(closer)
        self.expect(closer)
        if t.lexeme == "[[":
            self.expect("]")
        self.paren_depth -= 1
        if t.lexeme == "(":
            node = A.SNode(A.CALL, None, [left, *args], [None, *names], span=t.span)
            if not any(names):
                node.names = None
            return node
        if t.lexeme == "[[":
            return A.call("[[", left, *args, span=t.span)
        if any(names):
            raise UnsupportedConstruct("named index arguments", t.span)
        return A.SNode(A.INDEX, None, [left, *args], span=t.span)

    def arglist(self, closer: str):
        args, names = [], []
        self.skip_newlines()
        if self.peek().is_op(closer):
            return args, names
        while True:
            self.skip_newlines()
            t = self.toks[self.pos]
            name = None
            if t.kind in (L.IDENT, L.STRING, L.NULL) and self.toks[self._after(self.pos)].is_op("="):
                self.next()
                self.next()
                name = t.value if t.kind != L.NULL else "NULL"
            if self.peek().is_op(",", closer):
                args.append(A.sym(""))
            else:
                args.append(self.expr(4))
            names.append(name)
            if self.peek().is_op(","):
                self.next()
                if self.peek().is_op(closer):
                    args.append(A.sym(""))
                    names.append(None)
                    return args, names
                continue
            return args, names

    def _after(self, i: int) -> int:
        """Index of the first non-newline token after position ``i``."""
        i += 1
        while self.toks[i].kind == L.NEWLINE:
            i += 1
        return i
