"""Tokenizer for the supported R subset."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List

from .ast import RESERVED_PREFIX, Span

IDENT = "identifier"
NUMBER = "number"
STRING = "string-literal"
LOGICAL = "logical-literal"
NA = "NA"
NULL = "NULL"
OPERATOR = "operator"
DELIM = "delimiter"
KEYWORD = "keyword"
NEWLINE = "newline"
EOF = "eof"

KEYWORDS = {"if", "else", "for", "while", "repeat", "function", "break", "next", "in"}
NA_WORDS = {"NA", "NA_integer_", "NA_real_", "NA_character_", "NA_complex_"}
CONSTANT_WORDS = {"Inf", "NaN"}

# Longest first so that "<<-" wins over "<-" and "<".
_OPERATORS = [
    "<<-", "->>", "|>", ":::", "::", "<-", "->", "<=", ">=", "==", "!=", "&&", "||",
    "[[", "+", "-", "*", "/", "^", "<", ">", "!", "&", "|", "~", "?", ":", "=",
    "$", "@",
]
_DELIMS = "()[]{},;"


class LexError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(f"{span}: {message}")
        self.span = span


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    span: Span
    # Decoded value for literals (float/int/complex/str/bool/None).
    value: object = None
    # number tokens only: True for integer literals (``0L``).
    integer: bool = False

    def is_op(self, *ops) -> bool:
        return self.kind in (OPERATOR, DELIM) and self.lexeme in ops

    def __repr__(self):
        return f"<{self.kind} {self.lexeme!r}>"


_NUM_RE = re.compile(
    r"""
    0[xX][0-9a-fA-F]+L?              # hex
  | (?: \d+\.?\d* | \.\d+ )          # mantissa
    (?: [eE][+-]?\d+ )?              # exponent
    [Li]?                            # integer / imaginary suffix
    """,
    re.VERBOSE,
)
_IDENT_RE = re.compile(r"(?:[A-Za-z]|\.(?![0-9]))[A-Za-z0-9._]*|\.")
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "0": "\0", "\\": "\\", '"': '"', "'": "'", "`": "`"}


def tokenize(source: str, allow_reserved: bool = False) -> List[Token]:
    """Split ``source`` into tokens.

    Comments are dropped; newlines are kept because they end statements.
    ``allow_reserved`` admits backquoted names with the reserved prefix,
    which only our own printer emits.
    """
    toks: List[Token] = []
    i = 0
    line, col = 1, 1
    n = len(source)

    def span(start, length):
        return Span(line, col, length, start)

    while i < n:
        ch = source[i]
        if ch == "\n":
            toks.append(Token(NEWLINE, "\n", span(i, 1)))
            i += 1
            line, col = line + 1, 1
            continue
        if ch in " \t\r\f":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
                col += 1
            continue
        start = i
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _NUM_RE.match(source, i)
            text = m.group(0)
            end = m.end()
            if end < n and (source[end].isalpha() or source[end] == "_"):
                raise LexError(f"malformed number {source[i:end + 1]!r}", span(i, end - i + 1))
            toks.append(_number_token(text, span(i, len(text))))
        elif ch in "\"'":
            text, value, end, nl = _scan_string(source, i, span)
            toks.append(Token(STRING, text, span(i, end - i), value))
            if nl:
                line += nl
                col = len(text) - text.rfind("\n")
                i = end
                continue
        elif ch == "`":
            end = source.find("`", i + 1)
            if end < 0:
                raise LexError("unterminated backquoted name", span(i, n - i))
            name = source[i + 1:end]
            if name.startswith(RESERVED_PREFIX) and not allow_reserved:
                raise LexError(f"reserved name {name!r}", span(i, end + 1 - i))
            end += 1
            toks.append(Token(IDENT, source[i:end], span(i, end - i), name))
        elif ch.isalpha() or ch == ".":
            if source.startswith("...", i):
                end = i + 3
            else:
                end = _IDENT_RE.match(source, i).end()
            word = source[i:end]
            toks.append(_word_token(word, span(i, end - i)))
        elif ch == "%":
            end = source.find("%", i + 1)
            nl = source.find("\n", i + 1)
            if end < 0 or (0 <= nl < end):
                raise LexError("unterminated %op%", span(i, 1))
            end += 1
            toks.append(Token(OPERATOR, source[i:end], span(i, end - i)))
        elif ch in _DELIMS:
            end = i + 1
            toks.append(Token(DELIM, ch, span(i, 1)))
        else:
            for op in _OPERATORS:
                if source.startswith(op, i):
                    end = i + len(op)
                    kind = DELIM if op == "[[" else OPERATOR
                    toks.append(Token(kind, op, span(i, len(op))))
                    break
            else:
                raise LexError(f"unexpected character {ch!r}", span(i, 1))
        col += end - start
        i = end
    toks.append(Token(EOF, "", Span(line, col, 0, n)))
    return toks


def _number_token(text: str, sp: Span) -> Token:
    body = text
    if body.endswith("L"):
        body = body[:-1]
        if body.lower().startswith("0x"):
            val = int(body, 16)
        else:
            f = float(body)
            if f != int(f):
                raise LexError(f"integer literal {text!r} is not integral", sp)
            val = int(f)
        return Token(NUMBER, text, sp, val, integer=True)
    if body.endswith("i"):
        return Token(NUMBER, text, sp, complex(0, float(body[:-1])))
    if body.lower().startswith("0x"):
        return Token(NUMBER, text, sp, float(int(body, 16)))
    return Token(NUMBER, text, sp, float(body))


def _word_token(word: str, sp: Span) -> Token:
    if word in KEYWORDS:
        return Token(KEYWORD, word, sp)
    if word in ("TRUE", "FALSE"):
        return Token(LOGICAL, word, sp, word == "TRUE")
    if word in NA_WORDS:
        return Token(NA, word, sp)
    if word == "NULL":
        return Token(NULL, word, sp)
    if word == "Inf":
        return Token(NUMBER, word, sp, float("inf"))
    if word == "NaN":
        return Token(NUMBER, word, sp, float("nan"))
    return Token(IDENT, word, sp, word)


def _scan_string(source, i, span):
    quote = source[i]
    j = i + 1
    out = []
    n = len(source)
    while j < n:
        c = source[j]
        if c == quote:
            text = source[i:j + 1]
            return text, "".join(out), j + 1, text.count("\n")
        if c == "\\":
            if j + 1 >= n:
                break
            e = source[j + 1]
            out.append(_ESCAPES.get(e, e))
            j += 2
            continue
        out.append(c)
        j += 1
    raise LexError("unterminated string", span(i, n - i))
