"""Lexing, parsing, printing and normalization of the supported R subset."""

from .ast import SNode, Span
from .lexer import LexError, Token, tokenize
from .normalize import LoopInfo, NormalizedProgram, normalize
from .parser import ParseError, UnsupportedConstruct, parse, parse_source
from .printer import deparse, dump_json, dump_tree, from_json, to_json


def load_program(source: str) -> NormalizedProgram:
    """Parse and normalize R source text."""
    return normalize(parse_source(source))


__all__ = [
    "SNode", "Span", "LexError", "Token", "tokenize", "LoopInfo", "NormalizedProgram",
    "normalize", "ParseError", "UnsupportedConstruct", "parse", "parse_source", "deparse",
    "dump_json", "dump_tree", "from_json", "to_json", "load_program",
]
