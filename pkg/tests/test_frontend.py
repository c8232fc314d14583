import pytest

from rosa import corpus
from rosa.frontend import (ParseError, UnsupportedConstruct, deparse, from_json, load_program, parse_source,
                           to_json)
from rosa.frontend import ast as A


@pytest.mark.parametrize("name", corpus.names())
def test_deparse_round_trip(name):
    root = parse_source(corpus.source(name))
    again = parse_source(deparse(root))
    assert again.shape() == root.shape()


@pytest.mark.parametrize("name", corpus.names())
def test_json_round_trip(name):
    root = parse_source(corpus.source(name))
    assert from_json(to_json(root)).shape() == root.shape()


def test_calls_keep_operator_in_head_position():
    root = parse_source("a + b * c")
    e = root.children[0]
    assert e.kind == A.CALL and e.call_name() == "+"
    assert e.children[2].call_name() == "*"


def test_if_expression_becomes_statement_form():
    p = load_program("d <- if (u > .5) 1 else -1")
    (s,) = p.statements
    assert s.kind == A.IF
    then, other = s.children[1], s.children[2]
    assert A.assign_target_name(then.children[0]) == "d"
    assert A.assign_target_name(other.children[0]) == "d"


def test_every_if_gets_an_else_block():
    p = load_program("if (x) y <- 1")
    s = p.statements[0]
    assert len(s.children) == 3 and s.children[2].kind == A.BLOCK and not s.children[2].children


def test_system_time_is_bracketed_by_timer_hints():
    p = load_program("system.time(z <- 1)")
    kinds = [s.children[1].value for s in p.statements if A.is_hint(s)]
    assert kinds == ["timer_start", "timer_stop"]


def test_function_table_and_loop_annotations():
    p = load_program("f <- function(x) { for (i in 1:3) x <- x + i; x }\nf(1)")
    assert list(p.functions) == ["f"]
    assert p.params("f") == ["x"]
    (info,) = p.loops.values()
    assert info.kind == "for" and info.var == "i"


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as e:
        parse_source("x <- ")
    assert "1:" in str(e.value)


@pytest.mark.parametrize("src", ["repeat { }", "x <- base::sum(1)"])
def test_unsupported_constructs(src):
    with pytest.raises(UnsupportedConstruct):
        load_program(src)


def test_numeric_literal_text_is_kept():
    root = parse_source("n <- 1e6\nk <- 40L")
    assert root.children[0].children[1].text == "1e6"
    assert root.children[1].children[1].kind == A.NUM_INT


def test_overrides_replace_only_top_level_literals():
    p = corpus.load_source("n <- 1e9\nf <- function() { n <- 5 }\nm <- n", {"n": 1e6})
    assert p.statements[0].children[1].value == 1e6
    inner = p.functions["f"].children[-1].children[0]
    assert inner.children[1].value == 5
