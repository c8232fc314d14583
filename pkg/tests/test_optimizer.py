import pytest

from rosa import corpus
from rosa.frontend import deparse, load_program
from rosa.frontend import ast as A
from rosa.interp import run_program
from rosa.optimizer import StaleRewrite, optimize, strength_reduce_advise, analyze


def test_simple_vec_is_vectorized():
    p = corpus.load("simple_vec")
    res = optimize(p, ["vectorize"])
    assert [r.kind for r in res.rewrites if r.id in res.applied] == ["vectorize"]
    top = [deparse(s).strip() for s in res.program.statements]
    assert "z <- x + y" in top
    assert not any(n.kind == A.FOR for n in res.program.root.walk())
    assert run_program(res.program).output == run_program(p).output


def test_scalar_accumulation_is_skipped():
    res = optimize(corpus.load("scalar_acc"), ["vectorize"])
    assert [r for r in res.rewrites if r.kind == "vectorize"] == []
    assert len(res.skips) == 1 and res.skips[0].kind == "vectorize"


def test_vectorize_requires_matching_allocation():
    p = load_program("n <- 10\nm <- 5\nx <- runif(n)\nz <- numeric(m)\nfor (i in 1:m) z[i] <- x[i] * 2\nprint(z)")
    res = optimize(p, ["vectorize"])
    assert not res.applied


def test_hoisting_moves_invariant_out():
    src = "f <- function(a, n) {\n s <- 0\n for (i in 1:n) {\n k <- a * 2\n s <- s + k\n }\n s\n}\nprint(f(3, 4))"
    p = load_program(src)
    res = optimize(p, ["hoist"])
    assert any(r.kind == "hoist" for r in res.rewrites)
    assert run_program(res.program).output == run_program(p).output == "[1] 24\n"


def test_hoisting_blocked_when_live_after_loop():
    src = "a <- 2\nfor (i in 1:3) { k <- a * 2 }\nprint(k)"
    res = optimize(load_program(src), ["hoist"])
    assert not [r for r in res.rewrites if r.kind == "hoist" and not r.advisory]


def test_ugt_advisories():
    ids = {r.id for r in strength_reduce_advise(analyze(corpus.load("ugt")))}
    assert {"sr1-int", "sr1-str"} <= ids


def test_applying_string_literals_removes_conversions():
    p = corpus.load("ugt")
    base = run_program(p, seed=2)
    res = optimize(p, [], apply_sr=["sr1-str"])
    opt = run_program(res.program, seed=2)
    assert base.metrics["conversions"] > 0
    assert opt.metrics["conversions"] == 0
    assert opt.output == base.output


def test_unknown_advisory_is_stale():
    with pytest.raises(StaleRewrite):
        optimize(corpus.load("ugt"), [], apply_sr=["sr9-str"])


def test_empty_pass_list_is_identity():
    p = corpus.load("simple_vec")
    res = optimize(p, [])
    assert not res.applied
    assert res.program.root.shape() == p.root.shape()


def test_space_reuse_annotations_mark_dead_operands():
    res = optimize(corpus.load("simple_arith"), ["space-reuse"])
    dead = set().union(*(a.dead_after for a in res.annotations.values()))
    assert {"x", "y"} <= dead


def test_runif_advisory_in_rw2d():
    res = optimize(corpus.load("rw2d"), ["vectorize"])
    adv = [r for r in res.rewrites if r.advisory and r.kind == "vectorize"]
    assert adv and "runif" in adv[0].description


def test_rewrite_json_is_serializable():
    import json
    res = optimize(corpus.load("simple_vec"))
    json.dumps(res.to_json())
