import pytest

from randcfg import random_cfg

from rosa import corpus, oracle
from rosa import dataflow as D
from rosa.cfg import build_cfg
from rosa.frontend import load_program

ANALYSES = {"live": D.live_spec, "alias": D.alias_spec, "reach": D.reach_spec}


def corpus_cfgs():
    for name in corpus.names():
        for scope, g in build_cfg(corpus.load(name)).items():
            yield f"{name}:{scope}", g


@pytest.mark.parametrize("label,g", list(corpus_cfgs()), ids=lambda x: x if isinstance(x, str) else "")
def test_fixed_point_residual_is_zero(label, g):
    for spec in ANALYSES.values():
        assert D.residual(g, D.solve(g, spec(g))) == 0


@pytest.mark.parametrize("label,g", list(corpus_cfgs()), ids=lambda x: x if isinstance(x, str) else "")
def test_order_independence(label, g):
    for spec in ANALYSES.values():
        ref = D.solve(g, spec(g))
        for order in D.random_orders(g, 5, seed=11):
            assert D.solve(g, spec(g), order=order).same_facts(ref)
            assert D.solve(g, spec(g), order=order, chaotic=True).same_facts(ref)


@pytest.mark.parametrize("seed", range(240))
def test_random_cfgs_match_path_oracle(seed):
    g = random_cfg(seed)
    assert len(g.blocks) <= 12
    live, alias = D.live_variables(g), D.alias_sets(g)
    lo, ao = oracle.live_out_oracle(g), oracle.alias_pairs_oracle(g)
    for s in g.statements():
        assert live.after(s.sid) == lo[s.sid]
        assert D.alias_pairs(alias.after(s.sid)) == ao[s.sid]
    for spec in ANALYSES.values():
        assert D.residual(g, D.solve(g, spec(g))) == 0


def test_copy_creates_alias_family():
    g = build_cfg(corpus.load("cow"))["<top>"]
    alias = D.alias_sets(g)
    copy = [s for s in g.statements() if s.text.startswith("y <- x")][0]
    assert D.canonical_family(alias.after(copy.sid)) == [["x", "y"]]
    write = [s for s in g.statements() if s.text.startswith("x[2]")][0]
    assert D.canonical_family(alias.after(write.sid)) == []


def test_liveness_of_straight_line_code():
    g = build_cfg(load_program("x <- 1\ny <- x + 1\nprint(y)"))["<top>"]
    live = D.live_variables(g)
    s1, s2, s3 = sorted(g.statements(), key=lambda s: s.sid)
    assert live.after(s1.sid) == {"x"}
    assert live.after(s2.sid) == {"y"}
    assert live.after(s3.sid) == frozenset()


def test_reaching_definitions_through_loop():
    g = build_cfg(load_program("t <- 0\nfor (i in 1:3) t <- t + i\nprint(t)"))["<top>"]
    reach = D.reaching_definitions(g)
    printer = next(s for s in g.statements() if s.text.startswith("print"))
    defs_of_t = {d for d in reach.before(printer.sid) if d[0] == "t"}
    assert len(defs_of_t) == 2


def test_loop_invariant_detection():
    src = "f <- function(a, n) { s <- 0\n for (i in 1:n) { k <- a * 2\n s <- s + k }\n s }\nf(1, 3)"
    p = load_program(src)
    g = build_cfg(p)["f"]
    facts = D.analyze_cfg(g, tuple(p.functions))
    hoistable = [g.stmt(sid).text for ids in facts["invariants"].values() for sid in ids]
    assert "k <- a * 2" in hoistable


def test_report_shape():
    g = build_cfg(corpus.load("euclidean"))["dist"]
    rep = D.report(D.live_variables(g))
    assert rep["direction"] == "backward" and rep["blocks"]
