import json

from conftest import renumber

from rosa import corpus
from rosa.cfg import COPY, SUBASSIGN, build_cfg, cfg_stats, dump_cfg
from rosa.frontend import load_program


def dist_cfg():
    return build_cfg(corpus.load("euclidean"))["dist"]


def test_dist_size_and_nesting():
    st = cfg_stats(dist_cfg())
    assert st["nodes"] == 27
    assert st["loops"] == 3
    assert st["max_loop_depth"] == 3


def test_dist_matches_golden_dump():
    golden = (corpus.ROOT / "euclidean" / "golden" / "dist.cfg.txt").read_text()
    assert renumber(dump_cfg(dist_cfg())) == golden


def test_empty_program():
    g = build_cfg(load_program(""))
    st = cfg_stats(g["<top>"])
    assert st["nodes"] == 2 and st["loops"] == 0


def test_statement_classification():
    g = build_cfg(load_program("x <- 1\ny <- x\ny[2] <- 3"))["<top>"]
    kinds = [s.kind for s in g.statements()]
    assert kinds[1] == COPY and kinds[2] == SUBASSIGN
    assert "y" in g.statements()[2].uses


def test_while_and_break_edges():
    g = build_cfg(load_program("i <- 0\nwhile (i < 3) { i <- i + 1\n if (i == 2) break }\nprint(i)"))["<top>"]
    st = cfg_stats(g)
    assert st["loops"] == 1 and st["max_loop_depth"] == 1
    succ = g.stmt_succs()
    assert all(succ[s.sid] for s in g.statements())


def test_dump_formats():
    g = dist_cfg()
    data = json.loads(dump_cfg(g, "json"))
    assert data["function"] == "dist" and len(data["loops"]) == 3
    assert dump_cfg(g, "dot").startswith("digraph")


def test_function_cfgs_are_separate():
    cfgs = build_cfg(corpus.load("binsearch"))
    assert set(cfgs) == {"<top>", "binsearch"}
