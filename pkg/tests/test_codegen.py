import re

import pytest

from conftest import needs_cc
from rosa import corpus
from rosa.codegen import BuildError, UntranslatableType, build_and_run, emit, lower
from rosa.codegen.build import compile_unit
from rosa.interp import run_program
from rosa.rtypes import infer

SEEDS = (1, 7, 123)


def unit(name):
    return emit(corpus.load(name, full_scale=True), name=name)


def decl(u, scope, name):
    for d in u.manifest["declarations"]:
        if d["scope"] == scope and d["name"] == name:
            return d
    raise KeyError((scope, name))


def test_binsearch_mid_is_integer():
    u = unit("binsearch")
    assert decl(u, "binsearch", "mid")["c_type"] == "integer"
    assert re.search(r"^\s+integer v_mid = 0;", u.main, re.M)


def test_rw2d_delta_assigned_on_both_branches():
    u = unit("rw2d")
    assert decl(u, "rw2d1", "delta")["c_type"] == "double"
    body = u.main[u.main.index("f_rw2d1(") :]
    assert body.count("v_delta = ") >= 2


def test_emission_is_deterministic():
    a, b = unit("euclidean"), unit("euclidean")
    assert a.main == b.main and a.manifest == b.manifest


@pytest.mark.parametrize("name", corpus.AUTOMATED)
def test_declared_types_follow_inference(name):
    p = corpus.load(name, full_scale=True)
    env = infer(p)
    u = emit(p, name=name)
    for d in u.manifest["declarations"]:
        t = env.type_of(d["scope"], d["name"])
        assert str(t) == d["type"], d
    # every C declaration in the source agrees with the manifest
    declared = {}
    for ctype, cname in re.findall(r"^\s*(?:static )?(\w+) (v_\w+) = ", u.main, re.M):
        declared.setdefault(cname, set()).add(ctype)
    ctypes = {d["c_name"]: set() for d in u.manifest["declarations"]}
    for d in u.manifest["declarations"]:
        ctypes[d["c_name"]].add(d["c_type"])
    for cname, ts in declared.items():
        assert ts <= ctypes[cname], cname


@pytest.mark.parametrize("name", corpus.AUTOMATED)
def test_identifiers_do_not_collide(name):
    u = unit(name)
    names = [d["c_name"] for d in u.manifest["declarations"]]
    assert all(n.startswith("v_") and "%" not in n for n in names)
    # user symbols never shadow runtime helpers
    assert not re.search(r"\b(?:integer|double|vec_\w+) rt_\w+ =", u.main)


def test_odd_names_are_mangled():
    lp = lower(corpus.load_source("x.y <- 2\nprint(x.y)"))
    assert lp.decls[0].cname.startswith("v_x_")


@pytest.mark.parametrize("name", ["ugt", "kmeans"])
def test_untranslatable_programs_list_variables(name):
    with pytest.raises(UntranslatableType) as e:
        lower(corpus.load(name, full_scale=True))
    assert e.value.variables


def test_ugt_names_string_variable():
    with pytest.raises(UntranslatableType) as e:
        lower(corpus.load("ugt", full_scale=True))
    assert any(v[1] == "geno.c" and v[2] == "vector(string)" for v in e.value.variables)


def test_manifest_lists_knobs_and_timers():
    m = unit("euclidean").manifest
    assert {k["name"] for k in m["knobs"]} >= {"nn"} or m["knobs"]
    assert m["timers"]
    assert m["build"]


@needs_cc
def test_broken_unit_raises(tmp_path):
    u = unit("exps")
    u.main = u.main.replace("int main", "int main int")
    with pytest.raises(BuildError):
        compile_unit(u, tmp_path)


@needs_cc
@pytest.mark.parametrize("name", corpus.AUTOMATED)
def test_compiled_output_matches_interpreter(name, tmp_path):
    u = unit(name)
    ov = corpus.default_overrides(name)
    exe = compile_unit(u, tmp_path)
    from rosa.codegen import run_binary
    for seed in SEEDS:
        ref = run_program(corpus.load(name), seed=seed)
        nat = run_binary(exe, seed, ov)
        assert nat.returncode == 0, nat.stderr
        assert nat.stdout == ref.output, (name, seed)
        assert set(nat.timings) == set(ref.timings)


@needs_cc
@pytest.mark.parametrize("name", ["cow", "simple_arith", "simple_vec", "scalar_acc"])
def test_extra_programs_translate(name, tmp_path):
    ov = corpus.default_overrides(name)
    r = build_and_run(unit(name), 3, ov, workdir=tmp_path)
    assert r.stdout == run_program(corpus.load(name), seed=3).output
