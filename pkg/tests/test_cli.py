import json
import subprocess
import sys

import jsonschema
import pytest

from conftest import needs_cc
from rosa import cli, corpus
from rosa.cli import main


def report(capsys, argv, stream="out"):
    code = main(argv + ["--report", "json"])
    cap = capsys.readouterr()
    text = cap.out if stream == "out" else cap.err
    # stderr may carry timer lines ahead of the report
    rep = json.loads(text[text.index("{\n"):])
    jsonschema.validate(rep, cli.schema(argv[0]))
    return code, rep


@pytest.mark.parametrize("name", corpus.names())
def test_analyze_reports_validate(name, capsys):
    code, rep = report(capsys, ["analyze", name])
    assert code == 0 and rep["command"][0] == "analyze"


@pytest.mark.parametrize("name", [n for n in corpus.names() if n != "kmeans"])
def test_run_reports_validate(name, capsys):
    code, rep = report(capsys, ["run", name], stream="err")
    assert code == 0
    assert rep["metrics"]["peak_bytes"] >= 0


def test_analyze_text_and_function_filter(capsys):
    assert main(["analyze", "euclidean", "--function", "dist"]) == 0
    out = capsys.readouterr().out
    assert "dist" in out and "27" in out


def test_analyze_unknown_function(capsys):
    assert main(["analyze", "euclidean", "--function", "nope"]) == cli.EXIT_USAGE


def test_optimize_writes_rewritten_file(tmp_path, capsys):
    out = tmp_path / "v.R"
    code, rep = report(capsys, ["optimize", "simple_vec", "-o", str(out)])
    assert code == 0
    text = out.read_text()
    assert "z <- x + y" in text and "for (" not in text


def test_optimize_empty_passes_copies_source(tmp_path, capsys):
    src = tmp_path / "a.R"
    src.write_text("x <- 1\nprint(x)\n")
    out = tmp_path / "b.R"
    assert main(["optimize", str(src), "--passes", "", "-o", str(out)]) == 0
    assert out.read_text() == src.read_text()


def test_optimize_stale_advisory(capsys):
    assert main(["optimize", "ugt", "--apply-sr", "sr7-str", "-o", "/dev/null"]) != 0


def test_run_streams_output_and_alloc_report(capsys):
    assert main(["run", "exps", "--alloc-report", "json"]) == 0
    cap = capsys.readouterr()
    assert cap.out.startswith("[1]")
    assert "peak_bytes" in json.loads(cap.err.strip().splitlines()[-1])


def test_run_set_overrides(capsys):
    main(["run", "exps", "--set", "nreps=3"])
    assert capsys.readouterr().out


def test_parse_error_exit(tmp_path, capsys):
    f = tmp_path / "bad.R"
    f.write_text("x <- (1 + \n")
    assert main(["run", str(f)]) == cli.EXIT_PARSE


def test_unsupported_builtin_exit(capsys):
    assert main(["run", "kmeans"]) == cli.EXIT_UNSUPPORTED


def test_untranslatable_exit(tmp_path, capsys):
    assert main(["transpile", "ugt", "--outdir", str(tmp_path / "u")]) == cli.EXIT_UNTRANSLATABLE
    assert "geno.c" in capsys.readouterr().err


def test_runtime_error_exit(tmp_path, capsys):
    f = tmp_path / "e.R"
    f.write_text("print(y)\n")
    assert main(["run", str(f)]) == cli.EXIT_RUNTIME


def test_bad_set_is_usage_error(capsys):
    assert main(["run", "exps", "--set", "oops"]) == cli.EXIT_USAGE


def test_diff_mismatch_exit(monkeypatch, capsys):
    real = cli.run_program

    def skewed(prog, annotations=None, **kw):
        r = real(prog, annotations=annotations, **kw)
        if annotations is not None:
            r.output += "extra\n"
        return r

    monkeypatch.setattr(cli, "run_program", skewed)
    code, rep = report(capsys, ["diff", "simple_arith", "--modes", "interpret,annotated"])
    assert code == cli.EXIT_MISMATCH
    assert rep["mismatch"] == ["annotated"] and not rep["modes"]


def test_diff_memory_savings(capsys):
    code, rep = report(capsys, ["diff", "simple_arith", "--modes", "interpret,annotated"])
    assert code == 0
    ann = rep["modes"]["annotated"]
    assert ann["steady_saving"] == pytest.approx(1 / 3, abs=1e-3)
    assert ann["peak_saving"] == pytest.approx(0.5)


def test_transpile_writes_unit(tmp_path, capsys):
    d = tmp_path / "exps_c"
    code, rep = report(capsys, ["transpile", "exps", "--outdir", str(d)])
    assert code == 0
    assert {"exps.c", "rosa_rt.c", "rosa_rt.h", "manifest.json"} <= {p.name for p in d.iterdir()}


@needs_cc
def test_transpile_build_and_run(tmp_path, capsys):
    d = tmp_path / "bs"
    assert main(["transpile", "binsearch", "--outdir", str(d), "--run", "--seed", "7"]) == 0
    out = capsys.readouterr().out
    from rosa.interp import run_program
    assert out == run_program(corpus.load("binsearch"), seed=7).output
    assert (d / "binsearch").exists()


@needs_cc
def test_diff_all_modes(capsys):
    code, rep = report(capsys, ["diff", "simple_vec"])
    assert code == 0 and rep["equivalent"]
    assert set(rep["modes"]) == {"interpret", "annotated", "optimized", "compiled"}


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "rosa.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("rosa ")
