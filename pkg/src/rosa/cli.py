"""``rosa`` command line: analyze, optimize, transpile, run and diff R programs.

Inputs are file paths or names of bundled corpus programs.  Corpus programs
run at their desk-scale sizes unless ``--full-scale`` is given.

Exit codes: 0 ok, 1 usage or I/O, 2 parse error, 3 unsupported construct or
builtin, 4 untranslatable types, 5 runtime or build error, 6 modes disagree.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional

import jsonschema

from . import __version__, corpus
from . import codegen
from . import dataflow as D
from .cfg import TOP, build_cfg, cfg_stats
from .frontend import LexError, ParseError, UnsupportedConstruct, deparse
from .interp import RRuntimeError, UnsupportedBuiltin, run_program
from .optimizer import PASSES, StaleRewrite, optimize, space_reuse_annotations
from .rtypes import dump_types, infer

EXIT_USAGE, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_UNTRANSLATABLE, EXIT_RUNTIME, EXIT_MISMATCH = 1, 2, 3, 4, 5, 6


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


@dataclass
class Source:
    label: str
    text: str
    overrides: Dict[str, float]
    is_corpus: bool

    def load(self, full: bool = False):
        """Parse with overrides applied (or as written when ``full``)."""
        try:
            return corpus.load_source(self.text, None if full else self.overrides)
        except (ParseError, LexError) as e:
            raise CliError(EXIT_PARSE, f"parse error: {e}")
        except UnsupportedConstruct as e:
            raise CliError(EXIT_UNSUPPORTED, f"unsupported construct: {e}")


def resolve(arg: str, full_scale: bool, sets: Dict[str, float]) -> Source:
    p = Path(arg)
    if p.is_file():
        return Source(p.stem, p.read_text(), dict(sets), False)
    if arg in corpus.names():
        ov = {} if full_scale else corpus.default_overrides(arg)
        ov.update(sets)
        return Source(arg, corpus.source(arg), ov, True)
    raise CliError(EXIT_USAGE, f"no such file or corpus program: {arg}")


def _parse_set(items) -> Dict[str, float]:
    out = {}
    for it in items or ():
        name, eq, val = it.partition("=")
        if not eq or not name:
            raise CliError(EXIT_USAGE, f"--set expects name=value, got {it!r}")
        try:
            out[name] = float(val)
        except ValueError:
            raise CliError(EXIT_USAGE, f"--set value for {name} is not a number")
    return out


# -- reports -----------------------------------------------------------------------

def schema(command: str) -> dict:
    return json.loads((resources.files(__package__) / "schemas" / f"{command}.json").read_text())


def emit_report(args, report: dict, text: str, stream=None):
    stream = stream or sys.stdout
    if args.report == "json":
        report = {"command": sys_argv_echo(args), "tool": "rosa", "version": __version__, **report}
        jsonschema.validate(report, schema(args.command))
        stream.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
    elif text:
        stream.write(text)


def sys_argv_echo(args) -> List[str]:
    return list(getattr(args, "argv", None) or [args.command, args.input])


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000.0, 3)


# -- analyze -----------------------------------------------------------------------

def cmd_analyze(args) -> int:
    src = resolve(args.input, args.full_scale, _parse_set(args.set))
    prog = src.load()
    t0 = time.perf_counter()
    cfgs = build_cfg(prog)
    cfg_ms = _ms(t0)
    t1 = time.perf_counter()
    functions = {}
    all_facts = {}
    for scope, g in cfgs.items():
        if args.function and scope != args.function:
            continue
        facts = all_facts[scope] = D.analyze_cfg(g, tuple(prog.functions))
        functions[scope] = {
            "cfg": cfg_stats(g),
            "live": D.report(facts["live"]),
            "alias": D.report(facts["alias"]),
            "reach": D.report(facts["reach"]),
            "invariants": {str(k): v for k, v in sorted(facts["invariants"].items())},
        }
    flow_ms = _ms(t1)
    t2 = time.perf_counter()
    env = infer(prog)
    types_ms = _ms(t2)
    if args.function and args.function not in functions:
        raise CliError(EXIT_USAGE, f"no function named {args.function}")
    scopes = [args.function] if args.function else sorted(env.vars, key=lambda f: (f != TOP, f))
    types = {f: env.table(f) for f in scopes if f in env.vars}
    report = {
        "program": src.label,
        "functions": functions,
        "types": types,
        "timings_ms": {"cfg": cfg_ms, "dataflow": flow_ms, "types": types_ms},
    }
    lines = []
    for scope, f in functions.items():
        st = f["cfg"]
        lines.append(f"== {scope}: {st['nodes']} nodes, {st['blocks']} blocks, {st['loops']} loops, "
                     f"max loop depth {st['max_loop_depth']}")
        facts = all_facts[scope]
        for key in ("live", "alias", "reach"):
            lines.append(f"-- {key}")
            lines.append(D.report_text(facts[key]).rstrip())
    lines.append("== types")
    lines.append(dump_types(env).rstrip() if not args.function else
                 "\n".join(f"  {k}  {v}" for k, v in types.get(args.function, {}).items()))
    lines.append(f"== timings: cfg {cfg_ms} ms, dataflow {flow_ms} ms, types {types_ms} ms")
    emit_report(args, report, "\n".join(lines) + "\n")
    return 0


# -- optimize ----------------------------------------------------------------------

def _passes(arg: Optional[str]) -> List[str]:
    if arg is None:
        return list(PASSES)
    out = [p.strip() for p in arg.split(",") if p.strip()]
    for p in out:
        if p not in PASSES:
            raise CliError(EXIT_USAGE, f"unknown pass {p!r}; choose from {', '.join(PASSES)}")
    return out


def cmd_optimize(args) -> int:
    src = resolve(args.input, args.full_scale, _parse_set(args.set))
    prog = src.load()
    passes = _passes(args.passes)
    try:
        res = optimize(prog, passes, aggressive=args.aggressive, apply_sr=args.apply_sr or ())
    except StaleRewrite as e:
        raise CliError(EXIT_USAGE, str(e))
    out = Path(args.output) if args.output else Path(f"{src.label}.opt.R")
    text = deparse(res.program.root) if passes or res.applied else src.text
    out.write_text(text if text.endswith("\n") else text + "\n")
    rep = res.to_json()
    report = {"program": src.label, "passes": passes, "output": str(out), **rep}
    lines = [f"passes: {', '.join(passes) or '(none)'}"]
    fired = [r for r in res.rewrites if r.id in res.applied]
    if not res.rewrites:
        lines.append("no rewrites")
    annotations = [r for r in res.rewrites if r.kind == "annotate"]
    for r in res.rewrites:
        if r.kind == "annotate":
            continue
        tag = "applied" if r.id in res.applied else ("advisory" if r.advisory else "reported")
        lines.append(f"[{r.id}] {r.kind} ({tag}) in {r.scope}: {r.description}")
        if r.replacement:
            lines.append("    replacement: " + "; ".join(deparse(n) for n in r.replacement))
        if r.justification:
            lines.append(f"    why: {json.dumps(r.justification, sort_keys=True, default=str)}")
    if annotations:
        lines.append(f"{len(annotations)} statement(s) carry space-reuse annotations")
    for s in res.skips:
        lines.append(f"[skip] {s.kind} in {s.scope}: {s.text}  ({s.reason})")
    lines.append(f"{len(fired)} rewrite(s) applied; wrote {out}")
    emit_report(args, report, "\n".join(lines) + "\n")
    return 0


# -- transpile ---------------------------------------------------------------------

def _emit(src: Source):
    prog = src.load(full=True)
    try:
        return codegen.emit(prog, src.label, codegen.build.compiler() if _has_cc() else "cc")
    except codegen.UntranslatableType as e:
        raise CliError(EXIT_UNTRANSLATABLE, f"untranslatable: {e}")
    except codegen.UnsupportedBuiltin as e:
        raise CliError(EXIT_UNSUPPORTED, f"unsupported by the C backend: {e}")


def _has_cc() -> bool:
    try:
        codegen.build.compiler()
        return True
    except codegen.BuildError:
        return False


def cmd_transpile(args) -> int:
    src = resolve(args.input, args.full_scale, _parse_set(args.set))
    unit = _emit(src)
    outdir = Path(args.outdir or f"{src.label}_c")
    codegen.write_unit(unit, outdir)
    report = {"program": src.label, "outdir": str(outdir), "files": sorted(unit.files()),
              "build_command": unit.build, "manifest": unit.manifest, "built": False}
    lines = [f"wrote {', '.join(sorted(unit.files()))} to {outdir}",
             f"build: (cd {outdir} && {' '.join(unit.build)})",
             f"usage: {unit.manifest['usage']}"]
    if args.build or args.run:
        t0 = time.perf_counter()
        try:
            exe = codegen.compile_unit(unit, outdir)
        except codegen.BuildError as e:
            raise CliError(EXIT_RUNTIME, str(e))
        report["built"] = True
        report["compile_seconds"] = round(time.perf_counter() - t0, 4)
        lines.append(f"built {exe} in {report['compile_seconds']} s")
        if args.run:
            run = codegen.run_binary(exe, args.seed, src.overrides)
            sys.stdout.write(run.stdout)
            sys.stderr.write(run.stderr)
            report["run"] = {"exit_code": run.returncode, "stdout": run.stdout, "timings": run.timings,
                             "elapsed": round(run.elapsed, 6)}
            if run.returncode != 0:
                emit_report(args, report, "\n".join(lines) + "\n", sys.stderr)
                return EXIT_RUNTIME
    emit_report(args, report, "\n".join(lines) + "\n", sys.stderr if args.run else None)
    return 0


# -- run ---------------------------------------------------------------------------

def _interpret(prog, seed: int, annotated: bool, stream=None):
    ann = space_reuse_annotations(prog) if annotated else None
    try:
        return run_program(prog, annotations=ann, seed=seed, stream=stream)
    except UnsupportedBuiltin as e:
        raise CliError(EXIT_UNSUPPORTED, f"Error: {e}")
    except RRuntimeError as e:
        raise CliError(EXIT_RUNTIME, f"Error: {e}")


def cmd_run(args) -> int:
    src = resolve(args.input, args.full_scale, _parse_set(args.set))
    prog = src.load()
    res = _interpret(prog, args.seed, args.annotated, stream=sys.stdout)
    sys.stdout.flush()
    for key, secs in res.timings.items():
        sys.stderr.write(f"system.time {key}: elapsed {secs:.6f} s\n")
    if args.alloc_report == "json":
        sys.stderr.write(json.dumps(res.metrics, sort_keys=True) + "\n")
    elif args.alloc_report == "text":
        for k, v in res.metrics.items():
            sys.stderr.write(f"{k}: {v}\n")
    report = {"program": src.label, "seed": args.seed, "annotated": bool(args.annotated),
              "output": res.output, "metrics": res.metrics, "timings": res.timings,
              "elapsed": round(res.elapsed, 6)}
    emit_report(args, report, "", sys.stderr)
    return 0


# -- diff --------------------------------------------------------------------------

MODES = ("interpret", "annotated", "optimized", "compiled")


def _measure(timings: Dict[str, float], elapsed: float) -> float:
    return sum(timings.values()) if timings else elapsed


def cmd_diff(args) -> int:
    src = resolve(args.input, args.full_scale, _parse_set(args.set))
    prog = src.load()
    wanted = [m for m in (args.modes.split(",") if args.modes else MODES) if m]
    for m in wanted:
        if m not in MODES:
            raise CliError(EXIT_USAGE, f"unknown mode {m!r}")
    results: Dict[str, dict] = {}
    skipped: Dict[str, str] = {}
    for mode in wanted:
        if mode in ("interpret", "annotated"):
            r = _interpret(prog, args.seed, mode == "annotated")
            results[mode] = {"output": r.output, "seconds": _measure(r.timings, r.elapsed), "metrics": r.metrics}
        elif mode == "optimized":
            opt = optimize(prog, ("vectorize", "hoist"))
            if not opt.applied:
                skipped[mode] = "no rewrites apply"
                continue
            r = _interpret(opt.program, args.seed, False)
            results[mode] = {"output": r.output, "seconds": _measure(r.timings, r.elapsed), "metrics": r.metrics}
        else:
            try:
                unit = _emit(src)
            except CliError as e:
                skipped[mode] = str(e)
                continue
            if not _has_cc():
                skipped[mode] = "no C compiler"
                continue
            try:
                run = codegen.build_and_run(unit, args.seed, src.overrides)
            except codegen.BuildError as e:
                raise CliError(EXIT_RUNTIME, str(e))
            if run.returncode != 0:
                raise CliError(EXIT_RUNTIME, f"compiled program failed: {run.stderr.strip()}")
            results[mode] = {"output": run.stdout, "seconds": _measure(run.timings, run.elapsed), "metrics": None}
    if not results:
        raise CliError(EXIT_USAGE, "no execution mode is available")
    base_name = next(iter(results))
    base = results[base_name]
    disagree = [m for m, r in results.items() if r["output"] != base["output"]]
    report = {"program": src.label, "seed": args.seed, "baseline": base_name, "skipped": skipped,
              "equivalent": not disagree, "modes": {}}
    if disagree:
        report["mismatch"] = disagree
        emit_report(args, report, f"outputs differ between {base_name} and {', '.join(disagree)}\n")
        return EXIT_MISMATCH
    lines = [f"all modes agree ({', '.join(results)}); baseline {base_name}"]
    for m, r in results.items():
        entry = {"seconds": round(r["seconds"], 6),
                 "speedup": round(base["seconds"] / r["seconds"], 3) if r["seconds"] > 0 else None}
        line = f"{m:10s} {r['seconds']:.6f} s  speedup {entry['speedup']}"
        if r["metrics"] is not None and base["metrics"] is not None:
            bp, bs = base["metrics"]["peak_bytes"], base["metrics"]["steady_bytes"]
            entry["peak_bytes"] = r["metrics"]["peak_bytes"]
            entry["steady_bytes"] = r["metrics"]["steady_bytes"]
            entry["peak_saving"] = round(1 - entry["peak_bytes"] / bp, 6) if bp else None
            entry["steady_saving"] = round(1 - entry["steady_bytes"] / bs, 6) if bs else None
            line += f"  peak {entry['peak_bytes']} B (saving {entry['peak_saving']})"
            line += f"  steady {entry['steady_bytes']} B (saving {entry['steady_saving']})"
        report["modes"][m] = entry
        lines.append(line)
    for m, why in skipped.items():
        lines.append(f"{m:10s} skipped: {why}")
    emit_report(args, report, "\n".join(lines) + "\n")
    return 0


# -- entry -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rosa", description="Analyze, optimize, interpret and compile R programs.")
    ap.add_argument("--version", action="version", version=f"rosa {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, report=True):
        p.add_argument("input", help="R source file or corpus program name")
        p.add_argument("--full-scale", action="store_true", help="ignore a corpus program's desk-scale sizes")
        p.add_argument("--set", action="append", metavar="NAME=VALUE",
                       help="override a top-level numeric assignment (repeatable)")
        if report:
            p.add_argument("--report", choices=("text", "json"), default="text")

    p = sub.add_parser("analyze", help="CFG, dataflow facts and types")
    common(p)
    p.add_argument("--function", help="restrict to one function (or <top>)")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("optimize", help="run optimization passes and write rewritten source")
    common(p)
    p.add_argument("--passes", help=f"comma-separated subset of {','.join(PASSES)} (empty for none)")
    p.add_argument("--aggressive", action="store_true", help="hoist despite liveness blockers")
    p.add_argument("--apply-sr", action="append", metavar="ID", help="apply a strength-reduction advisory")
    p.add_argument("-o", "--output", help="rewritten source path (default <name>.opt.R)")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("transpile", help="emit C source and runtime, optionally build and run")
    common(p)
    p.add_argument("--outdir", help="output directory (default <name>_c)")
    p.add_argument("--build", action="store_true", help="compile with the system C compiler")
    p.add_argument("--run", action="store_true", help="build, then run once")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(fn=cmd_transpile)

    p = sub.add_parser("run", help="interpret a program")
    common(p)
    p.add_argument("--annotated", action="store_true", help="enable space-reuse annotations")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--alloc-report", choices=("json", "text"), help="print allocation metrics on stderr")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("diff", help="compare execution modes for output, time and memory")
    common(p)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--modes", help=f"comma-separated subset of {','.join(MODES)}")
    p.set_defaults(fn=cmd_diff)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    try:
        return args.fn(args)
    except CliError as e:
        sys.stdout.flush()
        sys.stderr.write(f"rosa: {e}\n")
        return e.code
    except OSError as e:
        sys.stderr.write(f"rosa: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
