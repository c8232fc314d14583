"""Render a lowered program as a self-contained C translation unit."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional

from ..frontend.normalize import NormalizedProgram
from .lower import LoweredProgram, is_vec, lower

RUNTIME_FILES = ("rosa_rt.h", "rosa_rt.c")
CFLAGS = ("-O2", "-ffp-contract=off")
LIBS = ("-lm",)


@dataclass
class EmitUnit:
    name: str
    main: str
    runtime: Dict[str, str]
    build: List[str]
    manifest: dict = field(default_factory=dict)

    @property
    def source_name(self) -> str:
        return f"{self.name}.c"

    def files(self) -> Dict[str, str]:
        return {self.source_name: self.main, **self.runtime,
                "manifest.json": json.dumps(self.manifest, indent=2) + "\n"}


def runtime_sources() -> Dict[str, str]:
    pkg = resources.files(__package__) / "runtime"
    return {name: (pkg / name).read_text() for name in RUNTIME_FILES}


def _zero(kind: str) -> str:
    if is_vec(kind):
        return "NULL"
    if kind.startswith("rec_"):
        return "{0}"
    return "0"


def render(lp: LoweredProgram) -> str:
    out = ['#include "rosa_rt.h"', ""]
    for r in lp.records:
        body = " ".join(f"{k} {n};" for n, k in ((f, kk) for f, kk in r.fields))
        out.append(f"typedef struct {{ {body} }} {r.name};")
    if lp.records:
        out.append("")
    for cname, kind in lp.globals:
        out.append(f"static {kind} {cname} = {_zero(kind)};")
    for key in lp.timers:
        out.append(f"static double tm_{key} = 0;")
    out.append("")
    for fn in lp.functions:
        out.append(f"static {fn.ret} {fn.cname}({_params(fn)});")
    out.append("")
    for fn in lp.functions:
        out.append(f"static {fn.ret} {fn.cname}({_params(fn)}) {{")
        for cname, kind in fn.locals:
            out.append(f"    {kind} {cname} = {_zero(kind)};")
        out.extend(fn.body)
        out.append("}")
        out.append("")
    out.append("int main(int argc, char **argv) {")
    out.append("    rt_init(argc, argv);")
    out.extend(lp.main)
    out.append("    return 0;")
    out.append("}")
    return "\n".join(out) + "\n"


def _params(fn) -> str:
    return ", ".join(f"{k} {c}" for c, k in fn.params) or "void"


def build_command(cc: str = "cc", name: str = "prog") -> List[str]:
    return [cc, *CFLAGS, "-o", name, f"{name}.c", "rosa_rt.c", *LIBS]


def emit(program: NormalizedProgram, name: str = "prog", cc: str = "cc",
         lowered: Optional[LoweredProgram] = None) -> EmitUnit:
    lp = lowered or lower(program)
    name = re.sub(r"[^0-9A-Za-z_]", "_", name) or "prog"
    manifest = {
        "program": name,
        "usage": f"./{name} <seed> [name=value ...]",
        "knobs": [{"name": k.name, "type": k.ctype, "default": k.default} for k in lp.knobs],
        "timers": list(lp.timers),
        "features": lp.features,
        "declarations": [
            {"scope": d.scope, "name": d.name, "c_name": d.cname, "type": d.rtype, "c_type": d.ctype}
            for d in lp.decls
        ],
        "build": build_command(cc, name),
    }
    return EmitUnit(name, render(lp), runtime_sources(), build_command(cc, name), manifest)
