"""Bundled benchmark programs with desk-scale size knobs.

Each program lives in ``<name>/prog.R``; ``<name>/overrides.json`` maps
top-level variables to the smaller values used by default.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Optional

from ..frontend import ast as A
from ..frontend.normalize import NormalizedProgram, normalize
from ..frontend.parser import parse_source

ROOT = Path(__file__).resolve().parent

# Programs whose translation to C is automated.
AUTOMATED = ("binsearch", "rw2d", "euclidean", "oddcount", "exps", "dvts_a", "dvts_b")


def names() -> list:
    return sorted(p.name for p in ROOT.iterdir() if (p / "prog.R").is_file())


def path(name: str) -> Path:
    p = ROOT / name / "prog.R"
    if not p.is_file():
        raise KeyError(f"unknown corpus program '{name}'")
    return p


def source(name: str) -> str:
    return path(name).read_text()


def default_overrides(name: str) -> Dict[str, float]:
    f = ROOT / name / "overrides.json"
    return json.loads(f.read_text()) if f.is_file() else {}


def apply_overrides(root: A.SNode, overrides: Dict[str, float]) -> list:
    """Replace literal RHS of matching top-level assignments in place.

    Returns the names that were substituted.
    """
    done = []
    for s in root.children:
        if s.kind != A.ASSIGN or s.value == "[<-":
            continue
        t, rhs = s.children
        if t.kind != A.SYM or t.value not in overrides:
            continue
        if rhs.kind not in (A.NUM_INT, A.NUM_DBL):
            continue
        v = overrides[t.value]
        if rhs.kind == A.NUM_INT:
            rhs.value = int(v)
            rhs.text = f"{int(v)}L"
        else:
            rhs.value = float(v)
            rhs.text = repr(float(v)) if float(v) != int(v) else str(int(v))
        done.append(t.value)
    return done


def load_source(text: str, overrides: Optional[Dict[str, float]] = None) -> NormalizedProgram:
    root = parse_source(text)
    if overrides:
        apply_overrides(root, overrides)
    return normalize(root)


def load(name: str, full_scale: bool = False, overrides: Optional[Dict[str, float]] = None) -> NormalizedProgram:
    ov = {} if full_scale else default_overrides(name)
    ov.update(overrides or {})
    return load_source(source(name), ov)
