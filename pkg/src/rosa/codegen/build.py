"""Compile an emitted unit and run the resulting binary."""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

from .emit import EmitUnit

_TIME_LINE = re.compile(r"^system\.time (\S+) ([0-9.eE+-]+)$")


class BuildError(Exception):
    pass


@dataclass
class NativeRun:
    stdout: str
    stderr: str
    returncode: int
    timings: Dict[str, float] = field(default_factory=dict)
    compile_seconds: float = 0.0
    elapsed: float = 0.0


def compiler() -> str:
    cc = os.environ.get("ROSA_CC") or shutil.which("gcc") or shutil.which("cc")
    if not cc:
        raise BuildError("no C compiler found; set ROSA_CC")
    return cc


def write_unit(unit: EmitUnit, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in unit.files().items():
        (d / name).write_text(text)
    return d


def compile_unit(unit: EmitUnit, directory) -> Path:
    d = write_unit(unit, directory)
    cmd = list(unit.build)
    cmd[0] = compiler()
    res = subprocess.run(cmd, cwd=d, capture_output=True, text=True)
    if res.returncode != 0:
        raise BuildError(f"compilation failed:\n{res.stderr}")
    return d / cmd[cmd.index("-o") + 1]


def run_binary(exe: Path, seed: int = 1, overrides: Optional[Dict[str, float]] = None,
               timeout: Optional[float] = None) -> NativeRun:
    args = [str(exe), str(int(seed))]
    args += [f"{k}={_num(v)}" for k, v in (overrides or {}).items()]
    t0 = time.perf_counter()
    res = subprocess.run(args, capture_output=True, text=True, timeout=timeout)
    elapsed = time.perf_counter() - t0
    timings = {}
    for line in res.stderr.splitlines():
        m = _TIME_LINE.match(line.strip())
        if m:
            timings[m.group(1)] = float(m.group(2))
    return NativeRun(res.stdout, res.stderr, res.returncode, timings, elapsed=elapsed)


def _num(v) -> str:
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def build_and_run(unit: EmitUnit, seed: int = 1, overrides: Optional[Dict[str, float]] = None,
                  workdir=None, timeout: Optional[float] = None) -> NativeRun:
    """Compile ``unit`` (in a temporary directory unless ``workdir``) and run it once."""
    if workdir is None:
        with tempfile.TemporaryDirectory(prefix="rosa-") as tmp:
            return build_and_run(unit, seed, overrides, tmp, timeout)
    t0 = time.perf_counter()
    exe = compile_unit(unit, workdir)
    compile_s = time.perf_counter() - t0
    run = run_binary(exe, seed, overrides, timeout)
    run.compile_seconds = compile_s
    return run
