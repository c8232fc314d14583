"""C backend: lowering, emission and native builds."""

from .build import BuildError, NativeRun, build_and_run, compile_unit, run_binary, write_unit
from .emit import EmitUnit, emit
from .lower import LoweredProgram, UnsupportedBuiltin, UntranslatableType, lower

__all__ = ["BuildError", "EmitUnit", "LoweredProgram", "NativeRun", "UnsupportedBuiltin",
           "UntranslatableType", "build_and_run", "compile_unit", "emit", "lower", "run_binary",
           "write_unit"]
