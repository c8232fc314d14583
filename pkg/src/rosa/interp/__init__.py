"""Reference interpreter for the R subset."""

from .evaluator import Interpreter, RunResult, run_program
from .values import AllocMetrics, RRuntimeError, RValue, UnsupportedBuiltin, values_equal
from .printing import format_value

__all__ = ["Interpreter", "RunResult", "run_program", "AllocMetrics", "RRuntimeError", "RValue",
           "UnsupportedBuiltin", "values_equal", "format_value"]
