"""Runtime values and allocation accounting.

Length-one atomic values without NA are plain Python scalars (``bool``,
``int``, ``float``, ``complex``, ``str``); ``None`` is NULL.  Everything
else is an :class:`RValue` holding a Python list payload where ``None``
marks NA.
"""

from __future__ import annotations

import math
from typing import Optional

ELEM_BYTES = {"logical": 4, "integer": 4, "double": 8, "complex": 16, "string": 8, "list": 8}
ORDER = ("logical", "integer", "double", "complex", "string", "list")
RANKS = {t: i for i, t in enumerate(ORDER)}
INT_MAX = 2147483647
PY_TYPE = {bool: "logical", int: "integer", float: "double", complex: "complex", str: "string"}


class RRuntimeError(Exception):
    """Evaluation failure; ``span`` points at the offending statement."""

    def __init__(self, msg: str, span=None):
        super().__init__(msg)
        self.span = span

    def __str__(self):
        base = super().__str__()
        return f"{base} (at {self.span})" if self.span is not None else base


class UnsupportedBuiltin(RRuntimeError):
    pass


class LengthError(RRuntimeError):
    pass


class AllocMetrics:
    __slots__ = ("live", "peak", "total", "freed", "copies", "in_place_reuses",
                 "dead_reuses", "elided_writes", "conversions")

    def __init__(self):
        self.live = self.peak = self.total = self.freed = 0
        self.copies = self.in_place_reuses = self.dead_reuses = self.elided_writes = 0
        self.conversions = 0

    def report(self, steady: Optional[int] = None) -> dict:
        return {
            "total_bytes": self.total,
            "peak_bytes": self.peak,
            "steady_bytes": self.live if steady is None else steady,
            "freed_bytes": self.freed,
            "copies": self.copies,
            "in_place_reuses": self.in_place_reuses,
            "dead_reuses": self.dead_reuses,
            "elided_writes": self.elided_writes,
            "conversions": self.conversions,
        }


class Alloc:
    """One payload buffer.  Bytes stay live until the last holder drops it."""

    __slots__ = ("nbytes", "m", "__weakref__")

    def __init__(self, nbytes: int, m: AllocMetrics):
        self.nbytes = nbytes
        self.m = m
        m.live += nbytes
        m.total += nbytes
        if m.live > m.peak:
            m.peak = m.live

    def __del__(self):
        m = self.m
        m.live -= self.nbytes
        m.freed += self.nbytes


_METRICS: list = [AllocMetrics()]


def current_metrics() -> AllocMetrics:
    return _METRICS[-1]


def push_metrics(m: AllocMetrics):
    _METRICS.append(m)


def pop_metrics():
    if len(_METRICS) > 1:
        _METRICS.pop()


def payload_bytes(typ: str, data: list) -> int:
    if typ == "string":
        return sum(8 + (len(s.encode()) if s is not None else 0) for s in data)
    return ELEM_BYTES[typ] * len(data)


class RValue:
    __slots__ = ("type", "data", "dim", "names", "named", "refs", "acct", "orig_len")

    def __init__(self, typ: str, data: list, dim=None, names=None, acct=None):
        self.type = typ
        self.data = data
        self.dim = dim
        self.names = names
        self.named = 0
        self.refs = 0
        self.orig_len = len(data)
        if acct is None and (len(data) >= 2 or dim is not None):
            acct = Alloc(payload_bytes(typ, data), current_metrics())
        self.acct = acct

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        return f"RValue({self.type}, {self.data[:6]}{'...' if len(self.data) > 6 else ''}, dim={self.dim})"

    def share(self, data: list, typ: Optional[str] = None, dim="same") -> "RValue":
        """A fresh value that reuses this value's buffer (in-place result)."""
        v = RValue.__new__(RValue)
        v.type = typ or self.type
        v.data = data
        v.dim = self.dim if dim == "same" else dim
        v.names = None
        v.named = 0
        v.refs = 0
        v.orig_len = self.orig_len
        v.acct = self.acct
        return v


class Closure:
    __slots__ = ("name", "params", "defaults", "body", "env", "compiled")

    def __init__(self, name, params, defaults, body, env):
        self.name = name
        self.params = params
        self.defaults = defaults
        self.body = body
        self.env = env
        self.compiled = None

    def __repr__(self):
        return f"<function {self.name}>"


# -- inspection ------------------------------------------------------------------

def type_of(v) -> str:
    if v is None:
        return "NULL"
    t = PY_TYPE.get(type(v))
    if t is not None:
        return t
    if type(v) is RValue:
        return v.type
    if type(v) is Closure:
        return "closure"
    raise RRuntimeError(f"unknown value {v!r}")


def length(v) -> int:
    if v is None:
        return 0
    if type(v) is RValue:
        return len(v.data)
    return 1


def as_list(v) -> list:
    """Element list view of an atomic value (no copy for RValue)."""
    if type(v) is RValue:
        return v.data
    if v is None:
        return []
    return [v]


def make(typ: str, data: list, dim=None, names=None):
    """Box or unbox: length-one NA-free atomic vectors become scalars."""
    if dim is None and names is None and len(data) == 1 and typ != "list":
        x = data[0]
        if x is not None:
            return x
    return RValue(typ, data, dim, names)


def na(typ: str = "logical") -> RValue:
    return RValue(typ, [None])


def is_na_scalar(v) -> bool:
    return type(v) is RValue and len(v.data) == 1 and v.data[0] is None


# -- element coercion -----------------------------------------------------------------

def fmt_double(x: float) -> str:
    if x != x:
        return "NaN"
    if x == math.inf:
        return "Inf"
    if x == -math.inf:
        return "-Inf"
    s = "%.15g" % x
    return "0" if s == "-0" else s


def fmt_complex(z: complex) -> str:
    im = z.imag
    sign = "-" if im < 0 or (im == 0 and math.copysign(1, im) < 0) else "+"
    return f"{fmt_double(z.real)}{sign}{fmt_double(abs(im))}i"


def _to_logical(x, src):
    if x is None:
        return None
    if src == "string":
        return {"TRUE": True, "true": True, "T": True, "True": True,
                "FALSE": False, "false": False, "F": False, "False": False}.get(x)
    if src == "double" and x != x:
        return None
    return x != 0


def _to_integer(x, src):
    if x is None:
        return None
    if src == "string":
        try:
            x = float(x)
        except ValueError:
            return None
        src = "double"
    if src == "double":
        if x != x or abs(x) > INT_MAX:
            return None
        return int(x)
    if src == "complex":
        return int(x.real)
    return int(x)


def _to_double(x, src):
    if x is None:
        return None
    if src == "string":
        try:
            return float(x)
        except ValueError:
            return None
    if src == "complex":
        return x.real
    return float(x)


def _to_complex(x, src):
    if x is None:
        return None
    if src == "string":
        try:
            return complex(x.replace("i", "j"))
        except ValueError:
            return None
    return complex(x)


def elem_to_string(x, src) -> Optional[str]:
    if x is None:
        return None
    if src == "logical":
        return "TRUE" if x else "FALSE"
    if src == "integer":
        return str(x)
    if src == "double":
        return fmt_double(x)
    if src == "complex":
        return fmt_complex(x)
    return x


_CONVERT = {"logical": _to_logical, "integer": _to_integer, "double": _to_double,
            "complex": _to_complex, "string": elem_to_string}


def coerce_data(data: list, src: str, dst: str) -> list:
    if src == dst:
        return data
    if dst == "list":
        return list(data)
    if src == "list":
        raise RRuntimeError("cannot coerce a list to an atomic vector")
    if dst == "double" and src in ("integer", "logical"):
        return [None if x is None else float(x) for x in data]
    if dst == "string":
        return [elem_to_string(x, src) for x in data]
    f = _CONVERT[dst]
    return [f(x, src) for x in data]


def count_conversions(data: list, src: str) -> int:
    """Number of element conversions a to-string coercion performs."""
    if src == "string":
        return 0
    return sum(1 for x in data if x is not None)


def higher(a: str, b: str) -> str:
    return a if RANKS[a] >= RANKS[b] else b


def to_vector(v, typ: Optional[str] = None) -> RValue:
    """A (possibly shared) RValue view of ``v``; scalars are boxed fresh."""
    if type(v) is RValue:
        if typ is None or v.type == typ:
            return v
        return RValue(typ, coerce_data(v.data, v.type, typ), v.dim)
    if v is None:
        return RValue(typ or "logical", [])
    t = type_of(v)
    data = [v]
    if typ is not None and typ != t:
        data = coerce_data(data, t, typ)
        t = typ
    return RValue(t, data)


def scalar_value(v, what="argument"):
    """First element as a Python scalar (NA -> None)."""
    if type(v) is RValue:
        if not v.data:
            raise RRuntimeError(f"{what} of length zero")
        return v.data[0]
    if v is None:
        raise RRuntimeError(f"{what} is NULL")
    return v


def as_int_scalar(v, what="argument") -> int:
    x = scalar_value(v, what)
    if x is None:
        raise RRuntimeError(f"NA {what}")
    if type(x) is str:
        x = float(x)
    if type(x) is float:
        if x != x:
            raise RRuntimeError(f"NaN {what}")
        return int(x)
    return int(x)


def as_float_scalar(v, what="argument") -> float:
    x = scalar_value(v, what)
    if x is None:
        return math.nan
    return float(x.real if type(x) is complex else x)


def truthy(v, what="condition") -> bool:
    if v is True:
        return True
    if v is False:
        return False
    t = type(v)
    if t is int or t is float:
        if v != v:
            raise RRuntimeError(f"missing value where TRUE/FALSE needed in {what}")
        return v != 0
    if t is RValue:
        if not v.data:
            raise RRuntimeError(f"argument is of length zero in {what}")
        x = v.data[0]
        if x is None:
            raise RRuntimeError(f"missing value where TRUE/FALSE needed in {what}")
        return bool(_to_logical(x, v.type))
    if t is str:
        r = _to_logical(v, "string")
        if r is None:
            raise RRuntimeError(f"argument is not interpretable as logical in {what}")
        return r
    if v is None:
        raise RRuntimeError(f"argument is of length zero in {what}")
    raise RRuntimeError(f"invalid {what}")


def runtime_rtype(v) -> str:
    """Type-lattice rendering of a runtime value's class."""
    t = type_of(v)
    if t == "closure":
        return "function"
    if type(v) is RValue:
        if v.type == "list":
            return "list"
        if v.dim is not None:
            return f"matrix({v.type})"
        if len(v.data) != 1:
            return f"vector({v.type})" if v.data else f"vector({v.type})"
    return t


def values_equal(a, b) -> bool:
    """Bit-level equality for transparency checks (NaN equals NaN)."""
    if type(a) is not type(b):
        return False
    if type(a) is RValue:
        if a.type != b.type or a.dim != b.dim or a.names != b.names or len(a.data) != len(b.data):
            return False
        return all(_elem_eq(x, y) for x, y in zip(a.data, b.data))
    if type(a) is Closure:
        return a.name == b.name
    return _elem_eq(a, b)


def _elem_eq(x, y) -> bool:
    if type(x) is RValue or type(y) is RValue:
        return values_equal(x, y)
    if type(x) is float and type(y) is float:
        return x == y or (x != x and y != y)
    return type(x) is type(y) and x == y
