"""Elementwise operators, math functions and indexing."""

from __future__ import annotations

import math
import operator
from itertools import repeat

from .values import (
    INT_MAX, RANKS, Alloc, LengthError, RRuntimeError, RValue, coerce_data, current_metrics,
    higher, make, payload_bytes, to_vector, type_of,
)

NUMERIC_PY = (bool, int, float)
NUM_TYPES = ("logical", "integer", "double", "complex")


def _fdiv(x, y):
    return x / y


def _fmod(x, y):
    return x % y


def _fintdiv(x, y):
    return float(math.floor(x / y))


def _iintdiv(x, y):
    return x // y


def _pow(x, y):
    return math.pow(x, y)


_FAST = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": _fdiv, "^": _pow}
_CMP = {"==": operator.eq, "!=": operator.ne, "<": operator.lt, ">": operator.gt,
        "<=": operator.le, ">=": operator.ge}
ARITH_OPS = ("+", "-", "*", "/", "^", "%%", "%/%")
COMPARE_OPS = tuple(_CMP)


def _div_special(x, y):
    if y == 0:
        if x == 0 or x != x:
            return math.nan
        return math.copysign(math.inf, x) * math.copysign(1.0, y)
    return x / y


def _pow_special(x, y):
    if y == 0:
        return 1.0
    if x == 1:
        return 1.0
    try:
        return math.pow(x, y)
    except ValueError:
        if x == 0 and y < 0:
            return math.inf
        return math.nan
    except OverflowError:
        if x < 0 and float(y).is_integer() and int(y) % 2 == 1:
            return -math.inf
        return math.inf


def _elem_slow(op, rt, x, y):
    if op == "^" and rt == "double":
        if (x is None and y == 0) or (x == 1):
            return 1.0
    if x is None or y is None:
        return None
    if rt == "complex":
        x, y = complex(x), complex(y)
        try:
            return {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv,
                    "^": operator.pow}[op](x, y)
        except ZeroDivisionError:
            return complex(math.nan, math.nan)
        except KeyError:
            raise RRuntimeError(f"invalid operation on complex numbers: {op}")
    if op == "/":
        return _div_special(float(x), float(y))
    if op == "^":
        return _pow_special(float(x), float(y))
    if op == "%%":
        if y == 0:
            return None if rt == "integer" else math.nan
        if rt == "double":
            x, y = float(x), float(y)
            if math.isinf(y):
                return x if (x >= 0) == (y > 0) else y
            if math.isinf(x) or x != x or y != y:
                return math.nan
        return x % y
    if op == "%/%":
        if y == 0:
            return None if rt == "integer" else _div_special(float(x), float(y))
        if rt == "double":
            q = float(x) / float(y)
            return float(math.floor(q)) if math.isfinite(q) else q
        return x // y
    r = _FAST[op](x, y)
    if rt == "integer" and (r > INT_MAX or r < -INT_MAX):
        return None
    return r


def arith_type(op, ta, tb) -> str:
    for t in (ta, tb):
        if t not in NUM_TYPES:
            raise RRuntimeError("non-numeric argument to binary operator")
    if "complex" in (ta, tb):
        return "complex"
    if op in ("/", "^"):
        return "double"
    if ta == "double" or tb == "double":
        return "double"
    return "integer"


def scalar_arith(op, a, b):
    """Both operands are NA-free Python scalars of logical/integer/double type."""
    ta, tb = type(a), type(b)
    if op == "+" or op == "-" or op == "*":
        r = _FAST[op](a, b)
        if ta is not float and tb is not float and (r > INT_MAX or r < -INT_MAX):
            return RValue("integer", [None])
        return r
    if op == "/":
        if b == 0:
            return _div_special(float(a), float(b))
        return a / b
    if op == "^":
        return _pow_special(float(a), float(b))
    rt = "double" if (ta is float or tb is float) else "integer"
    r = _elem_slow(op, rt, a, b)
    return RValue("integer", [None]) if r is None else r


def _result_dim(A, B, n):
    dim = A.dim if A.dim is not None else B.dim
    if dim is not None and dim[0] * dim[1] != n:
        raise LengthError("non-conformable arrays")
    return dim


def _finish(rt, res, dim, dest):
    if dest is not None and dest.type == rt and len(dest.data) == len(res) and dest.dim == dim:
        data = dest.data
        data[:] = res
        m = current_metrics()
        m.in_place_reuses += 1
        if dest.refs == 0:
            return dest
        m.dead_reuses += 1
        return dest.share(data)
    return make(rt, res, dim)


def _lengths(la, lb):
    if la == lb:
        return la
    if la == 0 or lb == 0:
        return 0
    if la == 1:
        return lb
    if lb == 1:
        return la
    raise LengthError(f"operands have different lengths ({la} and {lb}); general recycling is not supported")


def _map2(f, xa, xb, la, lb, n):
    if n == 0:
        return []
    if la == lb:
        return list(map(f, xa, xb))
    if lb == 1:
        return list(map(f, xa, repeat(xb[0], la)))
    return list(map(f, repeat(xa[0], lb), xb))


def arith(op, a, b, dest=None):
    ta, tb = type(a), type(b)
    if ta in NUMERIC_PY and tb in NUMERIC_PY:
        return scalar_arith(op, a, b)
    A = to_vector(a)
    B = to_vector(b)
    rt = arith_type(op, A.type, B.type)
    xa, xb = A.data, B.data
    la, lb = len(xa), len(xb)
    n = _lengths(la, lb)
    dim = _result_dim(A, B, n)
    if rt == "complex":
        xa = coerce_data(xa, A.type, "complex")
        xb = coerce_data(xb, B.type, "complex")
        res = _map2(lambda x, y: _elem_slow(op, "complex", x, y), xa, xb, la, lb, n)
        return _finish(rt, res, dim, dest)
    f = _FAST.get(op)
    res = None
    if f is not None:
        try:
            res = _map2(f, xa, xb, la, lb, n)
            if rt == "integer" and res and (max(res) > INT_MAX or min(res) < -INT_MAX):
                res = None
        except (TypeError, ZeroDivisionError, ValueError, OverflowError):
            res = None
    if res is None:
        res = _map2(lambda x, y: _elem_slow(op, rt, x, y), xa, xb, la, lb, n)
    elif rt == "double" and (A.type != "double" and B.type != "double"):
        res = [float(x) for x in res]
    return _finish(rt, res, dim, dest)


def unary_minus(a, dest=None):
    t = type(a)
    if t is float or t is int:
        return -a
    if t is bool:
        return -int(a)
    A = to_vector(a)
    if A.type not in NUM_TYPES:
        raise RRuntimeError("invalid argument to unary operator")
    rt = "integer" if A.type == "logical" else A.type
    res = [None if x is None else -x for x in A.data]
    if A.type == "logical":
        res = [None if x is None else int(x) for x in res]
    return _finish(rt, res, A.dim, dest)


# -- comparison and logic --------------------------------------------------------------

def _cmp_scalar(op, a, b):
    if a != a or b != b:
        return RValue("logical", [None])
    return _CMP[op](a, b)


def compare(op, a, b):
    ta, tb = type(a), type(b)
    if ta in NUMERIC_PY and tb in NUMERIC_PY:
        return _cmp_scalar(op, a, b)
    if ta is str and tb is str:
        return _CMP[op](a, b)
    A = to_vector(a)
    B = to_vector(b)
    if "list" in (A.type, B.type):
        raise RRuntimeError("comparison is possible only for atomic types")
    ct = higher(A.type, B.type)
    if ct == "complex" and op not in ("==", "!="):
        raise RRuntimeError("invalid comparison with complex values")
    xa = coerce_data(A.data, A.type, ct) if A.type != ct else A.data
    xb = coerce_data(B.data, B.type, ct) if B.type != ct else B.data
    la, lb = len(xa), len(xb)
    n = _lengths(la, lb)
    dim = _result_dim(A, B, n)
    f = _CMP[op]
    try:
        res = _map2(f, xa, xb, la, lb, n)
        if ct == "double" and (any(x != x for x in xa) or any(x != x for x in xb)):
            raise TypeError
    except TypeError:
        def g(x, y):
            if x is None or y is None or x != x or y != y:
                return None
            return f(x, y)
        res = _map2(g, xa, xb, la, lb, n)
    return make("logical", res, dim)


def _lg(v):
    A = to_vector(v)
    if A.type not in NUM_TYPES:
        raise RRuntimeError("operations are possible only for numeric, logical or complex types")
    return A, coerce_data(A.data, A.type, "logical")


def logic(op, a, b):
    if type(a) is bool and type(b) is bool:
        return (a and b) if op == "&" else (a or b)
    A, xa = _lg(a)
    B, xb = _lg(b)
    la, lb = len(xa), len(xb)
    n = _lengths(la, lb)

    def f_and(x, y):
        if x is False or y is False:
            return False
        if x is None or y is None:
            return None
        return True

    def f_or(x, y):
        if x is True or y is True:
            return True
        if x is None or y is None:
            return None
        return False

    res = _map2(f_and if op == "&" else f_or, xa, xb, la, lb, n)
    return make("logical", res, _result_dim(A, B, n))


def logical_not(a):
    if type(a) is bool:
        return not a
    A, xa = _lg(a)
    return make("logical", [None if x is None else (not x) for x in xa], A.dim)


# -- math builtins -----------------------------------------------------------------------

def _safe(f, x):
    try:
        return f(x)
    except (ValueError, OverflowError):
        return None


def math1(name, v, dest=None):
    t = type(v)
    A = to_vector(v) if t is RValue or v is None else None
    if A is not None and A.type not in NUM_TYPES[:3]:
        raise RRuntimeError(f"non-numeric argument to mathematical function {name}")
    if name == "abs":
        if A is None:
            return abs(int(v)) if t is bool else abs(v)
        rt = "integer" if A.type in ("logical", "integer") else "double"
        res = [None if x is None else abs(x) for x in A.data]
        if A.type == "logical":
            res = [None if x is None else int(x) for x in res]
        return _finish(rt, res, A.dim, dest)
    f = _MATH[name]
    if A is None:
        return f(float(v))
    data = A.data
    try:
        if A.type == "double":
            res = list(map(f, data))
        else:
            res = [f(float(x)) for x in data]
    except TypeError:
        res = [None if x is None else f(float(x)) for x in data]
    return _finish("double", res, A.dim, dest)


def _sqrt(x):
    if x < 0:
        return math.nan
    return math.sqrt(x)


def _floor(x):
    if x != x or x in (math.inf, -math.inf):
        return x
    return float(math.floor(x))


def _ceiling(x):
    if x != x or x in (math.inf, -math.inf):
        return x
    return float(math.ceil(x))


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log(x):
    if x < 0 or x != x:
        return math.nan
    if x == 0:
        return -math.inf
    return math.log(x)


_MATH = {"sqrt": _sqrt, "floor": _floor, "ceiling": _ceiling, "exp": _exp, "log": _log}


# -- indexing -----------------------------------------------------------------------------

def _index_list(idx, n, allow_extend: bool):
    """Resolve one subscript to zero-based positions (``None`` = out of range/NA)."""
    if idx is None:
        return []
    t = type(idx)
    if t is int or t is float:
        k = int(idx)
        if k > 0:
            return [k - 1] if (k <= n or allow_extend) else [None]
        if k < 0:
            if -k > n:
                return list(range(n))
            return [i for i in range(n) if i != -k - 1]
        return []
    if t is bool:
        return list(range(n)) if idx else []
    if t is str:
        raise RRuntimeError("character subscripts are only supported for lists")
    A = idx
    if A.type == "logical":
        m = len(A.data)
        if m == 0:
            return []
        size = max(n, m)
        out = []
        for i in range(size):
            b = A.data[i % m]
            if b is None:
                out.append(None)
            elif b:
                out.append(i if (i < n or allow_extend) else None)
        return out
    if A.type not in ("integer", "double"):
        raise RRuntimeError(f"invalid subscript type '{A.type}'")
    vals = A.data
    if any(x is not None and x < 0 for x in vals):
        if any(x is None or x > 0 for x in vals):
            raise RRuntimeError("can't mix positive and negative subscripts")
        drop = {-int(x) - 1 for x in vals}
        return [i for i in range(n) if i not in drop]
    out = []
    for x in vals:
        if x is None:
            out.append(None)
            continue
        k = int(x)
        if k == 0:
            continue
        out.append(k - 1 if (k <= n or allow_extend) else None)
    return out


def _na_elem(typ):
    return None


def get_index(x, idx: list):
    """``x[...]`` for one or two subscripts; missing subscripts are ``MISSING``."""
    if x is None:
        return None
    if type(x) is not RValue:
        x = to_vector(x)
    if len(idx) == 1:
        i = idx[0]
        data = x.data
        if i is MISSING:
            return make(x.type, list(data), x.dim) if x.dim is None else RValue(x.type, list(data), x.dim)
        ti = type(i)
        if (ti is int or ti is float) and i >= 1:
            k = int(i)
            if k <= len(data):
                e = data[k - 1]
                if x.type == "list":
                    return make("list", [e], names=[x.names[k - 1]] if x.names else None)
                return e if e is not None else RValue(x.type, [None])
            return RValue(x.type, [None]) if x.type != "list" else RValue("list", [None])
        if ti is str or (ti is RValue and i.type == "string"):
            names = x.names or []
            keys = [i] if ti is str else i.data
            pos = [names.index(k) if k in names else None for k in keys]
        else:
            pos = _index_list(i, len(data), False)
        res = [data[p] if p is not None else None for p in pos]
        names = None
        if x.type == "list" and x.names:
            names = [x.names[p] if p is not None else "" for p in pos]
        return make(x.type, res, names=names)
    if len(idx) == 2:
        if x.dim is None:
            raise RRuntimeError("incorrect number of dimensions")
        nr, nc = x.dim
        rows = list(range(nr)) if idx[0] is MISSING else _index_list(idx[0], nr, False)
        cols = list(range(nc)) if idx[1] is MISSING else _index_list(idx[1], nc, False)
        if None in rows or None in cols:
            raise RRuntimeError("subscript out of bounds")
        data = x.data
        res = [data[j * nr + i] for j in cols for i in rows]
        if len(rows) == 1 or len(cols) == 1:
            if len(res) == 1 and res[0] is not None:
                return res[0]
            return make(x.type, res) if res else RValue(x.type, [])
        return RValue(x.type, res, (len(rows), len(cols)))
    raise RRuntimeError("only one- and two-dimensional subscripts are supported")


class _Missing:
    __slots__ = ()

    def __repr__(self):
        return "MISSING"


MISSING = _Missing()


def value_type_for_store(v) -> str:
    if v is None:
        return "NULL"
    return type_of(v)


def coerce_target(x: RValue, vt: str):
    """Promote ``x`` in place to hold ``vt`` elements (new buffer, accounted)."""
    if vt == "NULL" or RANKS.get(vt, 0) <= RANKS[x.type]:
        return
    x.data = coerce_data(x.data, x.type, vt)
    x.type = vt
    x.acct = Alloc(payload_bytes(vt, x.data), current_metrics()) if (len(x.data) >= 2 or x.dim) else None
    x.orig_len = len(x.data)


def _extend(x: RValue, size: int):
    if size <= len(x.data):
        return
    x.data.extend([None] * (size - len(x.data)))
    x.acct = Alloc(payload_bytes(x.type, x.data), current_metrics())
    x.orig_len = len(x.data)


def set_index(x: RValue, idx: list, v):
    """Write ``v`` into ``x[...]`` in place (the caller decided copy-vs-reuse)."""
    vt = value_type_for_store(v)
    if x.type == "list":
        vals = [v]
    else:
        if vt in ("list", "closure"):
            raise RRuntimeError("cannot store this value in an atomic vector")
        coerce_target(x, vt)
        V = to_vector(v) if vt != "NULL" else RValue(x.type, [])
        vals = V.data if V.type == x.type else coerce_data(V.data, V.type, x.type)
    if len(idx) == 1:
        i = idx[0]
        ti = type(i)
        if (ti is int or ti is float) and i >= 1 and len(vals) == 1:
            k = int(i)
            if k > len(x.data):
                _extend(x, k)
            x.data[k - 1] = vals[0]
            return x
        if ti is str and x.type == "list":
            names = x.names or [""] * len(x.data)
            if i in names:
                x.data[names.index(i)] = v
            else:
                x.data.append(v)
                names.append(i)
            x.names = names
            return x
        if i is MISSING:
            pos = list(range(len(x.data)))
        else:
            if (ti is int or ti is float) and int(i) == 0:
                raise RRuntimeError("subscript 0 in assignment")
            pos = _index_list(i, len(x.data), True)
        if any(p is None for p in pos):
            raise RRuntimeError("NAs are not allowed in subscripted assignments")
        if pos:
            _extend(x, max(pos) + 1)
    elif len(idx) == 2:
        if x.dim is None:
            raise RRuntimeError("incorrect number of subscripts on matrix")
        nr, nc = x.dim
        rows = list(range(nr)) if idx[0] is MISSING else _index_list(idx[0], nr, False)
        cols = list(range(nc)) if idx[1] is MISSING else _index_list(idx[1], nc, False)
        if None in rows or None in cols:
            raise RRuntimeError("subscript out of bounds")
        pos = [j * nr + i for j in cols for i in rows]
    else:
        raise RRuntimeError("only one- and two-dimensional subscripts are supported")
    m = len(vals)
    if m == 0:
        if pos:
            raise RRuntimeError("replacement has length zero")
        return x
    if len(pos) % m != 0:
        raise LengthError("number of items to replace is not a multiple of replacement length")
    data = x.data
    if m == 1:
        e = vals[0]
        for p in pos:
            data[p] = e
    else:
        for k, p in enumerate(pos):
            data[p] = vals[k % m]
    return x


def drop_first_in_place(x: RValue):
    """``x[-1]`` reusing ``x``'s buffer: the current length shrinks, the allocation stays."""
    del x.data[0]
    return x
