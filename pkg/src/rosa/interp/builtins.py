"""Builtin functions of the supported subset.

Each builtin receives the interpreter, evaluated positional/named arguments
and returns a runtime value.
"""

from __future__ import annotations

import math

from . import ops
from .printing import format_value
from .values import (
    INT_MAX, RANKS, RRuntimeError, RValue, UnsupportedBuiltin, as_float_scalar, as_int_scalar,
    as_list, coerce_data, count_conversions, length, make, to_vector, type_of,
)


def match_args(fname, args, names, formals, required=()):
    """R-style matching: exact names first, then positional fill."""
    out = {}
    rest = []
    for a, n in zip(args, names):
        if n is not None:
            if n not in formals:
                raise RRuntimeError(f"unused argument ({n}) in {fname}()")
            out[n] = a
        else:
            rest.append(a)
    free = [f for f in formals if f not in out]
    if len(rest) > len(free):
        raise RRuntimeError(f"unused argument in {fname}()")
    for f, a in zip(free, rest):
        out[f] = a
    for r in required:
        if r not in out:
            raise RRuntimeError(f'argument "{r}" is missing, with no default in {fname}()')
    return out


def _count(v, what) -> int:
    if type(v) is RValue and len(v.data) > 1:
        return len(v.data)
    n = as_int_scalar(v, what)
    if n < 0:
        raise RRuntimeError(f"invalid {what}")
    return n


def _flag(v, default=False) -> bool:
    if v is None or v is _ABSENT:
        return default
    x = v.data[0] if type(v) is RValue else v
    if x is None:
        raise RRuntimeError("NA flag")
    return bool(x)


_ABSENT = object()


# -- constructors -------------------------------------------------------------------------

def b_c(it, args, names):
    items = [a for a in args if a is not None]
    if not items:
        return None
    rt = "logical"
    for a in items:
        t = type_of(a)
        if t == "closure":
            raise RRuntimeError("cannot combine functions")
        rt = t if RANKS[t] > RANKS[rt] else rt
    if rt == "list":
        data = []
        for a in items:
            if type(a) is RValue and a.type == "list":
                data.extend(a.data)
            else:
                data.append(a)
        return it.make_list(data, None)
    data = []
    for a in items:
        t = type_of(a)
        xs = as_list(a)
        data.extend(xs if t == rt else coerce_data(xs, t, rt))
    return make(rt, data)


def b_numeric(it, args, names):
    a = match_args("numeric", args, names, ["length"])
    n = as_int_scalar(a["length"], "length") if "length" in a else 0
    return _alloc("double", n)


def b_integer(it, args, names):
    a = match_args("integer", args, names, ["length"])
    return _alloc("integer", as_int_scalar(a["length"]) if "length" in a else 0)


def b_logical(it, args, names):
    a = match_args("logical", args, names, ["length"])
    return _alloc("logical", as_int_scalar(a["length"]) if "length" in a else 0)


def b_character(it, args, names):
    a = match_args("character", args, names, ["length"])
    return _alloc("string", as_int_scalar(a["length"]) if "length" in a else 0)


def _alloc(typ, n):
    if n < 0:
        raise RRuntimeError("invalid 'length' argument")
    fill = {"double": 0.0, "integer": 0, "logical": False, "string": "", "complex": 0j, "list": None}[typ]
    return make(typ, [fill] * n)


_MODES = {"logical": "logical", "integer": "integer", "numeric": "double", "double": "double",
          "character": "string", "complex": "complex", "list": "list"}


def b_vector(it, args, names):
    a = match_args("vector", args, names, ["mode", "length"])
    mode = a.get("mode", "logical")
    if mode not in _MODES:
        raise RRuntimeError(f"vector: cannot make a vector of mode '{mode}'")
    n = as_int_scalar(a["length"], "length") if "length" in a else 0
    if mode == "list":
        return it.make_list([None] * n, None)
    return _alloc(_MODES[mode], n)


def b_matrix(it, args, names):
    a = match_args("matrix", args, names, ["data", "nrow", "ncol", "byrow"])
    data = a.get("data", RValue("logical", [None]))
    D = to_vector(data)
    n = len(D.data)
    has_r, has_c = "nrow" in a, "ncol" in a
    nr = as_int_scalar(a["nrow"], "nrow") if has_r else None
    nc = as_int_scalar(a["ncol"], "ncol") if has_c else None
    if nr is None and nc is None:
        nr, nc = n, 1
    elif nr is None:
        nr = -(-n // nc) if nc else 0
    elif nc is None:
        nc = -(-n // nr) if nr else 0
    total = nr * nc
    if n == 0:
        vals = [None] * total
    elif n == total:
        vals = list(D.data)
    else:
        vals = [D.data[i % n] for i in range(total)]
    if _flag(a.get("byrow")):
        vals = [vals[i * nc + j] for j in range(nc) for i in range(nr)]
    return RValue(D.type, vals, (nr, nc))


def b_list(it, args, names):
    nm = [n or "" for n in names] if any(names) else None
    return it.make_list(list(args), nm)


# -- random numbers ------------------------------------------------------------------------

def b_runif(it, args, names):
    a = match_args("runif", args, names, ["n", "min", "max"], ("n",))
    n = _count(a["n"], "n")
    lo = as_float_scalar(a["min"]) if "min" in a else 0.0
    hi = as_float_scalar(a["max"]) if "max" in a else 1.0
    return make("double", it.prng.runif(n, lo, hi))


def b_rnorm(it, args, names):
    a = match_args("rnorm", args, names, ["n", "mean", "sd"], ("n",))
    n = _count(a["n"], "n")
    mu = as_float_scalar(a["mean"]) if "mean" in a else 0.0
    sd = as_float_scalar(a["sd"]) if "sd" in a else 1.0
    return make("double", it.prng.rnorm(n, mu, sd))


def b_rbeta(it, args, names):
    a = match_args("rbeta", args, names, ["n", "shape1", "shape2"], ("n", "shape1", "shape2"))
    n = _count(a["n"], "n")
    return make("double", it.prng.rbeta(n, as_float_scalar(a["shape1"]), as_float_scalar(a["shape2"])))


def b_sample(it, args, names):
    a = match_args("sample", args, names, ["x", "size", "replace", "prob"], ("x",))
    x = a["x"]
    X = to_vector(x)
    if len(X.data) == 1 and X.type in ("integer", "double") and X.data[0] is not None and X.data[0] >= 1:
        X = RValue("integer", list(range(1, int(X.data[0]) + 1)))
    k = len(X.data)
    size = as_int_scalar(a["size"], "size") if "size" in a and a["size"] is not None else k
    replace = _flag(a.get("replace"))
    prob = None
    if "prob" in a and a["prob"] is not None:
        P = to_vector(a["prob"], "double")
        if len(P.data) != k:
            raise RRuntimeError("incorrect number of probabilities")
        if any(p is None or p < 0 for p in P.data):
            raise RRuntimeError("NA or negative probability")
        prob = P.data
    if k == 0 and size > 0:
        raise RRuntimeError("cannot sample from an empty population")
    try:
        idx = it.prng.sample_index(k, size, replace, prob)
    except ValueError as e:
        raise RRuntimeError(str(e))
    data = X.data
    return make(X.type, [data[i] for i in idx])


def b_set_seed(it, args, names):
    a = match_args("set.seed", args, names, ["seed"], ("seed",))
    it.prng.state = as_int_scalar(a["seed"], "seed") & ((1 << 64) - 1)
    return None


def b_rep(it, args, names):
    a = match_args("rep", args, names, ["x", "times", "each", "length.out"], ("x",))
    X = to_vector(a["x"])
    data = X.data
    each = as_int_scalar(a["each"], "each") if "each" in a else 1
    if each != 1:
        data = [v for v in data for _ in range(each)]
    if "times" in a:
        T = to_vector(a["times"], "integer")
        if len(T.data) == 1:
            t = T.data[0]
            if t is None or t < 0:
                raise RRuntimeError("invalid 'times' argument")
            data = data * t if len(data) != 1 else [data[0]] * t
        elif len(T.data) == len(data):
            data = [v for v, t in zip(data, T.data) for _ in range(t)]
        else:
            raise RRuntimeError("invalid 'times' argument")
    elif each == 1:
        data = list(data)
    if "length.out" in a and a["length.out"] is not None:
        m = as_int_scalar(a["length.out"], "length.out")
        src = data or [None]
        data = [src[i % len(src)] for i in range(m)]
    return make(X.type, data)


# -- math and summaries -------------------------------------------------------------------

def _math(name):
    def f(it, args, names):
        a = match_args(name, args, names, ["x"], ("x",))
        return ops.math1(name, a["x"])
    return f


def b_log(it, args, names):
    a = match_args("log", args, names, ["x", "base"], ("x",))
    r = ops.math1("log", a["x"])
    if "base" in a:
        r = ops.arith("/", r, ops.math1("log", a["base"]))
    return r


def _numeric_data(v, fname):
    t = type_of(v)
    if t not in ("logical", "integer", "double", "NULL"):
        raise RRuntimeError(f"invalid 'type' ({t}) of argument to {fname}")
    return t, as_list(v)


def _narm(args, names):
    keep, narm = [], False
    for x, n in zip(args, names):
        if n == "na.rm":
            narm = _flag(x)
        else:
            keep.append(x)
    return keep, narm


def b_sum(it, args, names):
    vals, narm = _narm(args, names)
    typed = [_numeric_data(v, "sum") for v in vals]
    is_int = all(t != "double" for t, _ in typed)
    acc = 0 if is_int else 0.0
    for t, data in typed:
        for x in data:
            if x is None:
                if narm:
                    continue
                return RValue("integer" if is_int else "double", [None])
            acc += x
    if is_int:
        if abs(acc) > INT_MAX:
            return RValue("integer", [None])
        return int(acc)
    return acc


def _sum_double(data):
    acc = 0.0
    for x in data:
        acc += x
    return acc


def b_mean(it, args, names):
    a = match_args("mean", args, names, ["x", "na.rm"], ("x",))
    t, data = _numeric_data(a["x"], "mean")
    if _flag(a.get("na.rm")):
        data = [x for x in data if x is not None]
    if not data:
        return math.nan
    if any(x is None for x in data):
        return RValue("double", [None])
    return _sum_double(float(x) for x in data) / len(data)


def _minmax(fname, args, names, pick):
    vals, narm = _narm(args, names)
    rt = "integer"
    items = []
    for v in vals:
        t = type_of(v)
        if t == "string":
            rt = "string"
        elif t == "double" and rt != "string":
            rt = "double"
        elif t not in ("logical", "integer", "NULL", "double", "string"):
            raise RRuntimeError(f"invalid 'type' ({t}) of argument to {fname}")
        items.extend(coerce_data(as_list(v), t, rt) if t not in ("NULL",) else [])
    items = [coerce_data([x], "integer", rt)[0] if type(x) is int and rt != "integer" else x for x in items]
    if any(x is None for x in items):
        if not narm:
            return RValue(rt, [None])
        items = [x for x in items if x is not None]
    if not items:
        if rt == "string":
            raise RRuntimeError(f"no non-missing arguments to {fname}")
        return -math.inf if pick is max else math.inf
    if rt == "double" and any(x != x for x in items):
        return math.nan
    return pick(items)


def b_min(it, args, names):
    return _minmax("min", args, names, min)


def b_max(it, args, names):
    return _minmax("max", args, names, max)


def b_length(it, args, names):
    a = match_args("length", args, names, ["x"], ("x",))
    return length(a["x"])


def b_nrow(it, args, names):
    a = match_args("nrow", args, names, ["x"], ("x",))
    x = a["x"]
    return x.dim[0] if type(x) is RValue and x.dim else None


def b_ncol(it, args, names):
    a = match_args("ncol", args, names, ["x"], ("x",))
    x = a["x"]
    return x.dim[1] if type(x) is RValue and x.dim else None


# -- strings --------------------------------------------------------------------------------

def _to_strings(it, v):
    t = type_of(v)
    data = as_list(v)
    if t == "string":
        return data
    if t in ("list", "closure"):
        raise RRuntimeError("paste: cannot convert this argument to character")
    it.metrics.conversions += count_conversions(data, t)
    return coerce_data(data, t, "string")


def b_paste(it, args, names):
    sep, collapse = " ", None
    parts = []
    for x, n in zip(args, names):
        if n == "sep":
            sep = _str_arg(x, "sep")
        elif n == "collapse":
            collapse = None if x is None else _str_arg(x, "collapse")
        else:
            parts.append([("NA" if s is None else s) for s in _to_strings(it, x)])
    parts = [p for p in parts if p]
    if not parts:
        res = []
    else:
        n = max(len(p) for p in parts)
        res = [sep.join(p[i % len(p)] for p in parts) for i in range(n)]
    if collapse is not None:
        return collapse.join(res)
    return make("string", res)


def _str_arg(v, what):
    x = v.data[0] if type(v) is RValue else v
    if type(x) is not str:
        raise RRuntimeError(f"invalid '{what}' argument")
    return x


def b_as(typ, fname):
    def f(it, args, names):
        a = match_args(fname, args, names, ["x"], ("x",))
        x = a["x"]
        t = type_of(x)
        if t == typ:
            if type(x) is RValue and x.dim is not None:
                return make(typ, list(x.data))
            return x
        if t == "NULL":
            return _alloc(typ, 0)
        if t == "list":
            raise RRuntimeError(f"{fname}: cannot coerce a list")
        data = as_list(x)
        if typ == "string":
            it.metrics.conversions += count_conversions(data, t)
        return make(typ, coerce_data(data, t, typ))
    return f


# -- vector utilities ---------------------------------------------------------------------------

def _key(x):
    if type(x) is float and x != x:
        return ("nan",)
    return x


def b_unique(it, args, names):
    a = match_args("unique", args, names, ["x"], ("x",))
    X = to_vector(a["x"])
    seen = set()
    out = []
    for x in X.data:
        k = _key(x)
        if k not in seen:
            seen.add(k)
            out.append(x)
    return make(X.type, out)


def b_sort(it, args, names):
    a = match_args("sort", args, names, ["x", "decreasing"], ("x",))
    X = to_vector(a["x"])
    if X.type == "list":
        raise RRuntimeError("sort: lists cannot be sorted")
    data = [x for x in X.data if x is not None and not (type(x) is float and x != x)]
    data.sort(reverse=_flag(a.get("decreasing")))
    return make(X.type, data)


def b_rev(it, args, names):
    a = match_args("rev", args, names, ["x"], ("x",))
    X = to_vector(a["x"])
    return make(X.type, X.data[::-1])


def b_seq_along(it, args, names):
    a = match_args("seq_along", args, names, ["along.with"], ("along.with",))
    return make("integer", list(range(1, length(a["along.with"]) + 1)))


def b_seq_len(it, args, names):
    a = match_args("seq_len", args, names, ["length.out"], ("length.out",))
    return make("integer", list(range(1, as_int_scalar(a["length.out"]) + 1)))


def b_na_omit(it, args, names):
    a = match_args("na.omit", args, names, ["object"], ("object",))
    x = a["object"]
    if type(x) is not RValue:
        return x
    if x.type == "list" or x.dim is not None:
        raise RRuntimeError("na.omit is supported on vectors only")
    return make(x.type, [v for v in x.data if v is not None and not (type(v) is float and v != v)])


def b_is_na(it, args, names):
    a = match_args("is.na", args, names, ["x"], ("x",))
    x = a["x"]
    if type(x) is not RValue:
        return False if x is not None else RValue("logical", [])
    return make("logical", [v is None or (type(v) is float and v != v) for v in x.data], x.dim)


def b_print(it, args, names):
    if not args:
        raise RRuntimeError("print: argument missing")
    it.emit(format_value(args[0]))
    return args[0]


def b_matmul(it, args, names):
    A, B = args
    A = to_vector(A, None)
    B = to_vector(B, None)
    if A.dim is None:
        A = RValue(A.type, A.data, (1, len(A.data)))
    if B.dim is None:
        B = RValue(B.type, B.data, (len(B.data), 1))
    (n, k), (k2, m) = A.dim, B.dim
    if k != k2:
        raise RRuntimeError("non-conformable arguments")
    rt = "double"
    a, b = A.data, B.data
    out = []
    for j in range(m):
        for i in range(n):
            acc = 0.0
            for t in range(k):
                x, y = a[t * n + i], b[j * k + t]
                if x is None or y is None:
                    acc = None
                    break
                acc += x * y
            out.append(acc)
    return RValue(rt, out, (n, m))


def b_dollar(it, args, names):
    x, key = args
    if type(x) is not RValue or x.type != "list":
        raise RRuntimeError("$ operator is invalid for atomic vectors")
    if x.names and key in x.names:
        return x.data[x.names.index(key)]
    return None


def b_elem(it, args, names):
    x, i = args[0], args[1]
    if type(x) is RValue and x.type == "list":
        if type(i) is str:
            if x.names and i in x.names:
                return x.data[x.names.index(i)]
            return None
        k = as_int_scalar(i, "subscript")
        if not 1 <= k <= len(x.data):
            raise RRuntimeError("subscript out of bounds")
        return x.data[k - 1]
    k = as_int_scalar(i, "subscript")
    data = as_list(x)
    if not 1 <= k <= len(data):
        raise RRuntimeError("subscript out of bounds")
    e = data[k - 1]
    return e if e is not None else RValue(type_of(x), [None])


def b_unsupported(name):
    def f(it, args, names):
        raise UnsupportedBuiltin(f"unsupported builtin '{name}'")
    return f


BUILTINS = {
    "c": b_c, "numeric": b_numeric, "integer": b_integer, "logical": b_logical,
    "character": b_character, "vector": b_vector, "matrix": b_matrix, "list": b_list,
    "runif": b_runif, "rnorm": b_rnorm, "rbeta": b_rbeta, "sample": b_sample, "set.seed": b_set_seed,
    "rep": b_rep, "sqrt": _math("sqrt"), "floor": _math("floor"), "ceiling": _math("ceiling"),
    "abs": _math("abs"), "exp": _math("exp"), "log": b_log, "sum": b_sum, "mean": b_mean,
    "min": b_min, "max": b_max, "length": b_length, "nrow": b_nrow, "ncol": b_ncol,
    "paste": b_paste, "as.integer": b_as("integer", "as.integer"),
    "as.double": b_as("double", "as.double"), "as.numeric": b_as("double", "as.numeric"),
    "as.logical": b_as("logical", "as.logical"), "as.character": b_as("string", "as.character"),
    "unique": b_unique, "sort": b_sort, "rev": b_rev, "seq_along": b_seq_along,
    "seq_len": b_seq_len, "na.omit": b_na_omit, "is.na": b_is_na, "print": b_print,
    "%*%": b_matmul, "$": b_dollar, "[[": b_elem,
}

SUPPORTED = frozenset(BUILTINS) | {"return", "(", "{", ":", "!", "&", "|", "&&", "||",
                                   "+", "-", "*", "/", "^", "%%", "%/%", "==", "!=", "<", ">",
                                   "<=", ">="}
