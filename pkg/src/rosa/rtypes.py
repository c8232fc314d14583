"""Type lattice, join, and fixed-point type inference.

Types are rendered the way the analyzer reports them: ``integer``,
``vector(double)``, ``matrix(double)``, ``function(...)``.  Shape matters:
a bare basic type stands for a length-one value, ``vector(t)`` for a value
of any length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .cfg import TOP
from .frontend import ast as A
from .frontend.normalize import NormalizedProgram

CHAIN = ("NULL", "raw", "logical", "integer", "double", "complex", "string", "list", "expr")
RANK = {t: i for i, t in enumerate(CHAIN)}
NUMERIC = ("logical", "integer", "double", "complex")
ELEMENT_TYPES = tuple(t for t in CHAIN if t not in ("NULL", "expr"))

BASIC, VECTOR, MATRIX, ARRAY, FUNCTION, RECORD, UNKNOWN, TOPK = (
    "basic", "vector", "matrix", "array", "function", "record", "unknown", "top")
_FAMILY = {BASIC: "vec", VECTOR: "vec", MATRIX: "mat", ARRAY: "arr", FUNCTION: "fn", RECORD: "rec"}


class TypeJoinError(Exception):
    pass


class ArityError(Exception):
    pass


@dataclass(frozen=True)
class RType:
    ctor: str
    base: Optional[str] = None
    params: Tuple["RType", ...] = ()
    ret: Optional["RType"] = None
    fields: Tuple[Tuple[str, "RType"], ...] = ()

    def __str__(self) -> str:
        c = self.ctor
        if c == BASIC:
            return self.base
        if c in (VECTOR, MATRIX, ARRAY):
            return f"{c}({self.base})"
        if c == FUNCTION:
            return "function(" + ", ".join(map(str, self.params)) + f") -> {self.ret}"
        if c == RECORD:
            return "list(" + ", ".join(f"{k}={v}" for k, v in self.fields) + ")"
        return "Unknown" if c == UNKNOWN else "Top"

    __repr__ = __str__

    @property
    def is_top(self) -> bool:
        return self.ctor == TOPK

    @property
    def is_unknown(self) -> bool:
        return self.ctor == UNKNOWN

    @property
    def is_scalar(self) -> bool:
        return self.ctor == BASIC

    @property
    def elem(self) -> Optional[str]:
        return self.base if self.ctor in (BASIC, VECTOR, MATRIX, ARRAY) else None

    def concrete(self) -> bool:
        """True when no Top/Unknown occurs anywhere inside."""
        if self.ctor in (UNKNOWN, TOPK):
            return False
        if self.ctor == FUNCTION:
            return all(p.concrete() for p in self.params) and self.ret.concrete()
        if self.ctor == RECORD:
            return all(t.concrete() for _, t in self.fields)
        return True


UNKNOWN_T = RType(UNKNOWN)
TOP_T = RType(TOPK)


def basic(t: str) -> RType:
    return RType(BASIC, t)


def vector(t: str) -> RType:
    if t not in ELEMENT_TYPES:
        raise TypeJoinError(f"vector({t}) is not a valid type")
    return RType(VECTOR, t)


def matrix(t: str) -> RType:
    if t not in ELEMENT_TYPES:
        raise TypeJoinError(f"matrix({t}) is not a valid type")
    return RType(MATRIX, t)


def array(t: str) -> RType:
    return RType(ARRAY, t)


def function(params, ret: RType) -> RType:
    return RType(FUNCTION, None, tuple(params), ret)


def record(fields) -> RType:
    return RType(RECORD, None, (), None, tuple(fields))


INTEGER, DOUBLE, LOGICAL, STRING = basic("integer"), basic("double"), basic("logical"), basic("string")


def parse_type(text: str) -> RType:
    """Inverse of ``str`` for the non-function, non-record forms."""
    text = text.strip()
    if text == "Unknown":
        return UNKNOWN_T
    if text == "Top":
        return TOP_T
    for c in (VECTOR, MATRIX, ARRAY):
        if text.startswith(c + "(") and text.endswith(")"):
            return RType(c, text[len(c) + 1:-1])
    if text in RANK:
        return basic(text)
    raise ValueError(f"cannot parse type {text!r}")


def _join_strict(a: RType, b: RType) -> RType:
    if a.ctor == UNKNOWN:
        return b
    if b.ctor == UNKNOWN:
        return a
    if a.ctor == TOPK or b.ctor == TOPK:
        return TOP_T
    fa, fb = _FAMILY[a.ctor], _FAMILY[b.ctor]
    if fa != fb:
        raise TypeJoinError(f"cannot join {a} and {b}")
    if fa == "vec":
        e = CHAIN[max(RANK[a.base], RANK[b.base])]
        if a.ctor == BASIC and b.ctor == BASIC:
            return basic(e)
        if e not in ELEMENT_TYPES:
            raise TypeJoinError(f"no vector of {e}")
        return RType(VECTOR, e)
    if fa in ("mat", "arr"):
        e = CHAIN[max(RANK[a.base], RANK[b.base])]
        if e not in ELEMENT_TYPES:
            raise TypeJoinError(f"no {a.ctor} of {e}")
        return RType(a.ctor, e)
    if fa == "fn":
        if len(a.params) != len(b.params):
            raise TypeJoinError("function arity mismatch")
        return function([join(x, y) for x, y in zip(a.params, b.params)], join(a.ret, b.ret))
    if [k for k, _ in a.fields] != [k for k, _ in b.fields]:
        raise TypeJoinError("record field mismatch")
    return record([(k, join(x, y)) for (k, x), (_, y) in zip(a.fields, b.fields)])


def join(a: RType, b: RType) -> RType:
    """Least upper bound; incompatible constructors give Top."""
    try:
        return _join_strict(a, b)
    except TypeJoinError:
        return TOP_T


def join_all(types) -> RType:
    acc = UNKNOWN_T
    for t in types:
        acc = join(acc, t)
    return acc


def leq(a: RType, b: RType) -> bool:
    return join(a, b) == b


def as_vector(t: RType) -> RType:
    """``tau(c(a))``: the vector whose elements have ``a``'s element type."""
    if t.ctor in (UNKNOWN, TOPK):
        return t
    if t.ctor in (BASIC, VECTOR, MATRIX, ARRAY):
        e = t.base
        if e == "NULL":
            return basic("NULL")
        if e not in ELEMENT_TYPES:
            return TOP_T
        return RType(VECTOR, e)
    return TOP_T


def with_shape(elem: str, *shapes: RType) -> RType:
    """Elementwise result: matrix if any operand is, vector if any is, else basic."""
    ctors = {s.ctor for s in shapes}
    if MATRIX in ctors:
        return RType(MATRIX, elem)
    if VECTOR in ctors or ARRAY in ctors:
        return RType(VECTOR, elem)
    return basic(elem)


# -- builtin signatures (Table of rules) ------------------------------------------

_ARITY = {
    "+": (1, 2), "-": (1, 2), "*": (2, 2), "/": (2, 2), "^": (2, 2), "%%": (2, 2), "%/%": (2, 2),
    ":": (2, 2), "sqrt": (1, 1), "floor": (1, 1), "ceiling": (1, 1), "abs": (1, 1), "exp": (1, 1),
    "log": (1, 2), "length": (1, 1), "nrow": (1, 1), "ncol": (1, 1), "numeric": (0, 1),
    "runif": (1, 3), "rnorm": (1, 3), "rbeta": (3, 3), "sample": (1, 4), "rep": (1, 3),
    "paste": (0, None), "c": (0, None), "as.integer": (1, 1), "as.double": (1, 1),
    "as.numeric": (1, 1), "as.logical": (1, 1), "as.character": (1, 1), "return": (0, 1),
    "sum": (0, None), "mean": (1, 1), "matrix": (0, 4), "vector": (0, 2), "unique": (1, 1),
    "sort": (1, 2), "seq_along": (1, 1), "seq_len": (1, 1), "min": (1, None), "max": (1, None),
    "print": (1, None), "list": (0, None), "na.omit": (1, 1), "rev": (1, 1), "is.na": (1, 1),
    "==": (2, 2), "!=": (2, 2), "<": (2, 2), ">": (2, 2), "<=": (2, 2), ">=": (2, 2),
    "!": (1, 1), "&": (2, 2), "|": (2, 2), "&&": (2, 2), "||": (2, 2), "(": (1, 1),
    "%*%": (2, 2), "integer": (0, 1), "logical": (0, 1), "character": (0, 1),
}
_ARITH = ("+", "-", "*")
_COMPARE = ("==", "!=", "<", ">", "<=", ">=")
_DOUBLE_GEN = ("numeric", "rnorm", "rbeta", "runif", "sqrt", "/")


def check_arity(op: str, n: int):
    if op in _ARITY:
        lo, hi = _ARITY[op]
        if n < lo or (hi is not None and n > hi):
            raise ArityError(f"{op} takes {lo}..{hi if hi is not None else 'n'} arguments, got {n}")


def _numeric_join(types, floor="logical") -> Optional[str]:
    e = None
    for t in types:
        if t.elem is None:
            return None
        e = t.elem if e is None or RANK[t.elem] > RANK[e] else e
    if e is None:
        return None
    if RANK[e] > RANK["complex"]:
        return None
    if RANK[e] < RANK[floor]:
        e = floor
    return e


def type_of_call(op: str, args: List[RType], user: Optional[Dict[str, RType]] = None) -> RType:
    """Conclusion of the typing rule for ``op`` applied to argument types.

    This is the shape-agnostic form: every vector-valued rule yields
    ``vector(t)``.  :func:`infer` refines results to bare basic types when
    the value is known to have length one.
    """
    check_arity(op, len(args))
    if user and op in user:
        f = user[op]
        return f.ret if f.ctor == FUNCTION else TOP_T
    if any(a.is_top for a in args) and op not in ("paste", "length", "nrow", "ncol", "print"):
        return TOP_T
    if any(a.is_unknown for a in args) and op not in ("paste", "length", "nrow", "ncol", "numeric",
                                                        "runif", "rnorm", "rbeta", "vector"):
        return UNKNOWN_T
    if op == "c":
        if not args:
            return basic("NULL")
        if any(a.ctor in (RECORD, FUNCTION) for a in args):
            return TOP_T
        e = join_all(basic(a.elem) for a in args)
        return as_vector(e) if e.elem != "NULL" else basic("NULL")
    if op in _ARITH:
        if len(args) == 1:
            e = _numeric_join(args, "integer")
            return basic(e) if e else TOP_T
        e = _numeric_join(args)
        return join(*args) if e and not any(a.ctor in (MATRIX,) for a in args) else (
            RType(MATRIX, e) if e else TOP_T)
    if op == "^":
        return RType(VECTOR, "double")
    if op in ("=", "<-", "<<-"):
        return args[-1]
    if op == "[<-":
        return join(args[0], args[1])
    if op in ("[", ":", "sample", "rep", "unique", "sort", "rev", "na.omit"):
        return as_vector(args[0])
    if op in ("as.integer", "as.double", "as.numeric", "as.logical", "as.character"):
        t = {"as.integer": "integer", "as.double": "double", "as.numeric": "double",
             "as.logical": "logical", "as.character": "string"}[op]
        return RType(VECTOR, t)
    if op == "floor" or op == "ceiling":
        return RType(VECTOR, "integer")
    if op in _DOUBLE_GEN:
        return RType(VECTOR, "double")
    if op in ("length", "nrow", "ncol"):
        return RType(VECTOR, "integer")
    if op == "paste":
        return RType(VECTOR, "string")
    if op in ("%%", "%/%"):
        e = _numeric_join(args, "integer")
        if e is None or e == "complex":
            return TOP_T
        return RType(VECTOR, e)
    if op in _COMPARE or op in ("!", "&", "|", "&&", "||", "is.na"):
        return RType(VECTOR, "logical")
    if op == "abs":
        e = _numeric_join(args, "integer")
        return RType(VECTOR, e) if e else TOP_T
    if op in ("exp", "log"):
        return RType(VECTOR, "double")
    if op == "sum":
        e = _numeric_join(args, "integer")
        return RType(VECTOR, e) if e else TOP_T
    if op == "mean":
        return RType(VECTOR, "double")
    if op in ("min", "max"):
        return as_vector(join_all(args))
    if op in ("seq_along", "seq_len"):
        return RType(VECTOR, "integer")
    if op == "matrix":
        return RType(MATRIX, args[0].elem if args and args[0].elem in ELEMENT_TYPES else "logical")
    if op == "vector" or op == "logical":
        return RType(VECTOR, "logical")
    if op == "integer":
        return RType(VECTOR, "integer")
    if op == "character":
        return RType(VECTOR, "string")
    if op in ("return", "print", "("):
        return args[0] if args else basic("NULL")
    if op == "%*%":
        e = _numeric_join(args, "integer")
        return RType(MATRIX, e) if e else TOP_T
    return TOP_T


# -- inference ------------------------------------------------------------------------

@dataclass
class TypeEnv:
    vars: Dict[str, Dict[str, RType]]
    node_types: Dict[int, RType]
    returns: Dict[str, RType]
    params: Dict[str, List[RType]]
    iterations: int
    history: List[Dict[str, Dict[str, RType]]]

    def type_of(self, function: str, var: str) -> RType:
        return self.vars.get(function, {}).get(var, UNKNOWN_T)

    def signature(self, fname: str) -> RType:
        return function(self.params.get(fname, []), self.returns.get(fname, UNKNOWN_T))

    def display(self, t: RType) -> str:
        """Function-valued variables are listed by the type their calls produce."""
        if t.ctor == FUNCTION:
            return str(t.ret)
        return str(t)

    def table(self, fname: Optional[str] = None) -> Dict[str, str]:
        if fname is not None:
            return {v: self.display(t) for v, t in sorted(self.vars.get(fname, {}).items())}
        merged: Dict[str, str] = {}
        for f in sorted(self.vars, key=lambda f: (f != TOP, f)):
            for v, t in self.vars[f].items():
                if v.startswith(A.RESERVED_PREFIX):
                    continue
                s = self.display(t)
                if v in merged and merged[v] != s:
                    merged[v] = str(join(parse_type(merged[v]), parse_type(s))) if (
                        _parsable(merged[v]) and _parsable(s)) else "Top"
                else:
                    merged[v] = s
        return dict(sorted(merged.items()))


def _parsable(s: str) -> bool:
    try:
        parse_type(s)
        return True
    except ValueError:
        return False


_SCALAR_RESULT = ("length", "nrow", "ncol", "sum", "mean", "min", "max")
_ELEMENTWISE = ("+", "-", "*", "/", "^", "%%", "%/%", "sqrt", "floor", "ceiling", "abs", "exp",
                "log", "!", "&", "|", "is.na", "(") + _COMPARE
_LENGTH_ARG = ("runif", "rnorm", "rbeta", "numeric")


class _Inferencer:
    def __init__(self, program: NormalizedProgram):
        self.p = program
        self.fnames = list(program.functions)
        self.vars: Dict[str, Dict[str, RType]] = {TOP: {}}
        self.params: Dict[str, List[RType]] = {}
        self.returns: Dict[str, RType] = {}
        for f, fn in program.functions.items():
            self.vars[f] = {}
            self.params[f] = [UNKNOWN_T] * (len(fn.names) - 1)
            self.returns[f] = UNKNOWN_T
        self.node_types: Dict[int, RType] = {}
        self.changed = False

    def set_var(self, scope, name, t):
        old = self.vars[scope].get(name, UNKNOWN_T)
        new = join(old, t)
        if new != old:
            self.vars[scope][name] = new
            self.changed = True

    def run(self, max_iter: int = 100) -> TypeEnv:
        history = []
        it = 0
        while True:
            it += 1
            self.changed = False
            self.scope_pass(TOP, self.p.statements)
            for f, fn in self.p.functions.items():
                names = fn.names[:-1]
                for i, nm in enumerate(names):
                    t = self.params[f][i]
                    default = fn.children[i]
                    if not default.is_empty_arg():
                        t = join(t, self.expr(f, default))
                    self.set_var(f, nm, t)
                body = fn.children[-1]
                last = self.scope_pass(f, body.children)
                self.set_return(f, last)
            history.append({s: dict(v) for s, v in self.vars.items()})
            if not self.changed or it >= max_iter:
                break
        for f in self.fnames:
            self.vars[TOP][f] = function(self.params[f], self.returns[f])
        vars_out = {s: dict(sorted(v.items())) for s, v in self.vars.items()}
        return TypeEnv(vars_out, self.node_types, dict(self.returns),
                       {f: list(p) for f, p in self.params.items()}, it, history)

    def set_return(self, f, t):
        new = join(self.returns[f], t)
        if new != self.returns[f]:
            self.returns[f] = new
            self.changed = True

    def scope_pass(self, scope, stmts) -> RType:
        last = basic("NULL")
        for s in stmts:
            last = self.stmt(scope, s)
        return last

    def stmt(self, scope, s: A.SNode) -> RType:
        k = s.kind
        if k == A.ASSIGN:
            target, rhs = s.children
            name = A.assign_target_name(s)
            if rhs.kind == A.FUNDEF:
                return function(self.params[name], self.returns[name])
            t = self.expr(scope, rhs)
            if target.kind == A.INDEX:
                for c in target.children[1:]:
                    if not c.is_empty_arg():
                        self.expr(scope, c)
                old = self.lookup(scope, name)
                t = self.subassign_type(old, t)
            self.set_var(scope, name, t)
            self.node_types[s.id] = t
            return t
        if k == A.IF:
            self.expr(scope, s.children[0])
            a = self.scope_pass(scope, s.children[1].children)
            b = self.scope_pass(scope, s.children[2].children)
            return join(a, b)
        if k == A.FOR:
            rt = self.expr(scope, s.children[0])
            et = basic(rt.elem) if rt.elem and rt.elem in ELEMENT_TYPES else (
                rt if rt.is_unknown else TOP_T)
            self.set_var(scope, s.value, et)
            self.scope_pass(scope, s.children[1].children)
            return basic("NULL")
        if k == A.WHILE:
            self.expr(scope, s.children[0])
            self.scope_pass(scope, s.children[1].children)
            return basic("NULL")
        if k == A.BLOCK:
            return self.scope_pass(scope, s.children)
        if A.is_hint(s) or k in (A.BREAK, A.NEXT):
            return basic("NULL")
        return self.expr(scope, s)

    def subassign_type(self, old: RType, val: RType) -> RType:
        if old.is_unknown:
            return as_vector(val) if not val.is_unknown else val
        if old.is_top or val.is_top:
            return TOP_T
        if val.is_unknown:
            return old
        if old.ctor in (BASIC, VECTOR, MATRIX, ARRAY) and val.elem is not None:
            e = CHAIN[max(RANK[old.elem], RANK[val.elem])]
            if e not in ELEMENT_TYPES:
                return TOP_T
            ctor = VECTOR if old.ctor == BASIC else old.ctor
            return RType(ctor, e)
        return TOP_T

    def lookup(self, scope, name) -> RType:
        if name in ("T", "F"):
            return LOGICAL
        if scope != TOP and name in self.vars[scope]:
            return self.vars[scope][name]
        if scope != TOP:
            fn = self.p.functions[scope]
            if name in fn.names[:-1]:
                return self.vars[scope].get(name, UNKNOWN_T)
        if name in self.p.functions:
            return function(self.params[name], self.returns[name])
        return self.vars[TOP].get(name, UNKNOWN_T)

    def expr(self, scope, e: A.SNode) -> RType:
        t = self._expr(scope, e)
        self.node_types[e.id] = t
        return t

    def _expr(self, scope, e: A.SNode) -> RType:
        k = e.kind
        if k == A.NUM_DBL:
            return DOUBLE
        if k == A.NUM_INT:
            return INTEGER
        if k == A.NUM_CPLX:
            return basic("complex")
        if k == A.STR:
            return STRING
        if k == A.LOGICAL:
            return LOGICAL
        if k == A.NULL_LIT:
            return basic("NULL")
        if k == A.NA_LIT:
            return basic({"NA_integer_": "integer", "NA_real_": "double",
                          "NA_character_": "string", "NA_complex_": "complex"}.get(e.value, "logical"))
        if k == A.SYM:
            return self.lookup(scope, e.value)
        if k == A.INDEX:
            return self.index_type(scope, e)
        if k == A.IF:
            self.expr(scope, e.children[0])
            a = self.stmt(scope, e.children[1])
            b = self.stmt(scope, e.children[2]) if len(e.children) > 2 else basic("NULL")
            return join(a, b)
        if k == A.BLOCK:
            return self.scope_pass(scope, e.children)
        if k == A.ASSIGN:
            return self.stmt(scope, e)
        if k == A.CALL:
            return self.call_type(scope, e)
        return TOP_T

    def index_type(self, scope, e: A.SNode) -> RType:
        base = self.expr(scope, e.children[0])
        idx = e.children[1:]
        idx_types = [self.expr(scope, c) if not c.is_empty_arg() else None for c in idx]
        if base.is_unknown or base.is_top:
            return base
        if base.ctor == RECORD:
            return TOP_T
        if base.elem is None or base.elem not in ELEMENT_TYPES:
            return TOP_T if base.elem != "NULL" else basic("NULL")
        scalar = all(t is not None and t.is_scalar and not _negative_literal(c)
                     and (t.elem not in ("logical",))
                     for c, t in zip(idx, idx_types))
        if scalar and (len(idx) == 1 or (base.ctor == MATRIX and len(idx) == 2)):
            return basic(base.elem)
        return RType(VECTOR, base.elem)

    def call_type(self, scope, e: A.SNode) -> RType:
        name = e.call_name()
        args = e.children[1:]
        names = e.arg_names()
        if name is None:
            return TOP_T
        if name == "$":
            base = self.expr(scope, args[0])
            if base.ctor == RECORD:
                return dict(base.fields).get(args[1].value, TOP_T)
            return TOP_T if not base.is_unknown else base
        if name == "[[":
            base = self.expr(scope, args[0])
            for a in args[1:]:
                self.expr(scope, a)
            if base.ctor == RECORD and args[1].kind == A.STR:
                return dict(base.fields).get(args[1].value, TOP_T)
            if base.elem in ELEMENT_TYPES:
                return basic(base.elem)
            return TOP_T if not base.is_unknown else base
        if name == "list":
            ts = [self.expr(scope, a) for a in args]
            if args and all(names):
                return record(list(zip(names, ts)))
            return TOP_T
        if name in self.p.functions and not (scope != TOP and name in self.vars[scope]):
            return self.user_call(scope, name, args, names)
        ts = [self.expr(scope, a) for a in args]
        positional = [t for t, n in zip(ts, names) if n is None]
        try:
            if name == "vector":
                return self.vector_call(args, names)
            if name in ("sample", "rep") and positional:
                base = type_of_call(name, positional[:1])
            elif name == ":" and len(positional) == 2:
                e = positional[0].elem
                if e in ("integer", "logical") or (e == "double" and _integral_literal(args[0])):
                    return RType(VECTOR, "integer")
                base = type_of_call(":", positional)
            elif name == "matrix":
                data = ts[names.index("data")] if "data" in names else (positional[0] if positional else LOGICAL)
                base = type_of_call("matrix", [data])
            elif name == "paste":
                base = type_of_call("paste", ts)
                if "collapse" in names:
                    return STRING
                if all(t.is_scalar for t, n in zip(ts, names) if n is None):
                    return STRING
                return base
            elif name in ("runif", "rnorm", "numeric"):
                base = type_of_call(name, positional[:1] + positional[1:])
            else:
                base = type_of_call(name, positional if name not in ("sum", "min", "max") else positional)
        except ArityError:
            return TOP_T
        return self.refine(name, base, ts, args)

    def vector_call(self, args, names) -> RType:
        mode = None
        for a, n in zip(args, names):
            if n == "mode" or (n is None and a.kind == A.STR):
                mode = a.value
        t = {"numeric": "double", "double": "double", "integer": "integer", "character": "string",
             "logical": "logical", None: "logical"}.get(mode, "logical")
        return RType(VECTOR, t)

    def refine(self, name, base: RType, ts, args) -> RType:
        """Collapse ``vector(t)`` to ``t`` where the result has length one."""
        if base.ctor != VECTOR:
            return base
        if name in _SCALAR_RESULT:
            return basic(base.base)
        if name in _ELEMENTWISE:
            return with_shape(base.base, *ts) if ts else base
        if name in _LENGTH_ARG and args and _literal_one(args[0]):
            return basic(base.base)
        if name in ("as.integer", "as.double", "as.numeric", "as.logical", "as.character") and ts[0].is_scalar:
            return basic(base.base)
        return base

    def user_call(self, scope, name, args, names) -> RType:
        fn = self.p.functions[name]
        params = fn.names[:-1]
        ts = [self.expr(scope, a) for a in args]
        bound: Dict[int, RType] = {}
        free = list(range(len(params)))
        for t, n in zip(ts, names):
            if n is not None and n in params:
                i = params.index(n)
                bound[i] = t
                free.remove(i)
        pos = iter(free)
        for t, n in zip(ts, names):
            if n is None:
                i = next(pos, None)
                if i is not None:
                    bound[i] = t
        for i, t in bound.items():
            new = join(self.params[name][i], t)
            if new != self.params[name][i]:
                self.params[name][i] = new
                self.changed = True
        return self.returns[name]


def _integral_literal(node: A.SNode) -> bool:
    if node.kind == A.CALL and node.call_name() == "-" and len(node.children) == 2:
        node = node.children[1]
    return node.kind in (A.NUM_DBL, A.NUM_INT) and float(node.value).is_integer()


def _literal_one(node: A.SNode) -> bool:
    return node.kind in (A.NUM_DBL, A.NUM_INT) and node.value == 1


def _negative_literal(node: A.SNode) -> bool:
    if node.kind in (A.NUM_DBL, A.NUM_INT) and node.value < 0:
        return True
    return node.kind == A.CALL and node.call_name() == "-" and len(node.children) == 2


def infer(program: NormalizedProgram) -> TypeEnv:
    """Fixed-point type inference over all scopes of ``program``."""
    env = _Inferencer(program).run()
    return env


def infer_returns_of(env: TypeEnv, fname: str) -> RType:
    return env.returns.get(fname, UNKNOWN_T)


def dump_types(env: TypeEnv, fmt: str = "text", merged: bool = False) -> str:
    """Deterministic rendering sorted by variable name."""
    if fmt == "json":
        if merged:
            return json.dumps(env.table(), indent=1, sort_keys=True) + "\n"
        data = {f: env.table(f) for f in sorted(env.vars, key=lambda f: (f != TOP, f))}
        return json.dumps(data, indent=1) + "\n"
    lines = []
    if merged:
        tab = env.table()
        w = max([len(v) for v in tab] + [len("Variable")])
        lines.append(f"{'Variable'.ljust(w)}  Type")
        for v, t in tab.items():
            lines.append(f"{v.ljust(w)}  {t}")
        return "\n".join(lines) + ("\n" if lines else "")
    for f in sorted(env.vars, key=lambda f: (f != TOP, f)):
        tab = env.table(f)
        if not tab:
            continue
        lines.append(f"[{f}]")
        w = max(len(v) for v in tab)
        for v, t in tab.items():
            lines.append(f"  {v.ljust(w)}  {t}")
    return "\n".join(lines) + ("\n" if lines else "")


def types_from_json(text: str) -> Dict[str, Dict[str, str]]:
    return json.loads(text)
