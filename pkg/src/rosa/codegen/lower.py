"""Lower a normalized, fully typed program to C statements.

Every variable gets a C declaration derived from its inferred type, so a
program is translatable only when inference assigns each variable a
concrete numeric type.  Top-level numeric literal assignments become
command-line knobs (``name=value``) whose defaults are the literal values.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .. import rtypes as T
from ..cfg import TOP
from ..frontend import ast as A
from ..frontend.normalize import NormalizedProgram


class UntranslatableType(Exception):
    """A variable or expression has no C representation.

    ``variables`` lists ``(scope, name, type)`` for every offending variable
    when the failure comes from the declaration check.
    """

    def __init__(self, msg: str, variables=()):
        super().__init__(msg)
        self.variables = list(variables)


class UnsupportedBuiltin(Exception):
    """A call the C backend does not implement."""


SCALARS = ("integer", "double", "logical")
VECTORS = ("vec_double", "vec_integer", "vec_logical", "mat_double", "mat_integer")

_ARITH = {"+": "RT_ADD", "-": "RT_SUB", "*": "RT_MUL", "/": "RT_DIV", "^": "RT_POW",
          "%%": "RT_MOD", "%/%": "RT_IDIV"}
_COMPARE = ("==", "!=", "<", ">", "<=", ">=")
_LOGIC = {"&&": "&&", "||": "||", "&": "&&", "|": "||"}
_MATH = {"sqrt": "sqrt", "exp": "exp", "log": "log", "floor": "floor", "ceiling": "ceil", "abs": "fabs"}
_ALLOC = {"numeric": "double", "double": "double", "integer": "integer", "logical": "logical"}


def is_vec(kind: str) -> bool:
    return kind in VECTORS


def elem(kind: str) -> str:
    if kind in SCALARS:
        return kind
    if kind in VECTORS:
        return kind.split("_", 1)[1]
    raise UntranslatableType(f"{kind} has no element type")


def _suffix(kind: str) -> str:
    return "d" if elem(kind) == "double" else "i"


def mangle(name: str, prefix: str = "v_") -> str:
    if name.startswith(A.RESERVED_PREFIX):
        return "t_" + re.sub(r"[^0-9A-Za-z]", "_", name[len(A.RESERVED_PREFIX) + 1:])
    return prefix + re.sub(r"[^0-9A-Za-z_]", lambda m: f"_{ord(m.group()):x}", name)


def c_double(v: float) -> str:
    if v != v:
        return "NAN"
    if v in (float("inf"), float("-inf")):
        return "INFINITY" if v > 0 else "(-INFINITY)"
    s = repr(float(v))
    return s if any(c in s for c in ".en") else s + ".0"


@dataclass
class Record:
    name: str
    fields: List[Tuple[str, str]]


@dataclass
class Decl:
    scope: str
    name: str
    cname: str
    rtype: str
    ctype: str


@dataclass
class LoweredFunction:
    name: str
    cname: str
    ret: str
    params: List[Tuple[str, str]]
    locals: List[Tuple[str, str]]
    body: List[str]


@dataclass
class Knob:
    name: str
    ctype: str
    default: float


@dataclass
class LoweredProgram:
    records: List[Record] = field(default_factory=list)
    globals: List[Tuple[str, str]] = field(default_factory=list)
    functions: List[LoweredFunction] = field(default_factory=list)
    main: List[str] = field(default_factory=list)
    knobs: List[Knob] = field(default_factory=list)
    timers: List[str] = field(default_factory=list)
    decls: List[Decl] = field(default_factory=list)

    @property
    def features(self) -> List[str]:
        """Runtime facilities the program needs, by family."""
        text = "\n".join(self.main + [line for f in self.functions for line in f.body])
        fams = {
            "prng": ("rt_unif", "rt_runif", "rt_rnorm", "rt_sample", "rt_beta"),
            "vectors": ("rt_vec_", "rt_copy_", "rt_slice_", "rt_seq_", "rt_matrix_", "->d["),
            "vector-ops": ("rt_vop_", "rt_vmath_", "rt_neg_", "rt_sum_", "rt_mean_", "rt_sort_"),
            "boundary": ("rt_arg_", "rt_print_"),
            "timing": ("rt_now",),
        }
        return [k for k, pats in fams.items() if any(p in text for p in pats)]


@dataclass
class CExpr:
    code: str
    kind: str


class _Lowerer:
    def __init__(self, program: NormalizedProgram, env: T.TypeEnv):
        self.p = program
        self.env = env
        self.out = LoweredProgram()
        self.records: Dict[tuple, str] = {}
        self.counter = 0

    # -- types -----------------------------------------------------------------
    def kind_of(self, t: T.RType, what: str) -> str:
        if t.ctor == T.BASIC and t.base in SCALARS:
            return t.base
        if t.ctor == T.VECTOR and t.base in SCALARS:
            return "vec_" + t.base
        if t.ctor == T.MATRIX and t.base in ("double", "integer"):
            return "mat_" + t.base
        if t.ctor == T.RECORD:
            fields = tuple((k, self.kind_of(v, f"{what}${k}")) for k, v in t.fields)
            if fields not in self.records:
                name = "rec_" + "_".join(re.sub(r"[^0-9A-Za-z]", "_", k) for k, _ in fields)
                self.records[fields] = name
                self.out.records.append(Record(name, list(fields)))
            return self.records[fields]
        raise UntranslatableType(f"{what} has type {t}, which has no C representation")

    def record_fields(self, kind: str) -> Dict[str, str]:
        for fields, name in self.records.items():
            if name == kind:
                return dict(fields)
        raise UntranslatableType(f"{kind} is not a record")

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    # -- driver ----------------------------------------------------------------
    def check_declarations(self):
        bad = []
        for scope in sorted(self.env.vars, key=lambda f: (f != TOP, f)):
            for name, t in sorted(self.env.vars[scope].items()):
                if t.ctor == T.FUNCTION:
                    continue
                try:
                    self.kind_of(t, name)
                except UntranslatableType:
                    bad.append((scope, name, str(t)))
        if bad:
            listing = ", ".join(f"{n} ({t}{'' if s == TOP else ' in ' + s})" for s, n, t in bad)
            raise UntranslatableType(f"no C type for: {listing}", bad)
        self.records.clear()
        self.out.records.clear()

    def run(self) -> LoweredProgram:
        self.check_declarations()
        top = self.scope_vars(TOP)
        for name, kind in top.items():
            self.out.globals.append((mangle(name), kind))
        for fname in self.p.functions:
            self.out.functions.append(self.function(fname))
        fl = _ScopeLowerer(self, TOP, top, None)
        for s in self.p.statements:
            if s.kind == A.ASSIGN and s.children[1].kind == A.FUNDEF:
                continue
            fl.stmt(s, self.out.main, 1, top_level=True)
        return self.out

    def scope_vars(self, scope: str) -> Dict[str, str]:
        out = {}
        for name, t in sorted(self.env.vars.get(scope, {}).items()):
            if t.ctor == T.FUNCTION or (scope == TOP and name in self.p.functions):
                continue
            kind = self.kind_of(t, f"variable '{name}'" + ("" if scope == TOP else f" in {scope}"))
            out[name] = kind
            self.out.decls.append(Decl(scope, name, mangle(name), str(t), kind))
        return out

    def function(self, fname: str) -> LoweredFunction:
        fn = self.p.functions[fname]
        params = self.p.params(fname)
        vars_ = self.scope_vars(fname)
        missing = [p for p in params if p not in vars_]
        if missing:
            raise UntranslatableType(f"parameter '{missing[0]}' of {fname} has no inferred type")
        ret = self.env.returns.get(fname, T.UNKNOWN_T)
        ret_kind = self.kind_of(ret, f"return value of {fname}")
        sl = _ScopeLowerer(self, fname, vars_, ret_kind)
        body: List[str] = []
        written = {A.assign_target_name(n) for n in fn.walk() if n.kind == A.ASSIGN and n.value == "[<-"}
        for p in params:
            k = vars_[p]
            if p in written and is_vec(k):
                body.append(f"    {mangle(p)} = rt_copy_{_suffix(k)}({mangle(p)});")
        stmts = fn.children[-1].children
        for i, s in enumerate(stmts):
            last = i == len(stmts) - 1
            if last and _is_value_stmt(s):
                e = sl.coerce(sl.expr(s, ret_kind), ret_kind)
                body.append(f"    return {e};")
            else:
                sl.stmt(s, body, 1)
                if last and s.kind == A.ASSIGN and s.children[0].kind == A.SYM:
                    body.append(f"    return {sl.coerce(sl.sym(s.children[0].value), ret_kind)};")
        body.append(f'    rt_fail("{fname} returned without a value");')
        body.append(f"    return ({ret_kind}){{0}};")
        locals_ = [(mangle(n), k) for n, k in vars_.items() if n not in params]
        return LoweredFunction(fname, mangle(fname, "f_"), ret_kind,
                               [(mangle(p), vars_[p]) for p in params], locals_, body)


def _is_minus_one(n: A.SNode) -> bool:
    if n.kind in (A.NUM_INT, A.NUM_DBL):
        return n.value == -1
    return (n.kind == A.CALL and n.call_name() == "-" and len(n.args) == 1
            and n.args[0].kind in (A.NUM_INT, A.NUM_DBL) and n.args[0].value == 1)


def _is_value_stmt(s: A.SNode) -> bool:
    if s.kind in (A.ASSIGN, A.IF, A.FOR, A.WHILE, A.BREAK, A.NEXT, A.BLOCK):
        return False
    if s.kind == A.CALL and s.call_name() in ("return", "print", A.HINT):
        return False
    return True


class _ScopeLowerer:
    def __init__(self, lw: _Lowerer, scope: str, vars_: Dict[str, str], ret: Optional[str]):
        self.lw = lw
        self.scope = scope
        self.vars = vars_
        self.ret = ret

    # -- statements ------------------------------------------------------------
    def stmt(self, s: A.SNode, out: List[str], depth: int, top_level: bool = False):
        pad = "    " * depth
        k = s.kind
        if k == A.ASSIGN:
            out.extend(pad + line for line in self.assign(s, top_level))
        elif k == A.IF:
            cond = self.cond(s.children[0])
            out.append(f"{pad}if ({cond}) {{")
            self.block(s.children[1], out, depth + 1)
            if len(s.children) > 2 and s.children[2].children:
                out.append(f"{pad}}} else {{")
                self.block(s.children[2], out, depth + 1)
            out.append(f"{pad}}}")
        elif k == A.FOR:
            self.for_loop(s, out, depth)
        elif k == A.WHILE:
            out.append(f"{pad}while ({self.cond(s.children[0])}) {{")
            self.block(s.children[1], out, depth + 1)
            out.append(f"{pad}}}")
        elif k == A.BREAK:
            out.append(f"{pad}break;")
        elif k == A.NEXT:
            out.append(f"{pad}continue;")
        elif k == A.BLOCK:
            self.block(s, out, depth)
        elif k == A.CALL and s.call_name() == A.HINT:
            out.extend(pad + line for line in self.hint(s))
        elif k == A.CALL and s.call_name() == "return":
            if self.ret is None:
                raise UnsupportedBuiltin("return() outside a function")
            val = self.coerce(self.expr(s.children[1], self.ret), self.ret) if len(s.children) > 1 else "0"
            out.append(f"{pad}return {val};")
        elif k == A.CALL and s.call_name() == "print":
            out.append(f"{pad}{self.print_call(s)};")
        elif k == A.FUNDEF:
            raise UnsupportedBuiltin("nested function definitions")
        else:
            e = self.expr(s)
            out.append(f"{pad}(void)({e.code});")

    def block(self, b: A.SNode, out: List[str], depth: int):
        for s in b.children:
            self.stmt(s, out, depth)

    def hint(self, s: A.SNode) -> List[str]:
        kind = s.children[1].value
        key = s.children[2].value if len(s.children) > 2 else None
        if kind == "timer_start":
            if key not in self.lw.out.timers:
                self.lw.out.timers.append(key)
            return [f"tm_{key} = rt_now();"]
        if kind == "timer_stop":
            return [f'rt_report_time("{key}", rt_now() - tm_{key});']
        return []

    def var_kind(self, name: str) -> str:
        if name in self.vars:
            return self.vars[name]
        top = self.lw.env.vars.get(TOP, {})
        if self.scope != TOP and name in top and top[name].ctor != T.FUNCTION:
            return self.lw.kind_of(top[name], f"variable '{name}'")
        raise UntranslatableType(f"variable '{name}' in {self.scope} has no inferred type",
                                 [(self.scope, name, "unknown")])

    def assign(self, s: A.SNode, top_level: bool) -> List[str]:
        target, rhs = s.children
        if target.kind == A.INDEX:
            return [self.subassign(target, rhs)]
        if target.kind != A.SYM:
            raise UnsupportedBuiltin("assignment to a non-symbol target")
        name = target.value
        kind = self.var_kind(name)
        cname = mangle(name)
        if top_level and rhs.kind in (A.NUM_INT, A.NUM_DBL) and kind in ("integer", "double"):
            if name not in {kb.name for kb in self.lw.out.knobs}:
                self.lw.out.knobs.append(Knob(name, kind, rhs.value))
            fn = "rt_arg_i" if kind == "integer" else "rt_arg_d"
            dflt = str(int(rhs.value)) if kind == "integer" else c_double(float(rhs.value))
            return [f'{cname} = {fn}("{name}", {dflt});']
        e = self.expr(rhs, want=kind)
        if is_vec(kind) and rhs.kind == A.SYM and is_vec(e.kind):
            return [f"{cname} = rt_copy_{_suffix(kind)}({self.coerce(e, kind)});"]
        return [f"{cname} = {self.coerce(e, kind)};"]

    def subassign(self, target: A.SNode, rhs: A.SNode) -> str:
        base = target.children[0]
        if base.kind != A.SYM:
            raise UnsupportedBuiltin("nested sub-assignment")
        kind = self.var_kind(base.value)
        if not is_vec(kind):
            raise UntranslatableType(f"sub-assignment into scalar '{base.value}'")
        slot = self.element_ref(mangle(base.value), kind, target.children[1:])
        val = self.coerce(self.expr(rhs), elem(kind))
        return f"{slot} = {val};"

    def element_ref(self, code: str, kind: str, idx: list) -> str:
        if len(idx) == 1:
            i = self.expr(idx[0])
            if is_vec(i.kind):
                raise UnsupportedBuiltin("vector-valued subscripts outside a:b")
            return f"{code}->d[{self.offset(i)}]"
        if len(idx) == 2 and kind.startswith("mat_"):
            i, j = (self.expr(x) for x in idx)
            if is_vec(i.kind) or is_vec(j.kind):
                raise UnsupportedBuiltin("matrix slices")
            return f"{code}->d[{self.offset(i)} + ({self.offset(j)}) * {code}->nrow]"
        raise UnsupportedBuiltin(f"{len(idx)}-subscript indexing")

    @staticmethod
    def offset(i: CExpr) -> str:
        if i.kind == "double":
            return f"(long)({i.code}) - 1"
        return f"({i.code}) - 1"

    def for_loop(self, s: A.SNode, out: List[str], depth: int):
        pad = "    " * depth
        var = mangle(s.value)
        vk = self.var_kind(s.value)
        rng, body = s.children
        k = self.lw.fresh("k")
        name = rng.call_name() if rng.kind == A.CALL else None
        if name == ":":
            a, b = (self.expr(x) for x in rng.args)
            lo, hi, n = self.lw.fresh("lo"), self.lw.fresh("hi"), self.lw.fresh("n")
            out.append(f"{pad}{{")
            out.append(f"{pad}    double {lo} = {a.code}, {hi} = {b.code};")
            out.append(f"{pad}    long {n} = (long)floor(fabs({hi} - {lo}) + 1e-10) + 1;")
            out.append(f"{pad}    for (long {k} = 0; {k} < {n}; {k}++) {{")
            step = f"({hi} >= {lo} ? {k} : -{k})"
            out.append(f"{pad}        {var} = {lo} + {step};")
            self.block(body, out, depth + 2)
            out.append(f"{pad}    }}")
            out.append(f"{pad}}}")
            return
        if name in ("seq_along", "seq_len"):
            arg = self.expr(rng.args[0])
            if name == "seq_along":
                count = f"{arg.code}->len" if is_vec(arg.kind) else "1"
            else:
                count = f"(long)({arg.code})"
            n = self.lw.fresh("n")
            out.append(f"{pad}{{")
            out.append(f"{pad}    long {n} = {count};")
            out.append(f"{pad}    for (long {k} = 0; {k} < {n}; {k}++) {{")
            out.append(f"{pad}        {var} = {k} + 1;")
            self.block(body, out, depth + 2)
            out.append(f"{pad}    }}")
            out.append(f"{pad}}}")
            return
        seq = self.expr(rng)
        if not is_vec(seq.kind):
            out.append(f"{pad}{var} = {self.coerce(seq, vk)};")
            out.append(f"{pad}do {{")
            self.block(body, out, depth + 1)
            out.append(f"{pad}}} while (0);")
            return
        it = self.lw.fresh("seq")
        ctype = seq.kind
        out.append(f"{pad}{{")
        out.append(f"{pad}    {ctype} {it} = {seq.code};")
        out.append(f"{pad}    for (long {k} = 0; {k} < {it}->len; {k}++) {{")
        out.append(f"{pad}        {var} = {it}->d[{k}];")
        self.block(body, out, depth + 2)
        out.append(f"{pad}    }}")
        out.append(f"{pad}}}")

    def cond(self, e: A.SNode) -> str:
        c = self.expr(e)
        if is_vec(c.kind):
            return f"({c.code})->d[0]"
        return c.code

    # -- conversions -------------------------------------------------------------
    def coerce(self, e: CExpr, kind: str) -> str:
        if e.kind == kind:
            return e.code
        if kind in SCALARS:
            if is_vec(e.kind):
                return f"({e.code})->d[0]"
            if e.kind not in SCALARS:
                raise UntranslatableType(f"cannot convert {e.kind} to {kind}")
            if kind == "logical":
                return f"(({e.code}) != 0)"
            return f"({kind})({e.code})"
        if is_vec(kind):
            ek = elem(kind)
            if e.kind in SCALARS:
                if ek == "double":
                    return f"rt_scalar_d((double)({e.code}))"
                return f"rt_rep_i((int)({e.code}), 1)"
            if is_vec(e.kind):
                if elem(e.kind) == ek or (ek != "double" and elem(e.kind) != "double"):
                    return e.code
                if ek == "double":
                    return f"rt_as_vec_d({e.code})"
            raise UntranslatableType(f"cannot convert {e.kind} to {kind}")
        if e.kind != kind:
            raise UntranslatableType(f"cannot convert {e.kind} to {kind}")
        return e.code

    def as_dvec(self, e: CExpr) -> str:
        return self.coerce(e, "vec_double")

    # -- expressions -------------------------------------------------------------
    def sym(self, name: str) -> CExpr:
        if name in ("T", "F") and name not in self.vars:
            return CExpr("1" if name == "T" else "0", "logical")
        return CExpr(mangle(name), self.var_kind(name))

    def expr(self, e: A.SNode, want: Optional[str] = None) -> CExpr:
        k = e.kind
        if k == A.NUM_INT:
            return CExpr(str(int(e.value)), "integer")
        if k == A.NUM_DBL:
            return CExpr(c_double(e.value), "double")
        if k == A.LOGICAL:
            return CExpr("1" if e.value else "0", "logical")
        if k == A.SYM:
            return self.sym(e.value)
        if k == A.INDEX:
            return self.index(e)
        if k == A.CALL:
            return self.call(e, want)
        if k in (A.STR, A.NUM_CPLX):
            raise UntranslatableType(f"{k.lower()} literals have no C representation")
        if k in (A.NA_LIT, A.NULL_LIT):
            raise UntranslatableType("NA and NULL have no C representation")
        raise UnsupportedBuiltin(f"{k} expressions")

    def index(self, e: A.SNode) -> CExpr:
        base = self.expr(e.children[0])
        idx = e.children[1:]
        if not is_vec(base.kind):
            raise UntranslatableType(f"indexing a {base.kind} value")
        if len(idx) == 1 and _is_minus_one(idx[0]):
            return CExpr(f"rt_drop_first_{_suffix(base.kind)}({base.code})", "vec_" + elem(base.kind))
        if len(idx) == 1 and idx[0].kind == A.CALL and idx[0].call_name() == "-" and len(idx[0].args) == 1:
            raise UnsupportedBuiltin("negative subscripts other than x[-1]")
        if len(idx) == 1 and idx[0].kind == A.CALL and idx[0].call_name() == ":":
            a, b = (self.expr(x) for x in idx[0].args)
            sx = _suffix(base.kind)
            vk = "vec_" + elem(base.kind)
            return CExpr(f"rt_slice_{sx}({base.code}, {a.code}, {b.code})", vk)
        return CExpr(self.element_ref(base.code, base.kind, idx), elem(base.kind))

    def call(self, e: A.SNode, want: Optional[str]) -> CExpr:
        name = e.call_name()
        if name is None:
            raise UnsupportedBuiltin("calls through computed functions")
        args = e.args
        names = e.arg_names()
        if name in self.lw.p.functions:
            return self.user_call(name, args, names)
        if name == "(":
            inner = self.expr(args[0], want)
            return CExpr(f"({inner.code})", inner.kind)
        if name in _ARITH:
            return self.arith(name, args)
        if name in _COMPARE:
            return self.compare(name, args)
        if name in _LOGIC:
            a, b = (self.expr(x) for x in args)
            return CExpr(f"({self.cond_of(a)} {_LOGIC[name]} {self.cond_of(b)})", "logical")
        if name == "!":
            a = self.expr(args[0])
            return CExpr(f"(!{self.cond_of(a)})", "logical")
        if name == "$":
            base = self.expr(args[0])
            fields = self.lw.record_fields(base.kind)
            fld = args[1].value
            if fld not in fields:
                raise UntranslatableType(f"record has no field '{fld}'")
            return CExpr(f"{base.code}.{re.sub(r'[^0-9A-Za-z]', '_', fld)}", fields[fld])
        fn = getattr(self, "b_" + name.replace(".", "_"), None)
        if fn is None:
            raise UnsupportedBuiltin(f"{name}() is not supported by the C backend")
        return fn(args, names, want)

    def cond_of(self, e: CExpr) -> str:
        return f"({e.code})->d[0]" if is_vec(e.kind) else e.code

    def arith(self, op: str, args: list) -> CExpr:
        if len(args) == 1:
            a = self.expr(args[0])
            if is_vec(a.kind):
                if op != "-":
                    return a
                return CExpr(f"rt_neg_d({self.as_dvec(a)})", "vec_double")
            ek = "integer" if a.kind == "logical" else a.kind
            return CExpr(f"({op}{a.code})", ek)
        a, b = (self.expr(x) for x in args)
        ea, eb = elem(a.kind), elem(b.kind)
        dbl = op in ("/", "^") or "double" in (ea, eb)
        if op == "%%" and not dbl:
            pass
        elif op in ("%%", "%/%") and "double" in (ea, eb):
            # integral literal operands keep integer arithmetic exact and cheap
            lit = args[1] if eb == "double" else args[0]
            other = ea if eb == "double" else eb
            if (other != "double" and lit.kind == A.NUM_DBL and float(lit.value).is_integer()
                    and not is_vec(a.kind) and not is_vec(b.kind)):
                ai = a.code if ea != "double" else str(int(args[0].value))
                bi = b.code if eb != "double" else str(int(args[1].value))
                fn = "rt_mod_i" if op == "%%" else "rt_idiv_i"
                return CExpr(f"(double){fn}({ai}, {bi})", "double")
        if is_vec(a.kind) or is_vec(b.kind):
            shape_mat = a.kind.startswith("mat_") or b.kind.startswith("mat_")
            if dbl:
                code = f"rt_vop_d({_ARITH[op]}, {self.as_dvec(a)}, {self.as_dvec(b)})"
                return CExpr(code, "mat_double" if shape_mat else "vec_double")
            ca = self.coerce(a, "vec_integer")
            cb = self.coerce(b, "vec_integer")
            return CExpr(f"rt_vop_i({_ARITH[op]}, {ca}, {cb})", "mat_integer" if shape_mat else "vec_integer")
        if dbl:
            ca = a.code if ea == "double" else f"(double)({a.code})"
            cb = b.code if eb == "double" else f"(double)({b.code})"
            if op == "^":
                return CExpr(f"pow({ca}, {cb})", "double")
            if op == "%%":
                return CExpr(f"rt_mod_d({ca}, {cb})", "double")
            if op == "%/%":
                return CExpr(f"rt_idiv_d({ca}, {cb})", "double")
            return CExpr(f"({ca} {op} {cb})", "double")
        if op == "%%":
            return CExpr(f"rt_mod_i({a.code}, {b.code})", "integer")
        if op == "%/%":
            return CExpr(f"rt_idiv_i({a.code}, {b.code})", "integer")
        return CExpr(f"({a.code} {op} {b.code})", "integer")

    def compare(self, op: str, args: list) -> CExpr:
        a, b = (self.expr(x) for x in args)
        if is_vec(a.kind) or is_vec(b.kind):
            raise UnsupportedBuiltin(f"vector comparison with {op}")
        return CExpr(f"({a.code} {op} {b.code})", "logical")

    def user_call(self, fname: str, args: list, names: list) -> CExpr:
        fn = self.lw.p.functions[fname]
        params = self.lw.p.params(fname)
        defaults = fn.children[:-1]
        bound: Dict[str, A.SNode] = {}
        pos = [p for p in params]
        for a, nm in zip(args, names):
            if nm:
                if nm not in params:
                    raise UnsupportedBuiltin(f"{fname}() has no parameter '{nm}'")
                bound[nm] = a
                pos.remove(nm)
        for a, nm in zip(args, names):
            if not nm:
                if not pos:
                    raise UnsupportedBuiltin(f"too many arguments to {fname}()")
                bound[pos.pop(0)] = a
        cargs = []
        for p, d in zip(params, defaults):
            node = bound.get(p)
            if node is None:
                if d.is_empty_arg():
                    raise UnsupportedBuiltin(f"argument '{p}' of {fname}() is missing")
                node = d
            pk = self.lw.kind_of(self.lw.env.vars[fname][p], f"parameter '{p}' of {fname}")
            cargs.append(self.coerce(self.expr(node), pk))
        ret = self.lw.kind_of(self.lw.env.returns.get(fname, T.UNKNOWN_T), f"return value of {fname}")
        return CExpr(f"{mangle(fname, 'f_')}({', '.join(cargs)})", ret)

    def print_call(self, s: A.SNode) -> str:
        v = self.expr(s.args[0])
        if v.kind in SCALARS:
            return f"rt_print_{v.kind[0]}({v.code})"
        if v.kind.startswith("vec_"):
            return f"rt_print_vec_{elem(v.kind)[0]}({v.code})"
        raise UnsupportedBuiltin(f"print() of {v.kind}")

    # -- builtins ----------------------------------------------------------------
    @staticmethod
    def _args(fname, args, names, formals, required=()) -> Dict[str, A.SNode]:
        out: Dict[str, A.SNode] = {}
        free = list(formals)
        for a, nm in zip(args, names):
            if nm:
                match = [f for f in free if f == nm] or [f for f in free if f.startswith(nm)]
                if not match:
                    raise UnsupportedBuiltin(f"{fname}() argument '{nm}'")
                out[match[0]] = a
                free.remove(match[0])
        for a, nm in zip(args, names):
            if not nm:
                if not free:
                    raise UnsupportedBuiltin(f"too many arguments to {fname}()")
                out[free.pop(0)] = a
        for r in required:
            if r not in out:
                raise UnsupportedBuiltin(f"{fname}() needs '{r}'")
        return out

    def _len_arg(self, node: A.SNode) -> str:
        n = self.expr(node)
        if is_vec(n.kind):
            raise UnsupportedBuiltin("vector-valued length argument")
        return f"(long)({n.code})"

    def _alloc(self, ek: str, n: str) -> CExpr:
        if ek == "double":
            return CExpr(f"rt_vec_d({n})", "vec_double")
        return CExpr(f"rt_vec_i({n})", "vec_" + ek)

    def b_numeric(self, args, names, want):
        a = self._args("numeric", args, names, ["length"])
        return self._alloc("double", self._len_arg(a["length"]) if "length" in a else "0")

    b_double = b_numeric

    def b_integer(self, args, names, want):
        a = self._args("integer", args, names, ["length"])
        return self._alloc("integer", self._len_arg(a["length"]) if "length" in a else "0")

    def b_logical(self, args, names, want):
        a = self._args("logical", args, names, ["length"])
        return self._alloc("logical", self._len_arg(a["length"]) if "length" in a else "0")

    def b_vector(self, args, names, want):
        a = self._args("vector", args, names, ["mode", "length"])
        mode = "logical"
        if "mode" in a:
            if a["mode"].kind != A.STR or a["mode"].value not in _ALLOC:
                raise UnsupportedBuiltin("vector() with this mode")
            mode = _ALLOC[a["mode"].value]
        # a logical vector that inference widened is allocated at its final type
        if want in ("vec_double", "vec_integer", "vec_logical"):
            mode = elem(want)
        return self._alloc(mode, self._len_arg(a["length"]) if "length" in a else "0")

    def b_length(self, args, names, want):
        x = self.expr(args[0])
        if is_vec(x.kind):
            return CExpr(f"(integer)({x.code})->len", "integer")
        return CExpr("1", "integer")

    def b_nrow(self, args, names, want):
        x = self.expr(args[0])
        if not x.kind.startswith("mat_"):
            raise UntranslatableType("nrow() of a non-matrix")
        return CExpr(f"(integer)({x.code})->nrow", "integer")

    def b_ncol(self, args, names, want):
        x = self.expr(args[0])
        if not x.kind.startswith("mat_"):
            raise UntranslatableType("ncol() of a non-matrix")
        return CExpr(f"(integer)({x.code})->ncol", "integer")

    def _math(self, fname, args):
        x = self.expr(args[0])
        if is_vec(x.kind):
            return CExpr(f'rt_vmath_d("{_MATH[fname]}", {self.as_dvec(x)})', "vec_double")
        if fname == "abs" and x.kind != "double":
            return CExpr(f"abs({x.code})", "integer")
        code = x.code if x.kind == "double" else f"(double)({x.code})"
        return CExpr(f"{_MATH[fname]}({code})", "double")

    def b_sqrt(self, args, names, want):
        return self._math("sqrt", args)

    def b_exp(self, args, names, want):
        return self._math("exp", args)

    def b_log(self, args, names, want):
        if len(args) != 1:
            raise UnsupportedBuiltin("log() with a base")
        return self._math("log", args)

    def b_floor(self, args, names, want):
        return self._math("floor", args)

    def b_ceiling(self, args, names, want):
        return self._math("ceiling", args)

    def b_abs(self, args, names, want):
        return self._math("abs", args)

    def b_sum(self, args, names, want):
        if len(args) != 1 or any(names):
            raise UnsupportedBuiltin("sum() of several arguments")
        x = args[0]
        if x.kind == A.INDEX and len(x.children) == 2 and x.children[1].call_name() == ":":
            base = self.expr(x.children[0])
            if is_vec(base.kind):
                a, b = (self.expr(v) for v in x.children[1].args)
                kind = "double" if elem(base.kind) == "double" else "integer"
                return CExpr(f"rt_sum_range_{_suffix(base.kind)}({base.code}, {a.code}, {b.code})", kind)
        v = self.expr(x)
        if not is_vec(v.kind):
            return CExpr(v.code, "integer" if v.kind == "logical" else v.kind)
        kind = "double" if elem(v.kind) == "double" else "integer"
        return CExpr(f"rt_sum_{_suffix(v.kind)}({v.code})", kind)

    def b_mean(self, args, names, want):
        v = self.expr(args[0])
        if not is_vec(v.kind):
            return CExpr(f"(double)({v.code})", "double")
        return CExpr(f"rt_mean_{_suffix(v.kind)}({v.code})", "double")

    def b_runif(self, args, names, want):
        a = self._args("runif", args, names, ["n", "min", "max"], ("n",))
        if "min" in a or "max" in a:
            raise UnsupportedBuiltin("runif() with bounds")
        n = a["n"]
        if n.kind in (A.NUM_INT, A.NUM_DBL) and n.value == 1:
            return CExpr("rt_unif()", "double")
        return CExpr(f"rt_runif({self._len_arg(n)})", "vec_double")

    def b_rnorm(self, args, names, want):
        a = self._args("rnorm", args, names, ["n", "mean", "sd"], ("n",))
        if "mean" in a or "sd" in a:
            raise UnsupportedBuiltin("rnorm() with mean or sd")
        return CExpr(f"rt_rnorm({self._len_arg(a['n'])})", "vec_double")

    def _population(self, node: A.SNode) -> CExpr:
        if node.kind == A.CALL and node.call_name() == ":":
            a, b = (self.expr(x) for x in node.args)
            if elem(a.kind) == "double" and not (node.args[0].kind == A.NUM_DBL and float(node.args[0].value).is_integer()):
                raise UnsupportedBuiltin("a:b with a fractional start")
            return CExpr(f"rt_seq_i({a.code}, {b.code})", "vec_integer")
        x = self.expr(node)
        if not is_vec(x.kind):
            return CExpr(f"rt_seq_i(1, {x.code})", "vec_integer")
        return x

    def b_sample(self, args, names, want):
        a = self._args("sample", args, names, ["x", "size", "replace", "prob"], ("x",))
        if "prob" in a:
            raise UnsupportedBuiltin("sample() with prob")
        x = self._population(a["x"])
        # a negative size means the whole population
        size = self._len_arg(a["size"]) if "size" in a else "-1"
        rep = self.cond_of(self.expr(a["replace"])) if "replace" in a else "0"
        sx = _suffix(x.kind)
        return CExpr(f"rt_sample_{sx}({x.code}, {size}, {rep})", "vec_" + elem(x.kind))

    def b_rep(self, args, names, want):
        a = self._args("rep", args, names, ["x", "times"], ("x",))
        x = self.expr(a["x"])
        if is_vec(x.kind):
            raise UnsupportedBuiltin("rep() of a vector")
        n = self._len_arg(a["times"]) if "times" in a else "1"
        if x.kind == "double":
            return CExpr(f"rt_rep_d({x.code}, {n})", "vec_double")
        return CExpr(f"rt_rep_i({x.code}, {n})", "vec_" + x.kind)

    def b_sort(self, args, names, want):
        a = self._args("sort", args, names, ["x", "decreasing"], ("x",))
        if "decreasing" in a:
            raise UnsupportedBuiltin("sort(decreasing=)")
        x = self.expr(a["x"])
        if not is_vec(x.kind):
            return x
        return CExpr(f"rt_sort_{_suffix(x.kind)}({x.code})", "vec_" + elem(x.kind))

    def b_matrix(self, args, names, want):
        a = self._args("matrix", args, names, ["data", "nrow", "ncol", "byrow"], ("data", "nrow", "ncol"))
        if "byrow" in a:
            raise UnsupportedBuiltin("matrix(byrow=)")
        d = self.as_dvec(self.expr(a["data"]))
        return CExpr(f"rt_matrix_d({d}, {self._len_arg(a['nrow'])}, {self._len_arg(a['ncol'])})",
                     "mat_double")

    def b_list(self, args, names, want):
        if want is None or not want.startswith("rec_"):
            raise UntranslatableType("list() outside a typed record assignment")
        fields = self.lw.record_fields(want)
        if list(fields) != list(names):
            raise UntranslatableType("list() fields do not match the inferred record")
        vals = [self.coerce(self.expr(x), fields[n]) for x, n in zip(args, names)]
        return CExpr(f"({want}){{{', '.join(vals)}}}", want)

    def b_as_integer(self, args, names, want):
        x = self.expr(args[0])
        if is_vec(x.kind):
            raise UnsupportedBuiltin("as.integer() of a vector")
        return CExpr(f"(integer)({x.code})", "integer")

    def b_as_numeric(self, args, names, want):
        x = self.expr(args[0])
        if is_vec(x.kind):
            return CExpr(self.as_dvec(x), "vec_double")
        return CExpr(f"(double)({x.code})", "double")

    b_as_double = b_as_numeric


def lower(program: NormalizedProgram, env: Optional[T.TypeEnv] = None) -> LoweredProgram:
    """Translate ``program``; raises :class:`UntranslatableType` or :class:`UnsupportedBuiltin`."""
    if env is None:
        env = T.infer(program)
    return _Lowerer(program, env).run()
