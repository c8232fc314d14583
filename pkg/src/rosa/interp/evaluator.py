"""Closure-compiling evaluator with copy-on-write and space-reuse hooks.

Each AST node is compiled once into a Python closure ``f(frame) -> value``.
Unannotated runs follow plain copy-on-write: a sub-assignment copies when
the target's ``named`` field says it may be shared.  Annotated runs consult
per-statement facts (variables dead after the statement, destination
no-alias flag) to

* skip stores into targets that are never read again,
* write in place when every other binding of the value is dead, and
* let arithmetic overwrite the buffer of an operand that dies here.

A binding whose buffer was given away this way is recorded as *consumed*;
its contents are no longer meaningful, which is fine because no later
statement reads it.
"""

from __future__ import annotations

import gc
import io
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

from ..cfg import TOP
from ..frontend import ast as A
from ..frontend.normalize import NormalizedProgram
from . import ops
from .builtins import BUILTINS, b_elem, match_args
from .ops import MISSING
from .prng import Prng
from .values import (
    INT_MAX, AllocMetrics, Closure, RRuntimeError, RValue, UnsupportedBuiltin, as_float_scalar,
    pop_metrics, push_metrics, runtime_rtype, to_vector, truthy,
)

_UNBOUND = object()


class BreakSig(Exception):
    pass


class NextSig(Exception):
    pass


class ReturnSig(Exception):
    def __init__(self, value):
        self.value = value


class Frame:
    __slots__ = ("vars", "parent", "consumed", "scope")

    def __init__(self, parent: Optional["Frame"], scope: str):
        self.vars: Dict[str, object] = {}
        self.parent = parent
        self.consumed: set = set()
        self.scope = scope

    def lookup(self, name: str, span=None):
        f = self.parent
        while f is not None:
            v = f.vars.get(name, _UNBOUND)
            if v is not _UNBOUND:
                return v
            f = f.parent
        raise RRuntimeError(f"object '{name}' not found", span)

    def owner(self, name: str) -> "Frame":
        """Frame that ``<<-`` writes: nearest enclosing binder, else the global frame."""
        f = self.parent
        last = self
        while f is not None:
            if name in f.vars:
                return f
            last = f
            f = f.parent
        return last


def bind(frame: Frame, name: str, v):
    vars_ = frame.vars
    old = vars_.get(name)
    if type(v) is RValue:
        if old is v:
            return v
        if v.refs > 0:
            v.named = 2
        elif v.named == 0:
            v.named = 1
        v.refs += 1
    if type(old) is RValue:
        old.refs -= 1
    vars_[name] = v
    return v


def release(frame: Frame):
    for v in frame.vars.values():
        if type(v) is RValue:
            v.refs -= 1


@dataclass
class RunResult:
    output: str
    env: Dict[str, object]
    consumed: set
    metrics: dict
    timings: Dict[str, float] = field(default_factory=dict)
    violations: list = field(default_factory=list)
    elapsed: float = 0.0


def _count_syms(node: A.SNode, out: Dict[str, int]):
    if node.kind == A.SYM and node.value:
        out[node.value] = out.get(node.value, 0) + 1
        return
    if node.kind == A.CALL and node.children and node.children[0].kind == A.SYM:
        for c in node.children[1:]:
            _count_syms(c, out)
        return
    for c in node.children:
        _count_syms(c, out)


def _integral(v) -> bool:
    if type(v) is float:
        return v == v and v == math.floor(v)
    if type(v) is RValue and v.type == "double":
        return all(x is None or (x == x and x == math.floor(x)) for x in v.data)
    return False


class _Ctx:
    __slots__ = ("scope", "dead", "no_alias", "donors", "span")

    def __init__(self, scope, dead=frozenset(), no_alias=False, donors=frozenset(), span=None):
        self.scope = scope
        self.dead = dead
        self.no_alias = no_alias
        self.donors = donors
        self.span = span


class Interpreter:
    """Evaluate a normalized program.

    ``annotations`` maps statement node ids to objects with ``dead_after``
    and ``no_alias`` attributes; ``None`` gives plain copy-on-write.
    ``audit`` is an optional type environment checked at every assignment.
    """

    def __init__(self, program: NormalizedProgram, annotations=None, seed: int = 1,
                 stream=None, audit=None):
        self.program = program
        self.annotations = annotations
        self.annotated = annotations is not None
        self.prng = Prng(seed)
        self.metrics = AllocMetrics()
        self.stream = stream
        self._out = io.StringIO()
        self.timings: Dict[str, float] = {}
        self._timer_starts: Dict[str, float] = {}
        self.audit = audit
        self.violations: list = []
        self.globals = Frame(None, TOP)

    # -- output ------------------------------------------------------------------
    def emit(self, text: str):
        self._out.write(text)
        if self.stream is not None:
            self.stream.write(text)

    def make_list(self, items, names):
        for v in items:
            if type(v) is RValue:
                v.refs += 1
                v.named = 2
        return RValue("list", list(items), None, names)

    # -- driver --------------------------------------------------------------------
    def run(self) -> RunResult:
        push_metrics(self.metrics)
        t0 = time.perf_counter()
        try:
            body = self.compile_block(self.program.statements, _Ctx(TOP))
            try:
                for f in body:
                    f(self.globals)
            except ReturnSig:
                raise RRuntimeError("no function to return from, jumping to top level")
            except (BreakSig, NextSig):
                raise RRuntimeError("no loop for break/next, jumping to top level")
            except RecursionError:
                raise RRuntimeError("evaluation nested too deeply")
            del body
            gc.collect()
            elapsed = time.perf_counter() - t0
            env = {k: v for k, v in self.globals.vars.items()}
            report = self.metrics.report()
        finally:
            pop_metrics()
        return RunResult(self._out.getvalue(), env, set(self.globals.consumed), report,
                         dict(self.timings), list(self.violations), elapsed)

    # -- compilation -----------------------------------------------------------------
    def stmt_ctx(self, node: A.SNode, scope: str) -> _Ctx:
        if not self.annotated:
            return _Ctx(scope, span=node.span)
        ann = self.annotations.get(node.id)
        if ann is None:
            return _Ctx(scope, span=node.span)
        counts: Dict[str, int] = {}
        if node.kind == A.ASSIGN:
            t = node.children[0]
            if t.kind == A.INDEX:
                for c in t.children[1:]:
                    _count_syms(c, counts)
            _count_syms(node.children[1], counts)
        else:
            _count_syms(node, counts)
        dead = frozenset(ann.dead_after)
        donors = frozenset(v for v in dead if counts.get(v) == 1)
        return _Ctx(scope, dead, bool(ann.no_alias), donors, node.span)

    def compile_block(self, stmts, ctx: _Ctx) -> list:
        return [self.compile_stmt(s, ctx.scope) for s in stmts]

    def compile_stmt(self, s: A.SNode, scope: str):
        k = s.kind
        if k == A.ASSIGN:
            return self.compile_assign(s, self.stmt_ctx(s, scope))
        if k == A.IF:
            return self.compile_if(s, scope)
        if k == A.FOR:
            return self.compile_for(s, scope)
        if k == A.WHILE:
            return self.compile_while(s, scope)
        if k == A.BREAK:
            def f_break(env):
                raise BreakSig()
            return f_break
        if k == A.NEXT:
            def f_next(env):
                raise NextSig()
            return f_next
        if k == A.BLOCK:
            body = self.compile_block(s.children, _Ctx(scope))

            def f_block(env):
                r = None
                for g in body:
                    r = g(env)
                return r
            return f_block
        if A.is_hint(s):
            return self.compile_hint(s)
        return self.compile_expr(s, self.stmt_ctx(s, scope))

    def compile_hint(self, s: A.SNode):
        kind = s.children[1].value
        key = s.children[2].value if len(s.children) > 2 else None
        if kind == "timer_start":
            def f_start(env):
                self._timer_starts[key] = time.perf_counter()
            return f_start
        if kind == "timer_stop":
            def f_stop(env):
                t0 = self._timer_starts.pop(key, None)
                if t0 is not None:
                    self.timings[key] = time.perf_counter() - t0
            return f_stop

        def f_gc(env):
            gc.collect()
        return f_gc

    def compile_if(self, s: A.SNode, scope: str):
        cond = self.compile_expr(s.children[0], self.stmt_ctx(s, scope))
        then = self.compile_block(s.children[1].children, _Ctx(scope))
        other = self.compile_block(s.children[2].children, _Ctx(scope)) if len(s.children) > 2 else []
        span = s.span

        def f_if(env):
            c = cond(env)
            if c is True or (c is not False and truthy(c, "if")):
                arm = then
            else:
                arm = other
            r = None
            for g in arm:
                r = g(env)
            return r
        f_if.span = span
        return f_if

    def compile_while(self, s: A.SNode, scope: str):
        cond = self.compile_expr(s.children[0], _Ctx(scope, span=s.span))
        body = self.compile_block(s.children[1].children, _Ctx(scope))

        def f_while(env):
            while True:
                c = cond(env)
                if not (c is True or (c is not False and truthy(c, "while"))):
                    break
                try:
                    for g in body:
                        g(env)
                except NextSig:
                    continue
                except BreakSig:
                    break
            return None
        return f_while

    def compile_for(self, s: A.SNode, scope: str):
        var = s.value
        rng = s.children[0]
        body = self.compile_block(s.children[1].children, _Ctx(scope))
        jumps = _has_jump(s.children[1])
        if rng.kind == A.CALL and rng.call_name() == ":" and len(rng.children) == 3:
            fa = self.compile_expr(rng.children[1], _Ctx(scope))
            fb = self.compile_expr(rng.children[2], _Ctx(scope))

            def seq(env):
                return _colon_iter(fa(env), fb(env))
        else:
            fs = self.compile_expr(rng, _Ctx(scope))

            def seq(env):
                return _elements(fs(env))

        def f_for(env):
            it, boxed = seq(env)
            vars_ = env.vars
            old = vars_.get(var)
            if type(old) is RValue:
                old.refs -= 1
                vars_[var] = None
            for v in it:
                if boxed and type(v) is RValue:
                    bind(env, var, v)
                else:
                    cur = vars_.get(var)
                    if type(cur) is RValue:
                        cur.refs -= 1
                    vars_[var] = v
                if jumps:
                    try:
                        for g in body:
                            g(env)
                    except NextSig:
                        continue
                    except BreakSig:
                        break
                else:
                    for g in body:
                        g(env)
            return None
        return f_for

    # -- assignment ----------------------------------------------------------------------
    def compile_assign(self, s: A.SNode, ctx: _Ctx):
        target, rhs = s.children
        op = s.value
        if rhs.kind == A.FUNDEF:
            name = target.value
            params = list(rhs.names[:-1])
            defaults = {}
            for p, d in zip(params, rhs.children[:-1]):
                if not d.is_empty_arg():
                    defaults[p] = d
            clo = Closure(name, params, defaults, rhs.children[-1], None)

            def f_def(env):
                clo.env = env
                bind(env, name, clo)
                return clo
            return f_def
        if target.kind == A.INDEX:
            return self.compile_subassign(s, target, rhs, ctx)
        if target.kind == A.STR:
            target = A.sym(target.value)
        if target.kind != A.SYM:
            raise RRuntimeError("invalid assignment target", s.span)
        name = target.value
        fe = self.compile_expr(rhs, ctx)
        superassign = op == "<<-"
        audit = self._auditor(ctx.scope, name)
        annotated = self.annotated

        if superassign:
            def f_super(env):
                v = fe(env)
                bind(env.owner(name), name, v)
                if audit:
                    audit(v)
                return v
            return f_super

        def f_assign(env):
            v = fe(env)
            vars_ = env.vars
            old = vars_.get(name)
            if type(v) is RValue:
                if old is v:
                    return v
                if v.refs > 0:
                    v.named = 2
                elif v.named == 0:
                    v.named = 1
                v.refs += 1
            if type(old) is RValue:
                old.refs -= 1
            vars_[name] = v
            if annotated:
                env.consumed.discard(name)
            if audit:
                audit(v)
            return v
        return f_assign

    def compile_subassign(self, s, target, rhs, ctx: _Ctx):
        base = target.children[0]
        if base.kind != A.SYM:
            raise RRuntimeError("nested sub-assignment targets are not supported", s.span)
        name = base.value
        fv = self.compile_expr(rhs, ctx)
        fidx = [self.compile_expr(c, ctx) if not c.is_empty_arg() else None for c in target.children[1:]]
        nidx = len(fidx)
        metrics = self.metrics
        elide = self.annotated and name in ctx.dead
        bypass = self.annotated and ctx.no_alias
        dead = ctx.dead
        span = s.span
        audit = self._auditor(ctx.scope, name)

        def f_sub(env):
            v = fv(env)
            idx = [MISSING if f is None else f(env) for f in fidx]
            vars_ = env.vars
            x = vars_.get(name, _UNBOUND)
            if elide:
                if x is _UNBOUND:
                    env.lookup(name, span)
                metrics.elided_writes += 1
                env.consumed.add(name)
                return v
            if x is _UNBOUND:
                x = env.lookup(name, span)
                bind(env, name, x)
            tx = type(x)
            if tx is RValue and x.named < 2 and nidx == 1:
                i = idx[0]
                ti = type(i)
                if ti is int or ti is float:
                    data = x.data
                    k = int(i)
                    if 0 < k <= len(data):
                        tv = type(v)
                        xt = x.type
                        if (tv is float and xt == "double") or (tv is int and xt == "integer") or \
                                (tv is bool and xt == "logical") or (tv is str and xt == "string"):
                            data[k - 1] = v
                            return v
                        if tv is int and xt == "double":
                            data[k - 1] = float(v)
                            return v
            if tx is not RValue:
                if x is None:
                    x = RValue("logical", [])
                elif tx is Closure:
                    raise RRuntimeError("object of type 'closure' is not subsettable", span)
                else:
                    x = to_vector(x)
                    x = RValue(x.type, list(x.data))
                bind(env, name, x)
            elif x.named == 2:
                if bypass and self._only_dead_sharers(env, name, x, dead):
                    metrics.in_place_reuses += 1
                    metrics.dead_reuses += 1
                else:
                    copy = RValue(x.type, list(x.data), x.dim, list(x.names) if x.names else None)
                    metrics.copies += 1
                    bind(env, name, copy)
                    x = copy
            try:
                ops.set_index(x, idx, v)
            except RRuntimeError as e:
                if e.span is None:
                    e.span = span
                raise
            if self.annotated:
                env.consumed.discard(name)
            if audit:
                audit(x)
            return v
        return f_sub

    def _only_dead_sharers(self, env: Frame, name, x, dead) -> bool:
        sharers = [k for k, v in env.vars.items() if v is x and k != name]
        if x.refs != 1 + len(sharers):
            return False
        if not all(k in dead or k in env.consumed for k in sharers):
            return False
        env.consumed.update(sharers)
        return True

    def _auditor(self, scope, name):
        if self.audit is None:
            return None
        from ..rtypes import leq, parse_type, INTEGER, vector, matrix
        expected = self.audit.vars.get(scope, {}).get(name)
        if expected is None or expected.is_top or expected.is_unknown:
            return None

        def check(v):
            rt = runtime_rtype(v)
            if rt in ("list", "function"):
                ok = expected.ctor in ("record", "function")
            else:
                got = parse_type(rt)
                ok = leq(got, expected)
                if not ok and _integral(v) and expected.elem == "integer":
                    alt = {"basic": INTEGER, "vector": vector("integer"),
                           "matrix": matrix("integer")}.get(got.ctor, got)
                    ok = leq(alt, expected)
            if not ok:
                self.violations.append((scope, name, rt, str(expected)))
        return check

    # -- expressions -----------------------------------------------------------------------
    def compile_expr(self, e: A.SNode, ctx: _Ctx):
        k = e.kind
        if k == A.NUM_DBL:
            c = float(e.value)
            return lambda env: c
        if k == A.NUM_INT:
            c = int(e.value)
            return lambda env: c
        if k == A.NUM_CPLX:
            c = complex(e.value)
            return lambda env: c
        if k == A.STR:
            c = e.value
            return lambda env: c
        if k == A.LOGICAL:
            c = bool(e.value)
            return lambda env: c
        if k == A.NULL_LIT:
            return lambda env: None
        if k == A.NA_LIT:
            t = {"NA_integer_": "integer", "NA_real_": "double", "NA_character_": "string",
                 "NA_complex_": "complex"}.get(e.value, "logical")
            return lambda env: RValue(t, [None])
        if k == A.SYM:
            return self.compile_sym(e)
        if k == A.INDEX:
            return self.compile_index(e, ctx)
        if k == A.CALL:
            return self.compile_call(e, ctx)
        if k == A.BLOCK:
            body = self.compile_block(e.children, _Ctx(ctx.scope))

            def f_blk(env):
                r = None
                for g in body:
                    r = g(env)
                return r
            return f_blk
        if k in (A.IF, A.ASSIGN, A.FOR, A.WHILE, A.BREAK, A.NEXT):
            return self.compile_stmt(e, ctx.scope)
        raise RRuntimeError(f"cannot evaluate {k}", e.span)

    def compile_sym(self, e: A.SNode):
        name = e.value
        span = e.span
        if name in ("T", "F"):
            c = name == "T"

            def f_tf(env):
                v = env.vars.get(name, _UNBOUND)
                if v is _UNBOUND:
                    v = env.parent.vars.get(name, c) if env.parent is not None else c
                return v
            return f_tf

        def f_sym(env):
            try:
                return env.vars[name]
            except KeyError:
                return env.lookup(name, span)
        return f_sym

    def compile_index(self, e: A.SNode, ctx: _Ctx):
        fx = self.compile_expr(e.children[0], ctx)
        subs = e.children[1:]
        fidx = [self.compile_expr(c, ctx) if not c.is_empty_arg() else None for c in subs]
        span = e.span
        base = e.children[0]
        if (self.annotated and base.kind == A.SYM and base.value in ctx.donors and len(subs) == 1
                and _is_minus_one(subs[0])):
            return self._drop_first(base.value, fx, span)
        if len(fidx) == 1 and fidx[0] is not None:
            fi = fidx[0]

            def f_idx1(env):
                x = fx(env)
                i = fi(env)
                if type(x) is RValue and x.type != "list":
                    ti = type(i)
                    if ti is int or ti is float:
                        data = x.data
                        k = int(i)
                        if 0 < k <= len(data):
                            v = data[k - 1]
                            if v is not None:
                                return v
                try:
                    return ops.get_index(x, [i])
                except RRuntimeError as err:
                    err.span = err.span or span
                    raise
            return f_idx1
        if len(fidx) == 2 and fidx[0] is not None and fidx[1] is not None:
            fi, fj = fidx

            def f_idx2(env):
                x = fx(env)
                i = fi(env)
                j = fj(env)
                if type(x) is RValue and x.dim is not None and type(i) is int and type(j) is int:
                    nr, nc = x.dim
                    if 0 < i <= nr and 0 < j <= nc:
                        v = x.data[(j - 1) * nr + i - 1]
                        if v is not None:
                            return v
                try:
                    return ops.get_index(x, [i, j])
                except RRuntimeError as err:
                    err.span = err.span or span
                    raise
            return f_idx2

        def f_idx(env):
            x = fx(env)
            idx = [MISSING if f is None else f(env) for f in fidx]
            try:
                return ops.get_index(x, idx)
            except RRuntimeError as err:
                err.span = err.span or span
                raise
        return f_idx

    def _drop_first(self, name, fx, span):
        metrics = self.metrics

        def f_drop(env):
            x = fx(env)
            if type(x) is RValue and x.refs == 1 and env.vars.get(name) is x and x.type != "list" \
                    and x.dim is None and len(x.data) >= 2:
                ops.drop_first_in_place(x)
                metrics.in_place_reuses += 1
                metrics.dead_reuses += 1
                env.consumed.add(name)
                return x.share(x.data)
            return ops.get_index(x, [-1])
        return f_drop

    def compile_call(self, e: A.SNode, ctx: _Ctx):
        name = e.call_name()
        args = e.children[1:]
        names = e.arg_names()
        span = e.span
        if name is None:
            raise RRuntimeError("calls through computed functions are not supported", span)
        if A.is_hint(e):
            return self.compile_hint(e)
        nargs = len(args)
        if name in ops.ARITH_OPS and nargs == 2:
            return self.compile_arith(name, args, ctx, span)
        if name in ("-", "+") and nargs == 1:
            fa = self.compile_expr(args[0], ctx)
            if name == "+":
                return fa

            def f_neg(env):
                a = fa(env)
                return ops.unary_minus(a, a if type(a) is RValue and a.refs == 0 else None)
            return f_neg
        if name in ops.COMPARE_OPS and nargs == 2:
            return self.compile_compare(name, args, ctx, span)
        if name in ("&&", "||"):
            fa, fb = (self.compile_expr(a, ctx) for a in args)
            if name == "&&":
                return lambda env: truthy(fa(env), "&&") and truthy(fb(env), "&&")
            return lambda env: truthy(fa(env), "||") or truthy(fb(env), "||")
        if name in ("&", "|"):
            fa, fb = (self.compile_expr(a, ctx) for a in args)
            return lambda env: ops.logic(name, fa(env), fb(env))
        if name == "!":
            fa = self.compile_expr(args[0], ctx)
            return lambda env: ops.logical_not(fa(env))
        if name == "(":
            return self.compile_expr(args[0], ctx)
        if name == ":":
            fa, fb = (self.compile_expr(a, ctx) for a in args)

            def f_colon(env):
                it, _ = _colon_iter(fa(env), fb(env))
                if type(it) is range:
                    return _make_int_seq(it)
                return _make_dbl_seq(it)
            return f_colon
        if name == "return":
            fa = self.compile_expr(args[0], ctx) if args else (lambda env: None)

            def f_return(env):
                raise ReturnSig(fa(env))
            return f_return
        if name == "$":
            fa = self.compile_expr(args[0], ctx)
            key = args[1].value
            return lambda env: BUILTINS["$"](self, [fa(env), key], [None, None])
        if name in self.program.functions:
            return self.compile_user_call(name, args, names, ctx, span)
        if name in ("sqrt", "abs", "floor", "ceiling", "exp") and nargs == 1 and names[0] is None:
            return self.compile_math1(name, args[0], ctx)
        fn = BUILTINS.get(name)
        if fn is None:
            def f_unsup(env):
                raise UnsupportedBuiltin(f"unsupported builtin '{name}'", span)
            return f_unsup
        fargs = [self.compile_expr(a, ctx) for a in args]
        if name == "length" and nargs == 1:
            f0 = fargs[0]

            def f_len(env):
                x = f0(env)
                if type(x) is RValue:
                    return len(x.data)
                return 0 if x is None else 1
            return f_len

        def f_builtin(env):
            vals = [f(env) for f in fargs]
            try:
                return fn(self, vals, names)
            except RRuntimeError as err:
                err.span = err.span or span
                raise
        return f_builtin

    def _operand(self, node, ctx):
        f = self.compile_expr(node, ctx)
        donor = node.value if (self.annotated and node.kind == A.SYM and node.value in ctx.donors) else None
        return f, donor

    def _dest(self, env, a, donor):
        if type(a) is RValue:
            if a.refs == 0:
                return a, None
            if donor is not None and a.refs == 1 and env.vars.get(donor) is a:
                return a, donor
        return None, None

    def compile_arith(self, op, args, ctx, span):
        (fa, da), (fb, db) = self._operand(args[0], ctx), self._operand(args[1], ctx)
        arith = ops.arith
        slow_scalar = ops.scalar_arith

        def slow(env, a, b):
            ta, tb = type(a), type(b)
            if ta is not RValue and tb is not RValue and a is not None and b is not None \
                    and ta is not str and tb is not str and ta is not complex and tb is not complex:
                return slow_scalar(op, a, b)
            dest, donor = self._dest(env, a, da)
            if dest is None:
                dest, donor = self._dest(env, b, db)
            try:
                r = arith(op, a, b, dest)
            except RRuntimeError as err:
                err.span = err.span or span
                raise
            if donor is not None and type(r) is RValue and r.data is dest.data:
                env.consumed.add(donor)
            return r

        if op == "+":
            def f_add(env):
                a = fa(env)
                b = fb(env)
                ta = type(a)
                if ta is type(b):
                    if ta is float:
                        return a + b
                    if ta is int:
                        r = a + b
                        if -INT_MAX <= r <= INT_MAX:
                            return r
                return slow(env, a, b)
            return f_add
        if op == "-":
            def f_sub(env):
                a = fa(env)
                b = fb(env)
                ta = type(a)
                if ta is type(b):
                    if ta is float:
                        return a - b
                    if ta is int:
                        r = a - b
                        if -INT_MAX <= r <= INT_MAX:
                            return r
                return slow(env, a, b)
            return f_sub
        if op == "*":
            def f_mul(env):
                a = fa(env)
                b = fb(env)
                if type(a) is float and type(b) is float:
                    return a * b
                return slow(env, a, b)
            return f_mul
        if op == "/":
            def f_div(env):
                a = fa(env)
                b = fb(env)
                if type(a) is float and type(b) is float and b != 0.0:
                    return a / b
                return slow(env, a, b)
            return f_div
        if op == "^":
            pw = math.pow

            def f_pow(env):
                a = fa(env)
                b = fb(env)
                if type(a) is float and type(b) is float and a > 0.0 or (type(a) is float and b == 2.0):
                    try:
                        return pw(a, b)
                    except (OverflowError, ValueError):
                        pass
                return slow(env, a, b)
            return f_pow

        def f_other(env):
            return slow(env, fa(env), fb(env))
        return f_other

    def compile_compare(self, op, args, ctx, span):
        fa = self.compile_expr(args[0], ctx)
        fb = self.compile_expr(args[1], ctx)
        cmp = ops.compare
        pyop = ops._CMP[op]

        def f_cmp(env):
            a = fa(env)
            b = fb(env)
            ta = type(a)
            if (ta is int or ta is float) and (type(b) is int or type(b) is float) and a == a and b == b:
                return pyop(a, b)
            try:
                return cmp(op, a, b)
            except RRuntimeError as err:
                err.span = err.span or span
                raise
        return f_cmp

    def compile_math1(self, name, arg, ctx):
        fa, donor = self._operand(arg, ctx)
        math1 = ops.math1
        fast = {"sqrt": math.sqrt, "exp": math.exp}.get(name)

        def f_math(env):
            a = fa(env)
            if fast is not None and type(a) is float and a >= 0.0 and a < 700.0:
                return fast(a)
            dest, d = self._dest(env, a, donor)
            r = math1(name, a, dest)
            if d is not None and type(r) is RValue and r.data is dest.data:
                env.consumed.add(d)
            return r
        return f_math

    def compile_user_call(self, name, args, names, ctx, span):
        fargs = [self.compile_expr(a, ctx) for a in args]
        g = self.globals

        def f_call(env):
            clo = g.vars.get(name)
            if type(clo) is not Closure:
                clo = env.lookup(name, span) if name not in env.vars else env.vars[name]
                if type(clo) is not Closure:
                    raise RRuntimeError(f"could not find function \"{name}\"", span)
            vals = [f(env) for f in fargs]
            return self.apply(clo, vals, names, span)
        return f_call

    def apply(self, clo: Closure, vals, names, span):
        if clo.compiled is None:
            clo.compiled = self.compile_block(clo.body.children, _Ctx(clo.name))
            clo.defaults = {p: self.compile_expr(d, _Ctx(clo.name)) for p, d in clo.defaults.items()}
        frame = Frame(clo.env or self.globals, clo.name)
        try:
            matched = match_args(clo.name, vals, names, clo.params)
        except RRuntimeError as err:
            err.span = err.span or span
            raise
        for p in clo.params:
            if p in matched:
                bind(frame, p, matched[p])
        for p in clo.params:
            if p not in matched and p in clo.defaults:
                bind(frame, p, clo.defaults[p](frame))
        r = None
        try:
            for f in clo.compiled:
                r = f(frame)
        except ReturnSig as ret:
            r = ret.value
        finally:
            release(frame)
        return r


def _is_minus_one(node: A.SNode) -> bool:
    if node.kind in (A.NUM_DBL, A.NUM_INT) and node.value == -1:
        return True
    return (node.kind == A.CALL and node.call_name() == "-" and len(node.children) == 2
            and node.children[1].kind in (A.NUM_DBL, A.NUM_INT) and node.children[1].value == 1)


def _has_jump(node: A.SNode) -> bool:
    for c in node.children:
        if c.kind in (A.BREAK, A.NEXT):
            return True
        if c.kind in (A.FOR, A.WHILE):
            continue
        if _has_jump(c):
            return True
    return False


def _colon_iter(a, b):
    x = as_float_scalar(a, "argument of ':'")
    y = as_float_scalar(b, "argument of ':'")
    if x != x or y != y:
        raise RRuntimeError("NA/NaN argument to ':'")
    n = int(math.floor(abs(y - x) + 1e-10)) + 1
    step = 1 if y >= x else -1
    if x == math.floor(x) and abs(x) <= INT_MAX and abs(x + step * (n - 1)) <= INT_MAX:
        xi = int(x)
        return range(xi, xi + step * n, step), False
    return [x + step * k for k in range(n)], False


def _make_int_seq(r: range):
    from .values import make
    return make("integer", list(r))


def _make_dbl_seq(xs):
    from .values import make
    return make("double", list(xs))


def _elements(v):
    if v is None:
        return (), False
    if type(v) is RValue:
        if v.type == "list":
            return list(v.data), True
        t = v.type
        return [x if x is not None else RValue(t, [None]) for x in v.data], True
    if type(v) is Closure:
        raise RRuntimeError("invalid for() loop sequence")
    return (v,), False


def run_program(program: NormalizedProgram, annotations=None, seed: int = 1, stream=None,
                audit=None) -> RunResult:
    return Interpreter(program, annotations, seed, stream, audit).run()


__all__ = ["Interpreter", "RunResult", "run_program", "Frame", "bind", "b_elem"]
