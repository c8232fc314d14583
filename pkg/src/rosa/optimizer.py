"""Program rewrites driven by the dataflow and type facts.

Passes:

* ``vectorize``: elementwise ``for`` loops become one whole-vector statement.
* ``hoist``: loop-invariant assignments move in front of their loop.
* ``strength-reduce``: advisories for literals that are later converted to
  strings (applied only on request).
* ``space-reuse``: per-statement dead-after sets and no-alias flags consumed
  by the annotated interpreter.

Every :class:`Rewrite` records the facts that justified it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence

from . import dataflow as D
from .cfg import SUBASSIGN, TOP, Cfg, build_cfg
from .frontend import ast as A
from .frontend.normalize import NormalizedProgram, normalize
from .frontend.printer import deparse
from .rtypes import TypeEnv, as_vector, infer, join, type_of_call, vector

ELEMENTWISE = frozenset({"+", "-", "*", "/", "^", "sqrt", "abs", "("})
ALLOCATORS = frozenset({"numeric", "vector", "runif", "rnorm", "double", "integer", "logical",
                        "character", "rep", "sample"})
PASSES = ("vectorize", "hoist", "space-reuse")


class StaleRewrite(Exception):
    """A rewrite refers to statements that no longer exist."""


@dataclass
class Rewrite:
    id: str
    kind: str  # vectorize | hoist | strength-reduce | annotate
    targets: List[int]
    scope: str
    description: str
    replacement: Optional[list] = None
    justification: dict = field(default_factory=dict)
    advisory: bool = False

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "scope": self.scope,
            "targets": list(self.targets),
            "description": self.description,
            "replacement": [deparse(n) for n in self.replacement] if self.replacement else None,
            "advisory": self.advisory,
            "justification": self.justification,
        }


@dataclass
class Skip:
    """A candidate the pass examined and declined."""

    kind: str
    scope: str
    target: int
    text: str
    reason: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "scope": self.scope, "target": self.target, "text": self.text,
                "reason": self.reason}


@dataclass(frozen=True)
class StmtAnnotation:
    dead_after: FrozenSet[str]
    no_alias: bool


@dataclass
class Analysis:
    program: NormalizedProgram
    cfgs: Dict[str, Cfg]
    facts: Dict[str, dict]
    types: TypeEnv
    nodes: Dict[int, A.SNode]


def analyze(program: NormalizedProgram, types: Optional[TypeEnv] = None) -> Analysis:
    cfgs = build_cfg(program)
    user = frozenset(program.functions)
    facts = {name: D.analyze_cfg(c, user) for name, c in cfgs.items()}
    nodes = {n.id: n for n in program.root.walk()}
    return Analysis(program, cfgs, facts, types or infer(program), nodes)


# -- helpers -------------------------------------------------------------------------

def _loop_stmt_ids(cfg: Cfg, lid: int) -> set:
    body = cfg.loops[lid].body
    return {s.sid for b in cfg.blocks if b.id in body for s in b.stmts}


def _is_one(n: A.SNode) -> bool:
    return n.kind in (A.NUM_INT, A.NUM_DBL) and n.value == 1


def _indexed_by(n: A.SNode, var: str) -> Optional[str]:
    """``name`` when ``n`` is exactly ``name[var]``."""
    if n.kind == A.INDEX and len(n.children) == 2 and n.children[0].kind == A.SYM:
        i = n.children[1]
        if i.kind == A.SYM and i.value == var:
            return n.children[0].value
    return None


def _allocation_length(stmts: Sequence[A.SNode], name: str) -> Optional[A.SNode]:
    """Length argument of the last allocation of ``name`` among ``stmts``."""
    found = None
    for s in stmts:
        if s.kind != A.ASSIGN or s.value == "[<-":
            continue
        t, rhs = s.children
        if t.kind != A.SYM or t.value != name:
            continue
        found = None
        fn = rhs.call_name()
        if fn not in ALLOCATORS:
            continue
        args, names = rhs.children[1:], rhs.arg_names()
        for a, nm in zip(args, names):
            if nm in ("length", "n", "length.out", "size"):
                found = a
        if found is None and fn in ("numeric", "runif", "rnorm", "double", "integer", "logical",
                                    "character") and args and names[0] is None:
            found = args[0]
        if found is None and fn == "rep" and len(args) >= 2:
            found = args[1]
    return found


def _same_expr(a: Optional[A.SNode], b: Optional[A.SNode]) -> bool:
    return a is not None and b is not None and a.shape() == b.shape()


def _scope_statements(program: NormalizedProgram, scope: str) -> list:
    if scope == TOP:
        return program.statements
    return program.function_body(scope).children


def _contains(node: A.SNode, target: A.SNode) -> bool:
    return any(n is target for n in node.walk())


def _enclosing_top(stmts: list, node: A.SNode) -> Optional[int]:
    for k, s in enumerate(stmts):
        if _contains(s, node):
            return k
    return None


# -- vectorization -----------------------------------------------------------------------

class _Elementwise:
    def __init__(self, var: str, loop_defs: set, env: Dict[str, object]):
        self.var = var
        self.loop_defs = loop_defs
        self.env = env
        self.srcs: List[str] = []
        self.reason: Optional[str] = None

    def check(self, e: A.SNode):
        """Type of the vectorized form of ``e``, or None when ``e`` is not elementwise."""
        name = _indexed_by(e, self.var)
        if name is not None:
            if name in self.loop_defs:
                self.reason = f"'{name}' is defined inside the loop (loop-carried dependency)"
                return None
            self.srcs.append(name)
            t = self.env.get(name)
            return as_vector(t) if t is not None else None
        if e.kind in (A.NUM_DBL, A.NUM_INT, A.LOGICAL):
            return {A.NUM_DBL: vector("double"), A.NUM_INT: vector("integer"),
                    A.LOGICAL: vector("logical")}[e.kind]
        if e.kind == A.SYM:
            if e.value == self.var:
                self.reason = "loop variable used outside an index"
                return None
            if e.value in self.loop_defs:
                self.reason = f"'{e.value}' is defined inside the loop"
                return None
            t = self.env.get(e.value)
            if t is None or not t.is_scalar:
                self.reason = f"'{e.value}' is not a loop-invariant scalar"
                return None
            return t
        if e.kind == A.CALL and e.call_name() in ELEMENTWISE and all(n is None for n in e.arg_names()):
            ts = []
            for c in e.children[1:]:
                t = self.check(c)
                if t is None:
                    return None
                ts.append(t)
            if e.call_name() == "(":
                return ts[0]
            return type_of_call(e.call_name(), ts)
        self.reason = self.reason or f"'{deparse(e)}' is not an elementwise expression"
        return None


def _accumulator(stmt: A.SNode, var: str) -> Optional[str]:
    """Name ``t`` when ``stmt`` has the shape ``t <- t op e`` with ``e`` indexed by the loop var."""
    if stmt.kind != A.ASSIGN or stmt.value == "[<-":
        return None
    t, rhs = stmt.children
    if t.kind != A.SYM or rhs.kind != A.CALL or rhs.call_name() not in ("+", "-", "*", "/"):
        return None
    if not any(c.kind == A.SYM and c.value == t.value for c in rhs.children[1:]):
        return None
    if any(_indexed_by(n, var) for n in rhs.walk()):
        return t.value
    return None


def vectorize(an: Analysis, counter: Optional[List[int]] = None):
    """Return ``(rewrites, skips)`` for every ``for`` loop in the program."""
    counter = counter if counter is not None else [0]
    rewrites: List[Rewrite] = []
    skips: List[Skip] = []
    for scope, cfg in an.cfgs.items():
        reach = an.facts[scope]["reach"]
        live = an.facts[scope]["live"]
        env = an.types.vars.get(scope, {})
        stmts = _scope_statements(an.program, scope)
        for lid, lp in sorted(cfg.loops.items()):
            node = an.nodes.get(lid)
            if node is None or node.kind != A.FOR:
                continue
            body = node.children[1].children
            text = f"for ({node.value} in {deparse(node.children[0])})"
            for n in node.walk():
                if n.call_name() == "runif" and len(n.children) == 2 and _is_one(n.children[1]):
                    counter[0] += 1
                    rewrites.append(Rewrite(
                        f"v{counter[0]}", "vectorize", [lid], scope,
                        f"runif(1) inside {text}: draw all values with one vectorized runif call "
                        "before the loop", None,
                        {"loop": lid, "note": "advisory only; reordering draws changes the random stream"},
                        advisory=True))
                    break
            verdict = _vectorize_loop(an, scope, cfg, lid, node, body, stmts, reach, live, env)
            if isinstance(verdict, str):
                skips.append(Skip("vectorize", scope, lid, text, verdict))
                continue
            counter[0] += 1
            repl, just = verdict
            rewrites.append(Rewrite(f"v{counter[0]}", "vectorize", [lid], scope,
                                    f"replace {text} by {deparse(repl[0])}", repl, just))
    return rewrites, skips


def _vectorize_loop(an, scope, cfg, lid, node, body, stmts, reach, live, env):
    var = node.value
    rng = node.children[0]
    if len(body) != 1:
        acc = next((a for a in (_accumulator(s, var) for s in body) if a), None)
        if acc:
            return f"scalar accumulation into '{acc}': vectorizing would change its type"
        return "loop body is not a single statement"
    s = body[0]
    acc = _accumulator(s, var)
    if acc is not None:
        t = env.get(acc)
        return (f"scalar accumulation into '{acc}' ({t}): vectorizing would change its type "
                f"to a vector")
    if s.kind != A.ASSIGN or s.children[0].kind != A.INDEX:
        return "body is not an indexed assignment"
    dst = _indexed_by(s.children[0], var)
    if dst is None:
        return "destination is not indexed by the loop variable"
    if not (rng.call_name() == ":" and len(rng.children) == 3 and _is_one(rng.children[1])):
        return "range is not of the form 1:n"
    n_expr = rng.children[2]
    loop_sids = _loop_stmt_ids(cfg, lid)
    reach_in = reach.before(s.id)
    loop_defs = {v for v, sid in reach_in if sid in loop_sids and v != var and sid != s.id}
    # The destination's only in-loop definition must be this statement.
    if any(v == dst and sid in loop_sids and sid != s.id for v, sid in reach_in):
        return f"'{dst}' has another definition inside the loop"
    checker = _Elementwise(var, loop_defs | {dst}, env)
    rhs_t = checker.check(s.children[1])
    if rhs_t is None:
        return checker.reason or "right-hand side is not elementwise"
    if dst in checker.srcs:
        return f"'{dst}' is read and written in the loop (loop-carried dependency)"
    if not checker.srcs:
        return "right-hand side reads no indexed vector"
    upto = _enclosing_top(stmts, node)
    prefix = stmts[:upto] if upto is not None else stmts
    lengths = {}
    for name in [dst] + checker.srcs:
        ln = _allocation_length(prefix, name)
        if not _same_expr(ln, n_expr):
            return f"cannot show that '{name}' has length {deparse(n_expr)}"
        lengths[name] = deparse(ln)
    dst_t = env.get(dst)
    if dst_t is None or rhs_t.is_top or join(dst_t, rhs_t) != dst_t or rhs_t != dst_t:
        return f"vectorized type {rhs_t} differs from '{dst}' type {dst_t}"
    new = A.assign(A.sym(dst), s.children[1].clone())
    _strip_index(new.children[1], var)
    repl = [new]
    live_after = _live_after_loop(cfg, lid, live)
    if var in live_after or scope == TOP:
        repl.append(A.assign(A.sym(var), A.call("as.integer", n_expr.clone())))
    just = {
        "loop": lid,
        "induction_variable": var,
        "range": deparse(rng),
        "reaching_definitions": sorted(f"{v}@s{sid}" for v, sid in reach_in
                                       if v in set(checker.srcs) | {dst}),
        "allocation_lengths": lengths,
        "types": {"destination": str(dst_t), "vectorized": str(rhs_t)},
        "conditions": ["single indexed assignment", "sources defined outside loop",
                       "elementwise operators", "range matches allocation", "type preserved"],
    }
    return repl, just


def _strip_index(e: A.SNode, var: str):
    for k, c in enumerate(e.children):
        name = _indexed_by(c, var)
        if name is not None:
            e.children[k] = A.sym(name)
        else:
            _strip_index(c, var)


def _live_after_loop(cfg: Cfg, lid: int, live) -> FrozenSet[str]:
    lp = cfg.loops[lid]
    out = set()
    for s in cfg.succ(lp.header):
        if s not in lp.body:
            out |= live.inn[s]
    return frozenset(out)


# -- hoisting -----------------------------------------------------------------------------

def hoist_invariants(an: Analysis, aggressive: bool = False, counter: Optional[List[int]] = None):
    counter = counter if counter is not None else [0]
    rewrites: List[Rewrite] = []
    for scope, cfg in an.cfgs.items():
        inv = an.facts[scope]["invariants"]
        live = an.facts[scope]["live"]
        for lid in sorted(inv):
            node = an.nodes.get(lid)
            if node is None:
                continue
            body = node.children[1].children
            body_ids = {s.id for s in body}
            loop_sids = _loop_stmt_ids(cfg, lid)
            loop_stmts = [cfg.stmt(x) for x in loop_sids]
            header_in = live.inn[cfg.loops[lid].header]
            after = _live_after_loop(cfg, lid, live)
            for sid in inv[lid]:
                st = cfg.stmt(sid)
                v = st.target
                others = [o for o in loop_stmts if v in o.defs and o.sid != sid]
                problems = []
                if sid not in body_ids:
                    problems.append("does not execute on every iteration")
                if others:
                    problems.append(f"'{v}' is also written inside the loop ({others[0].text})")
                if v in header_in:
                    problems.append(f"'{v}' is read before this definition")
                if v in after:
                    problems.append(f"'{v}' is live after the loop (zero-trip loops would differ)")
                if problems and not (aggressive and sid in body_ids and v not in header_in):
                    advisory = True
                else:
                    advisory = False
                counter[0] += 1
                rewrites.append(Rewrite(
                    f"h{counter[0]}", "hoist", [sid, lid], scope,
                    f"move '{st.text}' before for ({node.value} in {deparse(node.children[0])})",
                    None,
                    {"loop": lid, "uses": sorted(st.uses),
                     "reaching_definitions": "all outside the loop or invariant",
                     "blocked_by": problems, "aggressive": aggressive},
                    advisory=advisory))
    return rewrites


# -- strength reduction advisories ----------------------------------------------------

_CHAIN = frozenset({"c", "sample", "rep", "rev", "sort", "unique"})


def _double_literal_vector(n: A.SNode) -> bool:
    if n.call_name() != "c" or len(n.children) < 2:
        return False
    return all(c.kind == A.NUM_DBL and float(c.value).is_integer() for c in n.children[1:])


def _flows(e: A.SNode, tainted: set, lit: Optional[A.SNode] = None) -> bool:
    """Does the value of ``e`` carry tainted data (through copies, indexing and chains)?"""
    if lit is not None and e is lit:
        return True
    if e.kind == A.SYM:
        return e.value in tainted
    if e.kind == A.INDEX:
        return _flows(e.children[0], tainted, lit)
    if e.kind == A.CALL:
        name = e.call_name()
        if name in _CHAIN:
            args = list(zip(e.children[1:], e.arg_names()))
            if name == "sample":
                args = [(a, n) for a, n in args if n in (None, "x")][:1]
            return any(_flows(a, tainted, lit) for a, n in args if n is None or n == "x")
    return False


def strength_reduce_advise(an: Analysis, counter: Optional[List[int]] = None) -> List[Rewrite]:
    counter = counter if counter is not None else [0]
    out: List[Rewrite] = []
    scopes = [(TOP, an.program.statements)] + [
        (f, an.program.function_body(f).children) for f in sorted(an.program.functions)]
    for scope, stmts in scopes:
        block = A.block(stmts)
        lits = [n for n in _walk_scope(block) if _double_literal_vector(n)]
        for lit in lits:
            sink = _find_sink(block, lit)
            if sink is None:
                continue
            counter[0] += 1
            base = f"sr{counter[0]}"
            for variant, mk in (("int", lambda c: A.SNode(A.NUM_INT, int(c.value), text=f"{int(c.value)}L")),
                                ("str", lambda c: A.SNode(A.STR, "%d" % int(c.value)))):
                new = A.call("c", *[mk(c) for c in lit.children[1:]])
                out.append(Rewrite(
                    f"{base}-{variant}", "strength-reduce", [lit.id], scope,
                    f"replace {deparse(lit)} by {deparse(new)} "
                    f"(values reach {sink.call_name()}() and are converted to strings)",
                    [new],
                    {"literal": deparse(lit), "sink": deparse(sink)[:80],
                     "flow": "copy/builtin chain within one function",
                     "saves": "double-to-string conversions" if variant == "str"
                     else "double formatting in conversions"},
                    advisory=True))
    return out


def _walk_scope(node: A.SNode):
    """Like ``walk`` but does not enter function definitions."""
    yield node
    for c in node.children:
        if c.kind != A.FUNDEF:
            yield from _walk_scope(c)


def _find_sink(block: A.SNode, lit: A.SNode) -> Optional[A.SNode]:
    tainted: set = set()
    changed = True
    assigns = [n for n in _walk_scope(block) if n.kind == A.ASSIGN]
    while changed:
        changed = False
        for s in assigns:
            name = A.assign_target_name(s)
            if name in tainted or name is None:
                continue
            if _flows(s.children[1], tainted, lit):
                tainted.add(name)
                changed = True
    for n in _walk_scope(block):
        if n.call_name() == "paste":
            if any(_flows(a, tainted, lit) for a in n.children[1:]):
                return n
    return None


# -- space reuse annotation ----------------------------------------------------------

def annotate_space_reuse(an: Analysis) -> Dict[int, StmtAnnotation]:
    out: Dict[int, StmtAnnotation] = {}
    for scope, cfg in an.cfgs.items():
        live = an.facts[scope]["live"]
        alias = an.facts[scope]["alias"]
        for s in cfg.statements():
            if s.role is not None:
                continue
            live_out = live.after(s.sid)
            dead = frozenset((s.uses | s.defs) - live_out)
            no_alias = True
            if s.kind == SUBASSIGN:
                x = s.target
                no_alias = not (D.aliases_of(alias.after(s.sid), x) & live_out)
            out[s.sid] = StmtAnnotation(dead, no_alias)
    return out


def annotation_rewrites(an: Analysis, ann: Dict[int, StmtAnnotation]) -> List[Rewrite]:
    out = []
    k = 0
    for scope, cfg in an.cfgs.items():
        for s in cfg.statements():
            a = ann.get(s.sid)
            if a is None or not (a.dead_after & s.uses) and not (s.kind == SUBASSIGN and a.no_alias):
                continue
            k += 1
            out.append(Rewrite(f"a{k}", "annotate", [s.sid], scope, f"space reuse at '{s.text}'",
                               None, {"dead_after": sorted(a.dead_after), "no_alias": a.no_alias,
                                      "live_out": sorted(an.facts[scope]["live"].after(s.sid))}))
    return out


# -- application ------------------------------------------------------------------------

def apply(program: NormalizedProgram, rewrites: Sequence[Rewrite]) -> NormalizedProgram:
    """Apply non-advisory rewrites (plus explicitly chosen advisories) and renormalize."""
    root = program.root.clone(fresh=False)
    parents: Dict[int, tuple] = {}
    for n in root.walk():
        for k, c in enumerate(n.children):
            parents[c.id] = (n, k)
    for rw in rewrites:
        if rw.kind == "annotate":
            continue
        for t in rw.targets:
            if t not in parents:
                raise StaleRewrite(f"rewrite {rw.id} targets missing statement {t}")
        if rw.kind == "vectorize":
            parent, k = parents[rw.targets[0]]
            parent.children[k:k + 1] = [r.clone() for r in rw.replacement]
        elif rw.kind == "strength-reduce":
            parent, k = parents[rw.targets[0]]
            parent.children[k] = rw.replacement[0].clone()
        elif rw.kind == "hoist":
            sid, lid = rw.targets
            sp, sk = parents[sid]
            stmt = sp.children.pop(sk)
            lp, lk = parents[lid]
            lp.children.insert(lk, stmt)
        else:
            raise ValueError(f"unknown rewrite kind {rw.kind}")
        parents = {}
        for n in root.walk():
            for k, c in enumerate(n.children):
                parents[c.id] = (n, k)
    return normalize(root.clone(fresh=True))


# -- pipeline -----------------------------------------------------------------------------

@dataclass
class OptimizeResult:
    program: NormalizedProgram
    rewrites: List[Rewrite]
    skips: List[Skip]
    annotations: Dict[int, StmtAnnotation]
    applied: List[str]

    def to_json(self) -> dict:
        return {
            "rewrites": [r.to_json() for r in self.rewrites],
            "skipped": [s.to_json() for s in self.skips],
            "applied": list(self.applied),
            "annotated_statements": len(self.annotations),
        }


def optimize(program: NormalizedProgram, passes: Sequence[str] = PASSES, aggressive: bool = False,
             apply_sr: Sequence[str] = ()) -> OptimizeResult:
    for p in passes:
        if p not in PASSES and p != "strength-reduce":
            raise ValueError(f"unknown pass '{p}'")
    rewrites: List[Rewrite] = []
    skips: List[Skip] = []
    applied: List[str] = []
    counter = [0]
    cur = program
    sr = strength_reduce_advise(analyze(cur), [0])
    rewrites += sr
    chosen = [r for r in sr if r.id in apply_sr]
    missing = set(apply_sr) - {r.id for r in sr}
    if missing:
        raise StaleRewrite(f"no such advisory: {', '.join(sorted(missing))}")
    if chosen:
        cur = apply(cur, chosen)
        applied += [r.id for r in chosen]
    if "vectorize" in passes:
        vr, sk = vectorize(analyze(cur), counter)
        rewrites += vr
        skips += sk
        todo = [r for r in vr if not r.advisory]
        if todo:
            cur = apply(cur, todo)
            applied += [r.id for r in todo]
    if "hoist" in passes:
        hr = hoist_invariants(analyze(cur), aggressive, counter)
        rewrites += hr
        todo = [r for r in hr if not r.advisory]
        if todo:
            cur = apply(cur, todo)
            applied += [r.id for r in todo]
    ann: Dict[int, StmtAnnotation] = {}
    if "space-reuse" in passes:
        an = analyze(cur)
        ann = annotate_space_reuse(an)
        rewrites += annotation_rewrites(an, ann)
    return OptimizeResult(cur, rewrites, skips, ann, applied)


def space_reuse_annotations(program: NormalizedProgram) -> Dict[int, StmtAnnotation]:
    return annotate_space_reuse(analyze(program))
