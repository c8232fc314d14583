"""R-style ``print`` rendering shared (byte for byte) with the C runtime.

Doubles use 15 significant digits, elements are right-aligned to a common
width and each output line starts with the ``[k]`` index of its first element.
"""

from __future__ import annotations

from .values import Closure, RValue, elem_to_string, fmt_double, type_of

WIDTH = 80
_EMPTY = {"logical": "logical(0)", "integer": "integer(0)", "double": "numeric(0)",
          "complex": "complex(0)", "string": "character(0)", "list": "list()"}


def quote(s: str) -> str:
    out = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def format_elems(typ: str, data: list, quote_strings: bool = True) -> list:
    if typ == "double":
        return ["NA" if x is None else fmt_double(x) for x in data]
    if typ == "string":
        if quote_strings:
            return ["NA" if x is None else quote(x) for x in data]
        return ["NA" if x is None else x for x in data]
    return ["NA" if x is None else elem_to_string(x, typ) for x in data]


def format_vector(typ: str, data: list) -> str:
    if not data:
        return _EMPTY[typ] + "\n"
    items = format_elems(typ, data)
    w = max(len(s) for s in items)
    n = len(items)
    lab = len(f"[{n}]")
    per = max(1, (WIDTH - lab) // (w + 1))
    lines = []
    for start in range(0, n, per):
        prefix = f"[{start + 1}]".rjust(lab)
        row = " ".join(s.rjust(w) for s in items[start:start + per])
        lines.append(f"{prefix} {row}")
    return "\n".join(lines) + "\n"


def format_matrix(v: RValue) -> str:
    nr, nc = v.dim
    items = format_elems(v.type, v.data)
    rlab = [f"[{i + 1},]" for i in range(nr)]
    rw = max((len(s) for s in rlab), default=0)
    cols = []
    for j in range(nc):
        head = f"[,{j + 1}]"
        cells = items[j * nr:(j + 1) * nr]
        w = max([len(head)] + [len(c) for c in cells])
        cols.append((head.rjust(w), [c.rjust(w) for c in cells], w))
    lines = []
    start = 0
    while start < nc or (nc == 0 and not lines):
        used = rw
        end = start
        while end < nc and (end == start or used + 1 + cols[end][2] <= WIDTH):
            used += 1 + cols[end][2]
            end += 1
        chunk = cols[start:end]
        lines.append(" " * rw + "".join(" " + c[0] for c in chunk))
        for i in range(nr):
            lines.append(rlab[i].ljust(rw) + "".join(" " + c[1][i] for c in chunk))
        if nc == 0:
            break
        start = end
    return "\n".join(lines) + "\n"


def format_value(v, prefix: str = "") -> str:
    if v is None:
        return "NULL\n"
    if type(v) is Closure:
        return f"function {v.name}\n"
    if type(v) is not RValue:
        return format_vector(type_of(v), [v])
    if v.type == "list":
        return _format_list(v, prefix)
    if v.dim is not None:
        return format_matrix(v)
    return format_vector(v.type, v.data)


def _format_list(v: RValue, prefix: str) -> str:
    if not v.data:
        return "list()\n"
    out = []
    for i, x in enumerate(v.data):
        nm = v.names[i] if v.names and v.names[i] else None
        tag = f"{prefix}${nm}" if nm else f"{prefix}[[{i + 1}]]"
        out.append(tag + "\n")
        out.append(format_value(x, tag))
        out.append("\n")
    return "".join(out)
