"""CPLEX-style LP text export.

Numbers are written with 17 significant digits so a re-read model is
bit-identical.  Columns with ``[0, +inf)`` bounds are left out of the
``Bounds`` section (the format's default); integer columns with ``[0, 1]``
bounds go to ``Binary``, other integer columns to ``General``.
"""

from __future__ import annotations

import io
import math
from typing import TextIO

from .model import LinModel, Sense

_LINE_TERMS = 8


def _num(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def _terms(pairs) -> list[str]:
    lines, cur = [], []
    for name, c in pairs:
        sign = "-" if c < 0 else "+"
        cur.append(f"{sign} {_num(abs(c))} {name}")
        if len(cur) == _LINE_TERMS:
            lines.append(" ".join(cur))
            cur = []
    if cur or not lines:
        lines.append(" ".join(cur))
    return lines


def _sense(s: Sense) -> str:
    return {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}[s]


def export_lp(model: LinModel, sink: TextIO) -> None:
    """Write ``model`` to ``sink``.  Raises whatever the sink raises on I/O failure."""
    names = [c.ref.name for c in model.columns]
    out = [f"\\ {len(model.columns)} columns, {len(model.rows)} rows", "Minimize"]
    obj = [(n, c.obj) for n, c in zip(names, model.columns) if c.obj != 0]
    body = _terms(obj)
    out.append(" obj: " + body[0] if body[0] else " obj:")
    out.extend("   " + line for line in body[1:])

    out.append("Subject To")
    for row in model.rows:
        lines = _terms([(ref.name, c) for ref, c in row.coefs])
        if not row.coefs:
            lines = ["0 " + names[0]] if names else ["0"]
        lines[-1] = f"{lines[-1]} {_sense(row.sense)} {_num(row.rhs)}"
        out.append(f" {row.name}: {lines[0]}")
        out.extend("   " + line for line in lines[1:])

    bounds = []
    for n, c in zip(names, model.columns):
        lo, hi = c.lower, c.upper
        if lo == 0 and math.isinf(hi) and hi > 0:
            continue
        if lo == hi:
            bounds.append(f" {n} = {_num(lo)}")
        elif math.isinf(lo) and math.isinf(hi):
            bounds.append(f" {n} free")
        else:
            bounds.append(f" {_num(lo)} <= {n} <= {_num(hi)}")
    if bounds:
        out.append("Bounds")
        out.extend(bounds)

    binary = [n for n, c in zip(names, model.columns) if c.integer and c.lower == 0 and c.upper == 1]
    general = [n for n, c in zip(names, model.columns)
               if c.integer and not (c.lower == 0 and c.upper == 1)]
    for title, group in (("General", general), ("Binary", binary)):
        if group:
            out.append(title)
            for i in range(0, len(group), _LINE_TERMS):
                out.append(" " + " ".join(group[i:i + _LINE_TERMS]))
    out.append("End")
    sink.write("\n".join(out) + "\n")


def to_lp_string(model: LinModel) -> str:
    buf = io.StringIO()
    export_lp(model, buf)
    return buf.getvalue()
