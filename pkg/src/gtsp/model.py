"""Linear models: columns keyed by :class:`VarRef`, named sparse rows."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence


class VarKind(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"
    T = "t"
    T_DIRECTED = "td"
    PHI = "phi"
    FLOW = "f"


class VarRef(NamedTuple):
    """``index`` is an edge id for edge kinds, ``(i, j)`` for directed tree
    arcs and ``(k, i, j)`` for commodity-``k`` flow on arc ``i -> j``."""

    kind: VarKind
    index: int | tuple

    @property
    def name(self) -> str:
        idx = self.index if isinstance(self.index, tuple) else (self.index,)
        return "_".join([self.kind.value] + [str(i) for i in idx])


def X(e):
    return VarRef(VarKind.X, e)


def Y(e):
    return VarRef(VarKind.Y, e)


def Z(e):
    return VarRef(VarKind.Z, e)


def T(e):
    return VarRef(VarKind.T, e)


class Sense(enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


@dataclass(frozen=True)
class Column:
    ref: VarRef
    lower: float = 0.0
    upper: float = math.inf
    obj: float = 0.0
    integer: bool = False


@dataclass(frozen=True)
class Row:
    name: str
    coefs: tuple[tuple[VarRef, float], ...]
    sense: Sense
    rhs: float

    @classmethod
    def build(cls, name: str, terms: Iterable[tuple[VarRef, float]], sense: Sense, rhs: float) -> "Row":
        """Merge repeated refs and drop zero coefficients."""
        acc: dict[VarRef, float] = {}
        for ref, c in terms:
            acc[ref] = acc.get(ref, 0.0) + c
        return cls(name, tuple((r, c) for r, c in acc.items() if c != 0), sense, float(rhs))

    def activity(self, values: dict[VarRef, float]) -> float:
        return sum(c * values.get(r, 0.0) for r, c in self.coefs)

    def violation(self, values: dict[VarRef, float]) -> float:
        """Amount by which the row is violated (<= 0 when satisfied)."""
        lhs = self.activity(values)
        if self.sense is Sense.GE:
            return self.rhs - lhs
        if self.sense is Sense.LE:
            return lhs - self.rhs
        return abs(lhs - self.rhs)


@dataclass(frozen=True)
class LinModel:
    """Minimisation model.  Immutable; :meth:`with_rows` returns an extended copy."""

    columns: tuple[Column, ...]
    rows: tuple[Row, ...]
    instance: object = None
    index: dict = field(init=False, repr=False, compare=False)
    row_names: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for j, col in enumerate(self.columns):
            if col.ref in index:
                raise ValueError(f"duplicate column {col.ref.name}")
            if col.lower > col.upper:
                raise ValueError(f"column {col.ref.name} has lower > upper")
            index[col.ref] = j
        object.__setattr__(self, "index", index)
        names = set()
        for row in self.rows:
            self._check_row(row, index)
            if row.name in names:
                raise ValueError(f"duplicate row name {row.name}")
            names.add(row.name)
        object.__setattr__(self, "row_names", frozenset(names))

    @staticmethod
    def _check_row(row: Row, index):
        for ref, c in row.coefs:
            if ref not in index:
                raise ValueError(f"row {row.name} references unknown column {ref.name}")
            if c == 0:
                raise ValueError(f"row {row.name} stores a zero coefficient")

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def col(self, ref: VarRef) -> int:
        return self.index[ref]

    def has(self, ref: VarRef) -> bool:
        return ref in self.index

    def refs(self, kind: VarKind) -> list[VarRef]:
        return [c.ref for c in self.columns if c.ref.kind is kind]

    def with_rows(self, rows: Sequence[Row]) -> "LinModel":
        if not rows:
            return self
        new = LinModel.__new__(LinModel)
        object.__setattr__(new, "columns", self.columns)
        object.__setattr__(new, "rows", self.rows + tuple(rows))
        object.__setattr__(new, "instance", self.instance)
        object.__setattr__(new, "index", self.index)
        names = set(self.row_names)
        for row in rows:
            self._check_row(row, self.index)
            if row.name in names:
                raise ValueError(f"duplicate row name {row.name}")
            names.add(row.name)
        object.__setattr__(new, "row_names", frozenset(names))
        return new

    def with_integrality(self, kinds: Iterable[VarKind]) -> "LinModel":
        """Copy with the integrality flag set exactly on columns of ``kinds``."""
        kinds = set(kinds)
        cols = tuple(replace(c, integer=c.ref.kind in kinds) for c in self.columns)
        return LinModel(cols, self.rows, self.instance)

    def values(self, primal) -> dict[VarRef, float]:
        return {c.ref: float(v) for c, v in zip(self.columns, primal)}

    def edge_vector(self, primal, kind: VarKind) -> list[float]:
        g = self.instance.graph
        return [float(primal[self.index[VarRef(kind, e)]]) if VarRef(kind, e) in self.index else 0.0
                for e in range(g.num_edges)]


class ModelBuilder:
    """Mutable accumulator used by the formulation builders."""

    def __init__(self, instance=None):
        self.instance = instance
        self.columns: list[Column] = []
        self.rows: list[Row] = []
        self._index: dict[VarRef, int] = {}
        self._names: set[str] = set()

    def add_column(self, ref: VarRef, lower=0.0, upper=math.inf, obj=0.0, integer=False) -> VarRef:
        if ref in self._index:
            raise ValueError(f"duplicate column {ref.name}")
        self._index[ref] = len(self.columns)
        self.columns.append(Column(ref, float(lower), float(upper), float(obj), integer))
        return ref

    def has(self, ref: VarRef) -> bool:
        return ref in self._index

    def column(self, ref: VarRef) -> Column:
        return self.columns[self._index[ref]]

    def add_row(self, row: Row) -> Row:
        if row.name in self._names:
            raise ValueError(f"duplicate row name {row.name}")
        self._names.add(row.name)
        self.rows.append(row)
        return row

    def add(self, name, terms, sense, rhs) -> Row:
        return self.add_row(Row.build(name, terms, sense, rhs))

    def build(self) -> LinModel:
        return LinModel(tuple(self.columns), tuple(self.rows), self.instance)
