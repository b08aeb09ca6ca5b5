"""Model builders for the CFN formulation and the y/z parity formulation.

Row names are stable and used by the LP writer and the tests::

    deg_<v>  par_<v>_<mask>  link_<e>  yz_<e>  halfz_<e>  tdom_<e>  tsum
    phi_in_<k>  phi_bal_<k>_<j>  phi_cap_<k>_<e>_<i>_<j>  phi_split_<e>
    f_in_<k>  f_bal_<k>_<j>  f_cap_<k>_<e>

``<mask>`` has bit ``i`` set when the ``i``-th edge in the node's adjacency
list belongs to the odd set.

Both flow systems order the nodes with the non-home destinations first, the
home destination next and Steiner nodes last.  Commodity ``k`` (one per
non-home destination) ships flow into ``k`` from the destinations ranked
above it; flow into those sources and out of ``k`` is fixed to zero through
column bounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .errors import DegreeCapExceededError, EvenSubsetError, InvalidInstanceError, SteinerEndpointError
from .graph import Instance, SparseGraph
from .model import LinModel, ModelBuilder, Row, Sense, T, VarKind, VarRef, X, Y, Z


class Formulation(enum.Enum):
    CFN = "cfn"
    YZ = "yz"


class SubtourMode(enum.Enum):
    COMPACT = "compact"
    CUTS = "cuts"


class ParityMode(enum.Enum):
    ENUMERATE = "enum"
    SEPARATE = "sep"


@dataclass(frozen=True)
class BuildOptions:
    formulation: Formulation = Formulation.YZ
    subtour_mode: SubtourMode = SubtourMode.COMPACT
    parity_mode: ParityMode = ParityMode.ENUMERATE
    include_tree: bool = False
    include_halfz: bool = False
    enumerate_cap: int = 10


def node_order(instance: Instance) -> list[int]:
    """Non-home destinations, then home, then Steiner nodes."""
    dests = [v for v in instance.destinations if v != instance.home]
    return dests + [instance.home] + list(instance.steiners)


def _check(instance):
    if not isinstance(instance, Instance):
        raise InvalidInstanceError("expected an Instance")


# ---------------------------------------------------------------------------
# single rows


def mask_of(graph: SparseGraph, v: int, subset: Iterable[int]) -> int:
    subset = set(subset)
    return sum(1 << i for i, eid in enumerate(graph.adjacency[v]) if eid in subset)


def make_parity_row(graph: SparseGraph, v: int, odd_set: Iterable[int]) -> Row:
    """Odd-set row ``sum_{d(v)-F} y - sum_F y >= 1 - |F|`` at node ``v``."""
    odd_set = set(odd_set)
    incident = graph.adjacency[v]
    if not odd_set <= set(incident):
        raise EvenSubsetError(f"set {sorted(odd_set)} is not contained in the edges at node {v}")
    if len(odd_set) % 2 == 0:
        raise EvenSubsetError(f"parity rows need an odd edge set, got {len(odd_set)} edges")
    terms = [(Y(e), -1.0 if e in odd_set else 1.0) for e in incident]
    return Row.build(f"par_{v}_{mask_of(graph, v, odd_set)}", terms, Sense.GE, 1 - len(odd_set))


def enumerate_parity_rows(graph: SparseGraph, v: int, cap: int = 10) -> list[Row]:
    """All ``2^(deg-1)`` odd-set rows at ``v``."""
    incident = graph.adjacency[v]
    if len(incident) > cap:
        raise DegreeCapExceededError(f"node {v} has degree {len(incident)} > cap {cap}")
    rows = []
    for mask in range(1, 1 << len(incident)):
        if bin(mask).count("1") % 2:
            rows.append(make_parity_row(graph, v, [e for i, e in enumerate(incident) if mask >> i & 1]))
    return rows


def make_halfz_row(instance: Instance, e: int) -> Row:
    """``x(d(i)) + x(d(j)) - 2 z_e >= 4`` for the edge ``e = {i, j}``."""
    g = instance.graph
    edge = g.edges[e]
    for end in (edge.u, edge.v):
        if not instance.is_destination(end):
            raise SteinerEndpointError(f"edge {e} has Steiner endpoint {end}")
    terms = [(X(f), 1.0) for f in g.adjacency[edge.u]] + [(X(f), 1.0) for f in g.adjacency[edge.v]]
    terms.append((Z(e), -2.0))
    return Row.build(f"halfz_{e}", terms, Sense.GE, 4)


def halfz_edges(instance: Instance) -> list[int]:
    """Edges eligible for half-z rows (both ends destinations, >= 3 destinations)."""
    if instance.num_destinations < 3:
        return []
    return [e.id for e in instance.graph.edges
            if instance.is_destination(e.u) and instance.is_destination(e.v)]


def make_subtour_row(graph: SparseGraph, side: Iterable[int]) -> Row:
    """Cut row ``x(delta(S)) >= 2``; the name encodes ``S`` as a hex bitmask."""
    side = set(side)
    terms = [(X(e.id), 1.0) for e in graph.edges if (e.u in side) != (e.v in side)]
    return Row.build(f"sub_{sum(1 << v for v in side):x}", terms, Sense.GE, 2)


# ---------------------------------------------------------------------------
# flow systems


def _commodity_flows(b: ModelBuilder, instance: Instance, kind: VarKind, prefix: str,
                     demand: float, cap_of) -> None:
    g = instance.graph
    order = node_order(instance)
    rank = {v: r for r, v in enumerate(order)}
    ndest = instance.num_destinations
    for k in order[:ndest - 1]:
        rk = rank[k]
        inflow, balance = [], {}
        for e in g.edges:
            for i, j in ((e.u, e.v), (e.v, e.u)):
                fixed = i == k or (j != k and rank[j] < ndest and rank[j] > rk)
                ref = b.add_column(VarRef(kind, (k, e.id, i, j)), 0.0, 0.0 if fixed else demand)
                if fixed:
                    continue
                if j == k:
                    inflow.append((ref, 1.0))
                for node, sign in ((j, 1.0), (i, -1.0)):
                    if node != k and (rank[node] < rk or rank[node] >= ndest):
                        balance.setdefault(node, []).append((ref, sign))
        b.add(f"{prefix}_in_{k}", inflow, Sense.EQ, demand)
        for node in order:
            if node in balance:
                b.add(f"{prefix}_bal_{k}_{node}", balance[node], Sense.EQ, 0)
        cap_of(b, k)


def make_subtour_flow_system(b: ModelBuilder, instance: Instance) -> None:
    """Two units into every non-home destination, capacities ``x``."""
    g = instance.graph

    def caps(b, k):
        for e in g.edges:
            arcs = [VarRef(VarKind.FLOW, (k, e.id, i, j)) for i, j in ((e.u, e.v), (e.v, e.u))]
            live = [(a, 1.0) for a in arcs if b.column(a).upper > 0]
            if live:
                b.add(f"f_cap_{k}_{e.id}", live + [(X(e.id), -1.0)], Sense.LE, 0)

    _commodity_flows(b, instance, VarKind.FLOW, "f", 2.0, caps)


def make_tree_system(b: ModelBuilder, instance: Instance) -> None:
    """Unit flows on directed tree arcs so that ``y + z`` dominates a spanning tree."""
    g = instance.graph
    for e in g.edges:
        if not b.has(T(e.id)):
            b.add_column(T(e.id), 0.0, 1.0)
        for i, j in ((e.u, e.v), (e.v, e.u)):
            b.add_column(VarRef(VarKind.T_DIRECTED, (e.id, i, j)), 0.0, 1.0)

    def caps(b, k):
        for e in g.edges:
            for i, j in ((e.u, e.v), (e.v, e.u)):
                phi = VarRef(VarKind.PHI, (k, e.id, i, j))
                if b.column(phi).upper > 0:
                    b.add(f"phi_cap_{k}_{e.id}_{i}_{j}",
                          [(phi, 1.0), (VarRef(VarKind.T_DIRECTED, (e.id, i, j)), -1.0)], Sense.LE, 0)

    _commodity_flows(b, instance, VarKind.PHI, "phi", 1.0, caps)
    for e in g.edges:
        b.add(f"phi_split_{e.id}", [(T(e.id), 1.0), (VarRef(VarKind.T_DIRECTED, (e.id, e.u, e.v)), -1.0),
                                    (VarRef(VarKind.T_DIRECTED, (e.id, e.v, e.u)), -1.0)], Sense.EQ, 0)
    b.add("tsum", [(T(e.id), 1.0) for e in g.edges], Sense.LE, g.num_nodes - 1)
    for e in g.edges:
        b.add(f"tdom_{e.id}", [(T(e.id), 1.0), (Y(e.id), -1.0), (Z(e.id), -1.0)], Sense.LE, 0)


# ---------------------------------------------------------------------------
# whole models


def _x_columns(b: ModelBuilder, instance: Instance):
    for e in instance.graph.edges:
        b.add_column(X(e.id), 0.0, 2.0, e.cost)


def _degree_rows(b: ModelBuilder, instance: Instance):
    if instance.num_destinations < 2:
        return
    g = instance.graph
    for v in instance.destinations:
        b.add(f"deg_{v}", [(X(e), 1.0) for e in g.adjacency[v]], Sense.GE, 2)


def build_cfn(instance: Instance, options: BuildOptions = BuildOptions()) -> LinModel:
    """CFN relaxation: ``0 <= x <= 2``, degree >= 2 at destinations, connectivity."""
    _check(instance)
    b = ModelBuilder(instance)
    _x_columns(b, instance)
    _degree_rows(b, instance)
    if options.subtour_mode is SubtourMode.COMPACT:
        make_subtour_flow_system(b, instance)
    return b.build()


def build_yz(instance: Instance, options: BuildOptions = BuildOptions()) -> LinModel:
    """y/z relaxation with explicit ``x = y + 2z`` linking rows."""
    _check(instance)
    g = instance.graph
    if options.parity_mode is ParityMode.ENUMERATE and g.max_degree > options.enumerate_cap:
        raise DegreeCapExceededError(
            f"max degree {g.max_degree} exceeds enumerate cap {options.enumerate_cap}; use separation")
    b = ModelBuilder(instance)
    _x_columns(b, instance)
    for e in g.edges:
        b.add_column(Y(e.id), 0.0, 1.0)
    for e in g.edges:
        b.add_column(Z(e.id), 0.0, 1.0)
    for e in g.edges:
        b.add(f"link_{e.id}", [(X(e.id), 1.0), (Y(e.id), -1.0), (Z(e.id), -2.0)], Sense.EQ, 0)
    for e in g.edges:
        b.add(f"yz_{e.id}", [(Y(e.id), 1.0), (Z(e.id), 1.0)], Sense.LE, 1)
    _degree_rows(b, instance)
    if options.parity_mode is ParityMode.ENUMERATE:
        for v in range(g.num_nodes):
            for row in enumerate_parity_rows(g, v, options.enumerate_cap):
                b.add_row(row)
    if options.include_halfz:
        for e in halfz_edges(instance):
            b.add_row(make_halfz_row(instance, e))
    if options.include_tree:
        make_tree_system(b, instance)
    if options.subtour_mode is SubtourMode.COMPACT:
        make_subtour_flow_system(b, instance)
    return b.build()


def build_dfj(instance: Instance, enumerate_subtours: bool = False, cap: int = 12) -> LinModel:
    """Reference TSP model: ``0 <= x <= 1``, degree exactly 2 at every node.

    Subtour rows are left to separation unless ``enumerate_subtours`` is set,
    in which case every proper subset containing node 0 gets its cut row
    (only allowed up to ``cap`` nodes).  On a complete graph with metric
    costs the optimum equals the GTSP optimum of any graph whose shortest
    path closure it is.
    """
    _check(instance)
    g = instance.graph
    if instance.steiners:
        raise InvalidInstanceError("the TSP reference model needs every node to be a destination")
    b = ModelBuilder(instance)
    for e in g.edges:
        b.add_column(X(e.id), 0.0, 1.0, e.cost)
    for v in range(g.num_nodes):
        b.add(f"deg_{v}", [(X(e), 1.0) for e in g.adjacency[v]], Sense.EQ, 2)
    if enumerate_subtours:
        n = g.num_nodes
        if n > cap:
            raise DegreeCapExceededError(f"{n} nodes exceed the subtour enumeration cap {cap}")
        for mask in range(1, 1 << (n - 1)):
            side = [0] + [v + 1 for v in range(n - 1) if mask >> v & 1]
            if len(side) < n:
                b.add_row(make_subtour_row(g, side))
    return b.build()


def build_model(instance: Instance, options: BuildOptions = BuildOptions()) -> LinModel:
    if options.formulation is Formulation.CFN:
        return build_cfn(instance, options)
    return build_yz(instance, options)


def count_parity_rows(graph: SparseGraph) -> int:
    return sum(2 ** (d - 1) for d in (graph.degree(v) for v in range(graph.num_nodes)) if d > 0)


def expected_flow_columns(instance: Instance) -> int:
    return 2 * instance.graph.num_edges * (instance.num_destinations - 1)

