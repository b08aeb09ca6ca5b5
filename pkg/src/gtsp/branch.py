"""Branch-and-bound for both formulations, a doubled-MST incumbent and
solution certificates.

``Strategy.Y_BRANCH`` branches on fractional ``y`` (and, as a safeguard, on
fractional ``z``).  ``Strategy.PARITY_BRANCH`` branches on fractional ``x``
and, once ``x`` is integral, on odd node degrees with the rows
``x(delta(i)) <= q - 1`` / ``x(delta(i)) >= q + 1``.

Integral candidates are always checked for even degrees and connectivity;
violated parity or subtour rows are added lazily, so a model without
connectivity rows still solves to a valid tour.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cuts import (
    LoopStatus,
    cutting_plane,
    parity_separator,
    separate_parity,
    separate_subtour,
    subtour_separator,
)
from .errors import NoSpanningTreeError, OddParityError, WalkFailureError, WalkPreconditionError
from .graph import Instance, _components, check_even_connected, euler_walk, minimum_spanning_tree
from .model import LinModel, Row, Sense, VarKind, VarRef, X, Y, Z
from .simplex import LpLimits

logger = logging.getLogger(__name__)


class Strategy(enum.Enum):
    Y_BRANCH = "y"
    PARITY_BRANCH = "parity"


class MipStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    GAP_LIMIT = "gap_limit"
    FEASIBLE = "feasible"


@dataclass
class MipLimits:
    max_nodes: int = 200_000
    time_limit: float | None = None
    gap_tol: float = 1e-6
    frac_tol: float = 1e-6
    max_rounds: int = 200
    lp: LpLimits = field(default_factory=LpLimits)


@dataclass
class BranchNode:
    overrides: tuple = ()
    rows: tuple = ()
    bound: float = -math.inf
    depth: int = 0
    basis: object = None


@dataclass
class MipSolution:
    status: MipStatus
    objective: float
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    z: list = field(default_factory=list)
    walk: list = field(default_factory=list)
    node_count: int = 0
    best_bound: float = -math.inf
    log: list = field(default_factory=list)
    cuts_added: int = 0
    cut_pool: list = field(default_factory=list, repr=False)


def _edge_solution(instance: Instance, x: Sequence[int], status: MipStatus, **extra) -> MipSolution:
    x = [int(v) for v in x]
    y = [v % 2 for v in x]
    z = [v // 2 for v in x]
    obj = float(sum(e.cost * v for e, v in zip(instance.graph.edges, x)))
    return MipSolution(status, obj, x, y, z, euler_walk(instance, x), **extra)


def heuristic_tour(instance: Instance) -> MipSolution:
    """Every edge of a minimum spanning tree walked twice."""
    x = [0] * instance.graph.num_edges
    for eid in minimum_spanning_tree(instance.graph):
        x[eid] = 2
    return _edge_solution(instance, x, MipStatus.FEASIBLE)


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Certificate:
    tree_edges: tuple[int, ...]
    x: tuple[int, ...]
    walk: tuple[int, ...]


def certify_solution(instance: Instance, y, z) -> Certificate:
    """Spanning-tree witness, parity check and Euler walk for integral ``(y, z)``."""
    g = instance.graph
    y = [int(round(v)) for v in y]
    z = [int(round(v)) for v in z]
    for e, (ye, ze) in enumerate(zip(y, z)):
        if ye not in (0, 1) or ze not in (0, 1) or ye + ze > 1:
            raise ValueError(f"edge {e}: need binary y, z with y + z <= 1, got y={ye}, z={ze}")
    support = [e for e in range(g.num_edges) if y[e] + z[e] > 0]
    comp = _components(g, support)
    home_comp = comp[instance.home]
    stranded = [v for v in instance.destinations if comp[v] != home_comp]
    if stranded:
        raise NoSpanningTreeError(f"destinations {stranded} are not reached from home", stranded)
    tree = []
    seen = {instance.home}
    stack = [instance.home]
    while stack:
        u = stack.pop()
        for eid in g.adjacency[u]:
            w = g.edges[eid].other(u)
            if y[eid] + z[eid] > 0 and w not in seen:
                seen.add(w)
                tree.append(eid)
                stack.append(w)
    ydeg = [0] * g.num_nodes
    for e in g.edges:
        ydeg[e.u] += y[e.id]
        ydeg[e.v] += y[e.id]
    odd = [v for v in range(g.num_nodes) if ydeg[v] % 2]
    if odd:
        raise OddParityError(f"odd y-degree at nodes {odd}", odd)
    x = [ye + 2 * ze for ye, ze in zip(y, z)]
    try:
        walk = euler_walk(instance, x)
    except WalkPreconditionError as exc:
        raise WalkFailureError(str(exc)) from exc
    return Certificate(tuple(sorted(tree)), tuple(x), tuple(walk))


# ---------------------------------------------------------------------------
# search


def _most_fractional(values, tol):
    best, best_dist = None, None
    for e, v in enumerate(values):
        frac = v - math.floor(v)
        if tol < frac < 1 - tol:
            dist = abs(frac - 0.5)
            if best is None or dist < best_dist:
                best, best_dist = e, dist
    return best


def default_separators(model: LinModel):
    seps = []
    kinds = {c.ref.kind for c in model.columns}
    if VarKind.FLOW not in kinds:
        seps.append(subtour_separator)
    if VarKind.Y in kinds and not any(name.startswith("par_") for name in model.row_names):
        seps.append(parity_separator)
    return seps


def _degree_row(instance, v, sense, rhs, tag):
    return Row.build(f"pb_{v}_{tag}_{rhs:g}", [(X(e), 1.0) for e in instance.graph.adjacency[v]], sense, rhs)


def solve_mip(model: LinModel, strategy: Strategy = Strategy.Y_BRANCH, limits: MipLimits | None = None,
              separators=None, incumbent: MipSolution | None = None) -> MipSolution:
    """Best-bound branch-and-bound (deeper nodes first on ties).

    Cuts found at any node are valid for every tour and are kept globally.
    """
    limits = limits or MipLimits()
    inst: Instance = model.instance
    g = inst.graph
    if strategy is Strategy.Y_BRANCH and not model.has(Y(0)) and g.num_edges:
        raise ValueError("y-branching needs a y/z model")
    model = model.with_integrality([VarKind.Y] if strategy is Strategy.Y_BRANCH else [VarKind.X])
    seps = default_separators(model) if separators is None else list(separators)
    base_lo = np.array([c.lower for c in model.columns])
    base_hi = np.array([c.upper for c in model.columns])
    costs = [e.cost for e in g.edges]
    step = 1.0 if all(float(c).is_integer() for c in costs) else 0.0

    best = incumbent if incumbent is not None else heuristic_tour(inst)
    best_obj = best.objective
    tol = limits.gap_tol

    def prunable(bound):
        if step:
            return bound > best_obj - step + tol
        return bound >= best_obj - tol

    counter = itertools.count()
    heap = [(-math.inf, 0, next(counter), BranchNode())]
    start = time.monotonic()
    processed = 0
    pool = []
    log = []
    status = MipStatus.OPTIMAL
    while heap:
        if processed >= limits.max_nodes or (
                limits.time_limit is not None and time.monotonic() - start > limits.time_limit):
            status = MipStatus.GAP_LIMIT
            break
        bound, _, _, node = heapq.heappop(heap)
        if prunable(node.bound):
            log.append((node.depth, node.bound, "pruned"))
            continue
        processed += 1
        lo, hi = base_lo.copy(), base_hi.copy()
        for ref, a, b in node.overrides:
            j = model.index[ref]
            lo[j], hi[j] = a, b
        res = cutting_plane(model, seps, limits.max_rounds, limits.lp, lower=lo, upper=hi,
                            extra_rows=node.rows, basis=node.basis)
        pool.extend(res.cuts)
        model = res.model
        if res.status is LoopStatus.LP_FAILED:
            log.append((node.depth, node.bound, f"lp {res.solution.status.value}"))
            if res.solution.status.value != "infeasible":
                status = MipStatus.GAP_LIMIT
            continue
        node.basis = res.solution.basis
        sol = res.solution
        lp_bound = sol.objective
        if prunable(lp_bound):
            log.append((node.depth, lp_bound, "pruned by bound"))
            continue
        xv = model.edge_vector(sol.primal, VarKind.X)
        children = []
        action = None
        if strategy is Strategy.Y_BRANCH:
            yv = model.edge_vector(sol.primal, VarKind.Y)
            e = _most_fractional(yv, limits.frac_tol)
            if e is not None:
                action = f"branch y_{e}"
                children = [((Y(e), 0.0, 0.0),), ((Y(e), 1.0, 1.0),)]
            else:
                zv = model.edge_vector(sol.primal, VarKind.Z)
                e = _most_fractional(zv, limits.frac_tol)
                if e is not None:
                    logger.debug("fractional z_%d = %.6g with integral y; branching on z", e, zv[e])
                    action = f"branch z_{e}"
                    children = [((Z(e), 0.0, 0.0),), ((Z(e), 1.0, 1.0),)]
        else:
            e = _most_fractional(xv, limits.frac_tol)
            if e is not None:
                action = f"branch x_{e}"
                j = model.index[X(e)]
                children = [((X(e), lo[j], math.floor(xv[e])),), ((X(e), math.ceil(xv[e]), hi[j]),)]
        if action is None:
            xi = [int(round(v)) for v in xv]
            verdict = check_even_connected(inst, xi)
            if verdict.odd_nodes and strategy is Strategy.PARITY_BRANCH:
                dests = [v for v in verdict.odd_nodes if inst.is_destination(v)]
                v = min(dests) if dests else min(verdict.odd_nodes)
                q = sum(xi[eid] for eid in g.adjacency[v])
                action = f"parity node {v} degree {q}"
                children = [((), (_degree_row(inst, v, Sense.LE, q - 1, "le"),)),
                            ((), (_degree_row(inst, v, Sense.GE, q + 1, "ge"),))]
            elif not verdict.ok:
                lazy = []
                if verdict.odd_nodes:
                    lazy += separate_parity(inst, [v % 2 for v in xi])
                lazy += separate_subtour(inst, xi)
                new = {c.row.name: c for c in lazy if c.row.name not in model.row_names}
                if not new:
                    raise RuntimeError(f"integral point fails tour check ({verdict.describe()}) "
                                       "and no cut separates it")
                model = model.with_rows([c.row for c in new.values()])
                pool.extend(new.values())
                log.append((node.depth, lp_bound, f"lazy cuts {len(new)}"))
                node.bound = lp_bound
                heapq.heappush(heap, (lp_bound, -node.depth, next(counter), node))
                continue
            else:
                obj = float(sum(c * v for c, v in zip(costs, xi)))
                if obj < best_obj - tol:
                    best = _edge_solution(inst, xi, MipStatus.FEASIBLE)
                    best_obj = obj
                log.append((node.depth, lp_bound, f"incumbent {obj:g}"))
                continue
        log.append((node.depth, lp_bound, action))
        logger.debug("depth %d bound %.9g %s", node.depth, lp_bound, action)
        for spec in children:
            if strategy is Strategy.PARITY_BRANCH and action.startswith("parity"):
                overrides, rows = node.overrides, node.rows + spec[1]
            else:
                overrides, rows = node.overrides + spec, node.rows
            child = BranchNode(overrides, rows, lp_bound, node.depth + 1, node.basis)
            heapq.heappush(heap, (lp_bound, -child.depth, next(counter), child))

    open_bounds = [b for b, *_ in heap]
    if status is MipStatus.OPTIMAL:
        best_bound = best_obj
    else:
        best_bound = min(open_bounds + [best_obj])
    final_status = status
    if status is MipStatus.OPTIMAL and best.status is MipStatus.FEASIBLE and math.isinf(best_obj):
        final_status = MipStatus.INFEASIBLE
    best.status = final_status
    best.node_count = processed
    best.best_bound = best_bound
    best.log = log
    best.cuts_added = len(pool)
    best.cut_pool = pool
    return best
