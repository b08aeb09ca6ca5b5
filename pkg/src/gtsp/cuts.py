"""Separation routines and the cutting-plane loop."""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .formulation import halfz_edges, make_halfz_row, make_parity_row, make_subtour_row
from .graph import Instance
from .model import LinModel, Row, VarKind
from .simplex import LpLimits, LpSolution, solve_lp

logger = logging.getLogger(__name__)


class CutKind(enum.Enum):
    PARITY = "parity"
    SUBTOUR = "subtour"
    HALFZ = "halfz"


@dataclass(frozen=True)
class ViolatedCut:
    """``key`` is ``(node, mask)`` for parity cuts, the node set for subtour
    cuts and the edge id for half-z cuts."""

    kind: CutKind
    key: object
    violation: float
    row: Row

    def describe(self) -> str:
        if self.kind is CutKind.PARITY:
            node, mask = self.key
            body = f"{node} {mask:x}"
        elif self.kind is CutKind.SUBTOUR:
            body = ",".join(str(v) for v in sorted(self.key))
        else:
            body = str(self.key)
        return f"{self.kind.value} {body} {self.violation:.9g}"


def dump_cut_pool(cuts: Sequence[ViolatedCut]) -> str:
    return "".join(c.describe() + "\n" for c in cuts)


# ---------------------------------------------------------------------------
# parity


def min_odd_lhs(values: Sequence[float]) -> tuple[float, list[int]]:
    """Smallest odd-set left-hand side over the incident values of one node.

    Returns the value and the positions in the odd set.  Positions above 1/2
    go in the set, the rest stay out; when that leaves an even set the
    position closest to 1/2 (first on ties) switches sides.
    """
    vals = np.asarray(values, dtype=float)
    if len(vals) == 0:
        return float("inf"), []
    inside = vals > 0.5
    lhs = float(np.where(inside, 1.0 - vals, vals).sum())
    if inside.sum() % 2 == 0:
        flip = int(np.argmin(np.abs(vals - 0.5)))
        inside[flip] = not inside[flip]
        lhs += abs(2.0 * vals[flip] - 1.0)
    return lhs, [int(i) for i in np.flatnonzero(inside)]


def separate_parity(instance: Instance, y, tol: float = 1e-9) -> list[ViolatedCut]:
    """One most-violated odd-set row per node, where any is violated."""
    g = instance.graph
    cuts = []
    for v in range(g.num_nodes):
        adj = g.adjacency[v]
        if not adj:
            continue
        lhs, pos = min_odd_lhs([y[e] for e in adj])
        if 1.0 - lhs > tol:
            odd = [adj[i] for i in pos]
            mask = sum(1 << i for i in pos)
            cuts.append(ViolatedCut(CutKind.PARITY, (v, mask), 1.0 - lhs, make_parity_row(g, v, odd)))
    return cuts


# ---------------------------------------------------------------------------
# subtour


def _max_flow(n: int, arcs: dict, source: int, sink: int, stop_at: float):
    """Shortest augmenting paths on a symmetric capacity map; stops once ``stop_at`` is reached."""
    residual = {u: dict(nbrs) for u, nbrs in arcs.items()}
    for u in range(n):
        residual.setdefault(u, {})
    flow = 0.0
    while flow < stop_at:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for w, cap in residual[u].items():
                if cap > 1e-12 and w not in parent:
                    parent[w] = u
                    queue.append(w)
        if sink not in parent:
            break
        path = []
        w = sink
        while parent[w] is not None:
            path.append((parent[w], w))
            w = parent[w]
        push = min(residual[u][w] for u, w in path)
        for u, w in path:
            residual[u][w] -= push
            residual[w][u] = residual[w].get(u, 0.0) + push
        flow += push
    reach = {source}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w, cap in residual[u].items():
            if cap > 1e-12 and w not in reach:
                reach.add(w)
                queue.append(w)
    return flow, reach


def separate_subtour(instance: Instance, x, threshold: float = 2.0 - 1e-6) -> list[ViolatedCut]:
    """Min-cut separation of ``x(delta(S)) >= 2`` between home and each destination."""
    g = instance.graph
    arcs: dict[int, dict[int, float]] = {}
    for e in g.edges:
        if x[e.id] > 1e-12:
            arcs.setdefault(e.u, {})
            arcs.setdefault(e.v, {})
            arcs[e.u][e.v] = arcs[e.u].get(e.v, 0.0) + float(x[e.id])
            arcs[e.v][e.u] = arcs[e.v].get(e.u, 0.0) + float(x[e.id])
    found: dict[frozenset, ViolatedCut] = {}
    for k in instance.destinations:
        if k == instance.home:
            continue
        value, reach = _max_flow(g.num_nodes, arcs, instance.home, k, 2.0)
        if value < threshold:
            side = frozenset(v for v in range(g.num_nodes) if v not in reach)
            cut_value = sum(float(x[e.id]) for e in g.edges if (e.u in side) != (e.v in side))
            if side not in found:
                found[side] = ViolatedCut(CutKind.SUBTOUR, side, 2.0 - cut_value, make_subtour_row(g, side))
    return list(found.values())


# ---------------------------------------------------------------------------
# half-z


def separate_halfz(instance: Instance, x, z, tol: float = 1e-9) -> list[ViolatedCut]:
    g = instance.graph
    deg = np.zeros(g.num_nodes)
    for e in g.edges:
        deg[e.u] += x[e.id]
        deg[e.v] += x[e.id]
    cuts = []
    for eid in halfz_edges(instance):
        e = g.edges[eid]
        viol = 4.0 - (deg[e.u] + deg[e.v] - 2.0 * z[eid])
        if viol > tol:
            cuts.append(ViolatedCut(CutKind.HALFZ, eid, float(viol), make_halfz_row(instance, eid)))
    return cuts


# ---------------------------------------------------------------------------
# separator adapters and the loop

Separator = Callable[[LinModel, np.ndarray], list]


def parity_separator(model: LinModel, primal) -> list[ViolatedCut]:
    return separate_parity(model.instance, model.edge_vector(primal, VarKind.Y))


def subtour_separator(model: LinModel, primal) -> list[ViolatedCut]:
    return separate_subtour(model.instance, model.edge_vector(primal, VarKind.X))


def halfz_separator(model: LinModel, primal) -> list[ViolatedCut]:
    return separate_halfz(model.instance, model.edge_vector(primal, VarKind.X),
                          model.edge_vector(primal, VarKind.Z))


class LoopStatus(enum.Enum):
    CONVERGED = "converged"
    ROUND_LIMIT = "round_limit"
    LP_FAILED = "lp_failed"


@dataclass
class CuttingPlaneResult:
    status: LoopStatus
    solution: LpSolution
    model: LinModel
    cuts: list = field(default_factory=list)
    rounds: int = 0
    objectives: list = field(default_factory=list)


def cutting_plane(model: LinModel, separators: Sequence[Separator], max_rounds: int = 200,
                  limits: LpLimits | None = None, add_all: bool = True, lower=None, upper=None,
                  extra_rows: Sequence[Row] = (), basis=None) -> CuttingPlaneResult:
    """Solve, separate, add cuts, repeat until no separator fires.

    With ``add_all`` every violated cut of a round is added; otherwise only
    the most violated one.  Returns the final model, which carries all cuts.
    """
    cuts: list[ViolatedCut] = []
    objectives = []
    rounds = 0
    while True:
        sol = solve_lp(model, limits, lower=lower, upper=upper, extra_rows=extra_rows, basis=basis)
        rounds += 1
        if not sol.optimal:
            return CuttingPlaneResult(LoopStatus.LP_FAILED, sol, model, cuts, rounds, objectives)
        objectives.append(sol.objective)
        basis = sol.basis
        fresh: dict[str, ViolatedCut] = {}
        for sep in separators:
            for cut in sep(model, sol.primal):
                if cut.row.name not in model.row_names and cut.row.name not in fresh:
                    fresh[cut.row.name] = cut
        if not fresh:
            return CuttingPlaneResult(LoopStatus.CONVERGED, sol, model, cuts, rounds, objectives)
        new = list(fresh.values())
        if not add_all:
            new = [max(new, key=lambda c: c.violation)]
        logger.debug("round %d: objective %.9g, adding %d cuts", rounds, sol.objective, len(new))
        cuts.extend(new)
        model = model.with_rows([c.row for c in new])
        if rounds >= max_rounds:
            sol = solve_lp(model, limits, lower=lower, upper=upper, extra_rows=extra_rows, basis=basis)
            status = LoopStatus.ROUND_LIMIT if sol.optimal else LoopStatus.LP_FAILED
            return CuttingPlaneResult(status, sol, model, cuts, rounds, objectives)
