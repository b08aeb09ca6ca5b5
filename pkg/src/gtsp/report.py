"""Integrality-gap experiments: one instance in, one :class:`GapReport` out.

Gap columns follow the baseline convention: ``gap_abs = IP - LP(CFN)`` and
``gap_pct = 100 * gap_abs / IP``.  ``closure_pct`` is the share of that
baseline gap removed by the y/z relaxation; it is undefined (``None``) when
the baseline gap is zero.  ``z_edge_pct`` is measured on the y/z relaxation:
the percentage of edges with ``x_e > 0`` that also have ``z_e > 0``.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .branch import MipLimits, MipSolution, MipStatus, Strategy, default_separators, solve_mip
from .cuts import LoopStatus, cutting_plane
from .errors import InfeasibleModelError, SolveLimitError
from .formulation import BuildOptions, Formulation, build_cfn, build_yz
from .graph import Instance, remove_steiner
from .instances import build_instance, gen_path_config, gen_subdivided_cubic, parse_graph, parse_instance_spec
from .model import LinModel, VarKind
from .simplex import LpLimits, LpStatus

CSV_HEADER = ("name", "destinations", "steiner", "lp_cfn", "lp_yz", "ip",
              "gap_abs", "gap_pct", "closure_pct", "z_edge_pct")

SUPPORT_TOL = 1e-6


class SolveMode(enum.Enum):
    RELAX = "relax"
    IP = "ip"
    BOTH = "both"


@dataclass
class GapReport:
    name: str
    destinations: int
    steiner: int
    edges: int
    edges_without_steiner: int
    lp_cfn: float | None = None
    lp_yz: float | None = None
    ip: float | None = None
    gap_abs: float | None = None
    gap_pct: float | None = None
    closure_pct: float | None = None
    z_edge_pct: float | None = None
    ip_solution: MipSolution | None = field(default=None, repr=False, compare=False)

    def csv_row(self) -> list[str]:
        return [self.name, str(self.destinations), str(self.steiner)] + [
            _fmt(getattr(self, k)) for k in CSV_HEADER[3:]]


def _fmt(v) -> str:
    return "" if v is None else f"{v:.2f}"


@dataclass
class RunConfig:
    """Exactly one instance source: files, a generator tuple, or an ``Instance``.

    ``generator`` is ``("paths", num_paths, path_len, edge_cost)`` or
    ``("cubic", base, times)``.
    """

    graph_path: str | None = None
    instance_path: str | None = None
    generator: tuple | None = None
    instance: Instance | None = None
    options: BuildOptions = BuildOptions(include_halfz=True)
    mode: SolveMode = SolveMode.BOTH
    remove_steiner: bool = False
    output: str = "table"
    limits: MipLimits = field(default_factory=MipLimits)

    def __post_init__(self):
        sources = [self.graph_path is not None or self.instance_path is not None,
                   self.generator is not None, self.instance is not None]
        if sum(sources) != 1:
            raise ValueError("give exactly one instance source")
        if sources[0] and (self.graph_path is None or self.instance_path is None):
            raise ValueError("file input needs both a graph file and an instance file")


def load_instance(config: RunConfig) -> Instance:
    if config.instance is not None:
        return config.instance
    if config.generator is not None:
        kind, *args = config.generator
        if kind == "paths":
            return gen_path_config(*args)
        if kind == "cubic":
            return gen_subdivided_cubic(*args)
        raise ValueError(f"unknown generator {kind!r}")
    graph = parse_graph(Path(config.graph_path).read_text())
    spec = parse_instance_spec(Path(config.instance_path).read_text())
    return build_instance(graph, spec)


def relax(model: LinModel, limits: LpLimits | None = None, max_rounds: int = 200):
    """LP optimum of ``model`` with the separators its rows leave open.

    Returns ``(objective, primal, final_model)``.
    """
    res = cutting_plane(model, default_separators(model), max_rounds, limits)
    if res.status is LoopStatus.LP_FAILED:
        if res.solution.status is LpStatus.INFEASIBLE:
            raise InfeasibleModelError(f"relaxation of {_name(model)} is infeasible")
        raise SolveLimitError(f"relaxation of {_name(model)} stopped: {res.solution.status.value}")
    if res.status is LoopStatus.ROUND_LIMIT:
        raise SolveLimitError(f"cut loop for {_name(model)} hit the round limit")
    return res.solution.objective, res.solution.primal, res.model


def _name(model):
    return getattr(model.instance, "name", "model")


def z_edge_percent(model: LinModel, primal) -> float | None:
    x = model.edge_vector(primal, VarKind.X)
    z = model.edge_vector(primal, VarKind.Z)
    support = [e for e, v in enumerate(x) if v > SUPPORT_TOL]
    if not support:
        return None
    return 100.0 * sum(1 for e in support if z[e] > SUPPORT_TOL) / len(support)


def solve_ip(instance: Instance, options: BuildOptions, limits: MipLimits | None = None) -> MipSolution:
    if options.formulation is Formulation.CFN:
        sol = solve_mip(build_cfn(instance, options), Strategy.PARITY_BRANCH, limits)
    else:
        sol = solve_mip(build_yz(instance, options), Strategy.Y_BRANCH, limits)
    if sol.status is MipStatus.INFEASIBLE:
        raise InfeasibleModelError(f"no tour for {instance.name}")
    if sol.status is not MipStatus.OPTIMAL:
        raise SolveLimitError(f"search for {instance.name} stopped at {sol.objective:g} "
                              f"(bound {sol.best_bound:g})")
    return sol


def run(config: RunConfig) -> GapReport:
    instance = load_instance(config)
    removed = remove_steiner(instance) if instance.steiners else instance
    if config.remove_steiner:
        instance = removed
    rep = GapReport(instance.name, instance.num_destinations, len(instance.steiners),
                    instance.graph.num_edges, removed.graph.num_edges)
    yz_opts = dataclasses.replace(config.options, formulation=Formulation.YZ)
    cfn_opts = dataclasses.replace(config.options, formulation=Formulation.CFN)
    if config.mode in (SolveMode.RELAX, SolveMode.BOTH):
        rep.lp_cfn, _, _ = relax(build_cfn(instance, cfn_opts), config.limits.lp)
        rep.lp_yz, primal, model = relax(build_yz(instance, yz_opts), config.limits.lp)
        rep.z_edge_pct = z_edge_percent(model, primal)
    if config.mode in (SolveMode.IP, SolveMode.BOTH):
        sol = solve_ip(instance, config.options, config.limits)
        rep.ip, rep.ip_solution = sol.objective, sol
    fill_gaps(rep)
    return rep


def fill_gaps(rep: GapReport) -> GapReport:
    if rep.ip is None:
        return rep
    lp = rep.lp_cfn if rep.lp_cfn is not None else rep.lp_yz
    if lp is None:
        return rep
    rep.gap_abs = rep.ip - lp
    rep.gap_pct = 100.0 * rep.gap_abs / rep.ip if rep.ip else 0.0
    if rep.lp_cfn is not None and rep.lp_yz is not None:
        rep.closure_pct = closure(rep.ip - rep.lp_cfn, rep.ip - rep.lp_yz)
    return rep


def closure(gap_base: float, gap_new: float, tol: float = 1e-9) -> float | None:
    if gap_base <= tol:
        return None
    return 100.0 * (gap_base - gap_new) / gap_base


def emit_scatter_data(reports: Sequence[GapReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        w.writerow(rep.csv_row())
    return buf.getvalue()


def format_table(reports: Sequence[GapReport]) -> str:
    head = ["instance", "dest", "steiner", "edges", "edges w/o", "LP cfn", "LP yz", "IP",
            "gap", "gap %", "closed %", "z %"]
    rows = [[r.name, str(r.destinations), str(r.steiner), str(r.edges), str(r.edges_without_steiner),
             _fmt(r.lp_cfn), _fmt(r.lp_yz), _fmt(r.ip), _fmt(r.gap_abs), _fmt(r.gap_pct),
             _fmt(r.closure_pct), _fmt(r.z_edge_pct)] for r in reports]
    rows = [[c or "-" for c in row] for row in rows]
    widths = [max(len(row[i]) for row in [head] + rows) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))
             for row in [head] + rows]
    return "\n".join(lines) + "\n"
