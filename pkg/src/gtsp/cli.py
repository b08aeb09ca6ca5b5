"""Command line front end.

Instance sources are written as ``paths:P,L[,COST]``, ``cubic:BASE[,TIMES]``
or ``file:GRAPH,INSTANCE``.

Exit codes: 0 success, 1 other error, 2 parse/usage error, 3 infeasible,
4 limit hit.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .branch import MipLimits, MipStatus, Strategy, default_separators, solve_mip
from .cuts import cutting_plane, dump_cut_pool
from .errors import (
    DisconnectedDestinationsError,
    GraphFormatError,
    GtspError,
    InfeasibleModelError,
    SolveLimitError,
    UnknownCityError,
)
from .formulation import BuildOptions, Formulation, ParityMode, SubtourMode, build_model
from .graph import Instance, remove_steiner
from .instances import (
    InstanceSpec,
    NAMED_CUBIC,
    gen_path_config,
    gen_subdivided_cubic,
    serialize_graph,
    serialize_instance_spec,
)
from .lpformat import export_lp
from .model import VarKind
from .report import RunConfig, SolveMode, emit_scatter_data, format_table, load_instance, run
from .simplex import LpLimits

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3, 4


class UsageError(GtspError):
    pass


def parse_source(text: str) -> dict:
    """Map a source string to ``RunConfig`` keyword arguments."""
    kind, _, rest = text.partition(":")
    args = [a for a in rest.split(",") if a] if rest else []
    try:
        if kind == "paths" and len(args) in (2, 3):
            cost = float(args[2]) if len(args) == 3 else 1
            if float(cost).is_integer():
                cost = int(cost)
            return {"generator": ("paths", int(args[0]), int(args[1]), cost)}
        if kind == "cubic" and len(args) in (1, 2):
            return {"generator": ("cubic", args[0], int(args[1]) if len(args) == 2 else 1)}
        if kind == "file" and len(args) == 2:
            return {"graph_path": args[0], "instance_path": args[1]}
    except ValueError:
        pass
    raise UsageError(f"bad instance source {text!r}; use paths:P,L[,C], cubic:BASE[,T] or file:GRAPH,INST")


def _options(ns) -> BuildOptions:
    return BuildOptions(
        formulation=Formulation(ns.formulation),
        subtour_mode=SubtourMode(ns.subtour),
        parity_mode=ParityMode(ns.parity),
        include_tree=ns.tree,
        include_halfz=ns.halfz,
        enumerate_cap=ns.enumerate_cap,
    )


def _limits(ns) -> MipLimits:
    return MipLimits(max_nodes=ns.max_nodes, time_limit=ns.time_limit,
                     lp=LpLimits(max_iterations=ns.max_iterations))


def _config(ns, source, **extra) -> RunConfig:
    return RunConfig(**parse_source(source), options=_options(ns), remove_steiner=ns.remove_steiner,
                     limits=_limits(ns), **extra)


def _instance(ns, source) -> Instance:
    inst = load_instance(_config(ns, source))
    if ns.remove_steiner and inst.steiners:
        inst = remove_steiner(inst)
    return inst


def _write_pair(inst: Instance, prefix: str, out) -> None:
    names = [node.name for node in inst.graph.nodes]
    spec = InstanceSpec(inst.name, [names[v] for v in inst.destinations], names[inst.home])
    gpath, ipath = Path(prefix + ".graph"), Path(prefix + ".inst")
    gpath.write_text(serialize_graph(inst.graph))
    ipath.write_text(serialize_instance_spec(spec))
    print(f"wrote {gpath} ({inst.graph.num_nodes} nodes, {inst.graph.num_edges} edges) and {ipath}", file=out)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen_paths(ns, out):
    inst = gen_path_config(ns.num_paths, ns.path_len, ns.cost)
    _write_pair(inst, ns.out or inst.name, out)


def cmd_gen_cubic(ns, out):
    inst = gen_subdivided_cubic(ns.base, ns.times)
    _write_pair(inst, ns.out or inst.name, out)


def cmd_steiner_remove(ns, out):
    inst = _instance(ns, ns.source)
    reduced = remove_steiner(inst)
    print(f"{inst.name}: {inst.graph.num_edges} edges with {len(inst.steiners)} Steiner nodes, "
          f"{reduced.graph.num_edges} edges without", file=out)
    if ns.out:
        _write_pair(reduced, ns.out, out)


def cmd_export_lp(ns, out):
    inst = _instance(ns, ns.source)
    model = build_model(inst, _options(ns))
    if ns.ip:
        model = model.with_integrality([VarKind.Y] if ns.formulation == "yz" else [VarKind.X])
    if ns.out:
        with open(ns.out, "w") as fh:
            export_lp(model, fh)
    else:
        export_lp(model, out)


def cmd_solve(ns, out):
    inst = _instance(ns, ns.source)
    opts = _options(ns)
    model = build_model(inst, opts)
    if ns.ip:
        strategy = Strategy(ns.strategy) if ns.strategy else (
            Strategy.Y_BRANCH if opts.formulation is Formulation.YZ else Strategy.PARITY_BRANCH)
        sol = solve_mip(model, strategy, _limits(ns))
        if ns.verbose:
            for depth, bound, action in sol.log:
                print(f"{depth} {bound:.9g} {action}", file=sys.stderr)
        if ns.dump_cuts:
            Path(ns.dump_cuts).write_text(dump_cut_pool(sol.cut_pool))
        if sol.status is MipStatus.INFEASIBLE:
            raise InfeasibleModelError(f"no tour for {inst.name}")
        names = [node.name for node in inst.graph.nodes]
        fields = {"name": inst.name, "formulation": opts.formulation.value, "mode": "ip",
                  "status": sol.status.value, "objective": f"{sol.objective:.2f}",
                  "bound": f"{sol.best_bound:.2f}", "nodes": str(sol.node_count)}
        _emit(ns, fields, out)
        if ns.output == "table":
            print("walk " + " ".join(names[v] for v in sol.walk), file=out)
        if sol.status is not MipStatus.OPTIMAL:
            raise SolveLimitError(f"search stopped with gap ({sol.status.value})")
        return
    res = cutting_plane(model, default_separators(model), ns.max_rounds, _limits(ns).lp)
    if ns.dump_cuts:
        Path(ns.dump_cuts).write_text(dump_cut_pool(res.cuts))
    status = res.solution.status
    if status.value == "infeasible":
        raise InfeasibleModelError(f"relaxation of {inst.name} is infeasible")
    if status.value != "optimal":
        raise SolveLimitError(f"LP stopped: {status.value}")
    fields = {"name": inst.name, "formulation": opts.formulation.value, "mode": "lp",
              "status": res.status.value, "objective": f"{res.solution.objective:.2f}",
              "rounds": str(res.rounds), "cuts": str(len(res.cuts))}
    _emit(ns, fields, out)
    if res.status.value == "round_limit":
        raise SolveLimitError("cut loop hit the round limit")


def _emit(ns, fields, out):
    if ns.output == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(fields.keys())
        w.writerow(fields.values())
    else:
        for k, v in fields.items():
            print(f"{k:12s}{v}", file=out)


def cmd_gap(ns, out):
    rep = run(_config(ns, ns.source, mode=SolveMode(ns.mode)))
    out.write(emit_scatter_data([rep]) if ns.output == "csv" else format_table([rep]))


def cmd_scatter(ns, out):
    reports = [run(_config(ns, src, mode=SolveMode.BOTH)) for src in ns.sources]
    out.write(emit_scatter_data(reports))


# ---------------------------------------------------------------------------
# parser


def _model_flags(p):
    p.add_argument("--formulation", choices=["cfn", "yz"], default="yz")
    p.add_argument("--subtour", choices=["compact", "cuts"], default="compact")
    p.add_argument("--parity", choices=["enum", "sep"], default="enum")
    p.add_argument("--tree", action="store_true", help="add the spanning-tree flow system")
    p.add_argument("--halfz", action="store_true", help="add half-z path rows")
    p.add_argument("--enumerate-cap", type=int, default=10)
    p.add_argument("--remove-steiner", action="store_true")


def _limit_flags(p):
    p.add_argument("--max-nodes", type=int, default=200_000)
    p.add_argument("--max-iterations", type=int, default=200_000)
    p.add_argument("--max-rounds", type=int, default=200)
    p.add_argument("--time-limit", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gtsp", description="Graphical TSP formulations and gap experiments")
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="print the search log; twice for debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-paths", help="write a k-path configuration")
    p.add_argument("num_paths", type=int)
    p.add_argument("path_len", type=int)
    p.add_argument("--cost", type=int, default=1)
    p.add_argument("-o", "--out", help="output prefix (default: instance name)")
    p.set_defaults(func=cmd_gen_paths)

    p = sub.add_parser("gen-cubic", help="write a subdivided 3-regular gadget")
    p.add_argument("base", choices=sorted(NAMED_CUBIC))
    p.add_argument("--times", type=int, choices=[1, 2], default=1)
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_gen_cubic)

    for name, func, hlp in (("solve", cmd_solve, "solve one relaxation or IP"),
                            ("gap", cmd_gap, "gap report for one instance"),
                            ("export-lp", cmd_export_lp, "write the model in LP format"),
                            ("steiner-remove", cmd_steiner_remove, "contract Steiner nodes")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("source")
        _model_flags(p)
        _limit_flags(p)
        p.add_argument("--output", choices=["table", "csv"], default="table")
        p.add_argument("--ip", action="store_true", help="enforce integrality")
        p.add_argument("-o", "--out")
        p.set_defaults(func=func)
        if name == "solve":
            p.add_argument("--strategy", choices=["y", "parity"])
            p.add_argument("--dump-cuts", metavar="PATH", help="write the cut pool, one cut per line")
        if name == "gap":
            p.add_argument("--mode", choices=["relax", "ip", "both"], default="both")

    p = sub.add_parser("scatter", help="closure / z-edge CSV over several instances")
    p.add_argument("sources", nargs="*")
    _model_flags(p)
    _limit_flags(p)
    p.set_defaults(func=cmd_scatter, halfz=True)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose > 1 else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ns.func(ns, out)
    except (GraphFormatError, UnknownCityError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleModelError, DisconnectedDestinationsError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolveLimitError as exc:
        print(f"limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (GtspError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
