"""Graphical TSP toolkit: CFN and y/z formulations, a bounded-variable simplex,
parity and subtour separation, branch-and-bound and gap reporting."""

from .branch import (
    Certificate,
    MipLimits,
    MipSolution,
    MipStatus,
    Strategy,
    certify_solution,
    heuristic_tour,
    solve_mip,
)
from .cuts import (
    CutKind,
    CuttingPlaneResult,
    LoopStatus,
    ViolatedCut,
    cutting_plane,
    dump_cut_pool,
    separate_halfz,
    separate_parity,
    separate_subtour,
)
from .formulation import (
    BuildOptions,
    Formulation,
    ParityMode,
    SubtourMode,
    build_cfn,
    build_dfj,
    build_model,
    build_yz,
    enumerate_parity_rows,
    make_halfz_row,
    make_parity_row,
    make_subtour_flow_system,
    make_tree_system,
)
from .graph import (
    Edge,
    Instance,
    Node,
    NodeKind,
    SparseGraph,
    check_even_connected,
    euler_walk,
    remove_steiner,
    shortest_path_tree,
    subdivide_all_edges,
)
from .instances import (
    InstanceSpec,
    build_instance,
    gen_path_config,
    gen_subdivided_cubic,
    parse_graph,
    parse_instance_spec,
    serialize_graph,
)
from .lpformat import export_lp
from .model import Column, LinModel, Row, Sense, VarKind, VarRef
from .report import GapReport, RunConfig, SolveMode, emit_scatter_data, run
from .simplex import LpLimits, LpSolution, LpStatus, resolve_with_rows, solve_lp

__version__ = "0.1.0"
