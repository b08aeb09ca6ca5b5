"""Graph/instance file formats, instance construction and synthetic families.

Graph file grammar (line oriented, ``#`` starts a comment line)::

    nodes <N> edges <M>
    node <index> <name>        # N lines
    edge <name-u> <name-v> <miles>   # M lines

Instance file grammar::

    instance <name> [home <city>]
    dest <city>                # one per destination
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DanglingEndpointError,
    DuplicateNameError,
    GraphFormatError,
    NotCubicError,
    UnknownCityError,
)
from .graph import Instance, NodeKind, SparseGraph, shortest_path_tree, subdivide_all_edges


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line.split()


def _parse_cost(token: str, lineno: int) -> float:
    try:
        value = int(token)
    except ValueError:
        try:
            value = float(token)
        except ValueError:
            raise GraphFormatError(f"bad edge length {token!r}", lineno) from None
    if not value > 0:
        raise GraphFormatError(f"edge length must be positive, got {token}", lineno)
    return value


def parse_graph(text: str) -> SparseGraph:
    """Parse the plain-text graph format.  Every node comes back as a destination."""
    lines = list(_content_lines(text))
    if not lines:
        raise GraphFormatError("empty graph file", 1)
    lineno, head = lines[0]
    if len(head) != 4 or head[0] != "nodes" or head[2] != "edges":
        raise GraphFormatError("expected header 'nodes <N> edges <M>'", lineno)
    try:
        n_nodes, n_edges = int(head[1]), int(head[3])
    except ValueError:
        raise GraphFormatError("node and edge counts must be integers", lineno) from None

    names: list[str] = []
    by_name: dict[str, int] = {}
    seen_index: set[str] = set()
    edges: list[tuple[int, int, float]] = []
    for lineno, tok in lines[1:]:
        if tok[0] == "node":
            if len(tok) != 3:
                raise GraphFormatError("expected 'node <index> <name>'", lineno)
            if edges:
                raise GraphFormatError("node records must precede edge records", lineno)
            if tok[1] in seen_index:
                raise DuplicateNameError(f"duplicate node index {tok[1]}", lineno)
            if tok[2] in by_name:
                raise DuplicateNameError(f"duplicate node name {tok[2]!r}", lineno)
            seen_index.add(tok[1])
            by_name[tok[2]] = len(names)
            names.append(tok[2])
        elif tok[0] == "edge":
            if len(tok) != 4:
                raise GraphFormatError("expected 'edge <name-u> <name-v> <miles>'", lineno)
            for name in tok[1:3]:
                if name not in by_name:
                    raise DanglingEndpointError(f"edge endpoint {name!r} is not a declared node", lineno)
            u, v = by_name[tok[1]], by_name[tok[2]]
            if u == v:
                raise GraphFormatError(f"self-loop on {tok[1]!r}", lineno)
            edges.append((u, v, _parse_cost(tok[3], lineno)))
        else:
            raise GraphFormatError(f"unknown record type {tok[0]!r}", lineno)
    if len(names) != n_nodes:
        raise GraphFormatError(f"header declares {n_nodes} nodes, found {len(names)}", lines[0][0])
    if len(edges) != n_edges:
        raise GraphFormatError(f"header declares {n_edges} edges, found {len(edges)}", lines[0][0])
    return SparseGraph.from_edges(len(names), edges, names=names)


def _fmt_cost(c: float) -> str:
    return str(int(c)) if float(c).is_integer() else repr(float(c))


def serialize_graph(graph: SparseGraph) -> str:
    out = [f"nodes {graph.num_nodes} edges {graph.num_edges}"]
    out += [f"node {n.id} {n.name}" for n in graph.nodes]
    out += [f"edge {graph.nodes[e.u].name} {graph.nodes[e.v].name} {_fmt_cost(e.cost)}" for e in graph.edges]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class InstanceSpec:
    name: str
    destinations: tuple[str, ...]
    home: str | None = None

    @property
    def home_name(self) -> str:
        return self.home if self.home is not None else self.destinations[-1]


def parse_instance_spec(text: str) -> InstanceSpec:
    name = None
    home = None
    dests: list[str] = []
    for lineno, tok in _content_lines(text):
        if tok[0] == "instance":
            if name is not None:
                raise GraphFormatError("duplicate 'instance' line", lineno)
            if len(tok) == 2:
                name = tok[1]
            elif len(tok) == 4 and tok[2] == "home":
                name, home = tok[1], tok[3]
            else:
                raise GraphFormatError("expected 'instance <name> [home <city>]'", lineno)
        elif tok[0] == "dest":
            if len(tok) != 2:
                raise GraphFormatError("expected 'dest <city>'", lineno)
            if tok[1] in dests:
                raise DuplicateNameError(f"duplicate destination {tok[1]!r}", lineno)
            dests.append(tok[1])
        else:
            raise GraphFormatError(f"unknown record type {tok[0]!r}", lineno)
    if name is None:
        raise GraphFormatError("missing 'instance' line", 1)
    if not dests:
        raise GraphFormatError("instance lists no destinations", 1)
    return InstanceSpec(name, tuple(dests), home)


def serialize_instance_spec(spec: InstanceSpec) -> str:
    head = f"instance {spec.name}" + (f" home {spec.home}" if spec.home is not None else "")
    return "\n".join([head] + [f"dest {d}" for d in spec.destinations]) + "\n"


def build_instance(graph: SparseGraph, spec: InstanceSpec) -> Instance:
    """Restrict ``graph`` to the destinations and the shortest paths joining them.

    One shortest path per destination pair is chosen (lowest-id tie breaking);
    every node on a chosen path is kept and non-destinations become Steiner
    nodes.  The result is the induced subgraph on the kept nodes.
    """
    by_name = {n.name: n.id for n in graph.nodes}
    for city in spec.destinations + (spec.home_name,):
        if city not in by_name:
            raise UnknownCityError(f"unknown city {city!r}")
    if spec.home_name not in spec.destinations:
        raise UnknownCityError(f"home {spec.home_name!r} is not listed as a destination")
    dest_ids = [by_name[c] for c in spec.destinations]
    keep = set(dest_ids)
    ordered = sorted(dest_ids)
    for a, i in enumerate(ordered):
        spt = shortest_path_tree(graph, i)
        for j in ordered[a + 1:]:
            keep.update(spt.path_to(j))
    kept = sorted(keep)
    new_id = {v: k for k, v in enumerate(kept)}
    edges = [(new_id[e.u], new_id[e.v], e.cost) for e in graph.edges if e.u in keep and e.v in keep]
    dset = set(dest_ids)
    kinds = [NodeKind.DESTINATION if v in dset else NodeKind.STEINER for v in kept]
    sub = SparseGraph.from_edges(len(kept), edges, names=[graph.nodes[v].name for v in kept], kinds=kinds)
    return Instance(sub, tuple(new_id[v] for v in dest_ids), new_id[by_name[spec.home_name]], spec.name)


# ---------------------------------------------------------------------------
# synthetic families


def gen_path_config(num_paths: int, path_len: int, edge_cost: float = 1) -> Instance:
    """Two hubs joined by ``num_paths`` internally disjoint paths of ``path_len`` edges.

    Node 0 is the first hub and the home, node 1 the second hub; the path
    interiors follow path by path.
    """
    if num_paths < 3 or path_len < 1 or not edge_cost > 0:
        raise ValueError("need num_paths >= 3, path_len >= 1 and a positive edge cost")
    names = ["h1", "h2"]
    edges = []
    for p in range(num_paths):
        prev = 0
        for k in range(1, path_len):
            names.append(f"p{p + 1}_{k}")
            edges.append((prev, len(names) - 1, edge_cost))
            prev = len(names) - 1
        edges.append((prev, 1, edge_cost))
    graph = SparseGraph.from_edges(len(names), edges, names=names)
    return Instance(graph, tuple(range(len(names))), 0, f"paths{num_paths}x{path_len}")


K4_EDGES = tuple(itertools.combinations(range(4), 2))

PETERSEN_EDGES = (
    (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
    (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
    (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
)

NAMED_CUBIC = {"k4": K4_EDGES, "petersen": PETERSEN_EDGES}


def cubic_base(base: str | Sequence[tuple[int, int]]) -> SparseGraph:
    """Unit-cost base graph, checked to be 3-regular."""
    if isinstance(base, str):
        try:
            pairs = NAMED_CUBIC[base.lower()]
        except KeyError:
            raise NotCubicError(f"unknown gadget {base!r}; choose from {sorted(NAMED_CUBIC)}") from None
    else:
        pairs = tuple(tuple(p) for p in base)
    n = max((max(p) for p in pairs), default=-1) + 1
    graph = SparseGraph.from_edges(n, [(u, v, 1) for u, v in pairs])
    bad = [v for v in range(n) if graph.degree(v) != 3]
    if bad or n == 0:
        raise NotCubicError(f"base graph is not 3-regular (nodes {bad})")
    return graph


def gen_subdivided_cubic(base: str | Sequence[tuple[int, int]], times: int = 1) -> Instance:
    """Subdivide each edge of a 3-regular graph; unit costs, all destinations, home 0."""
    if times not in (1, 2):
        raise ValueError("times must be 1 or 2")
    g = subdivide_all_edges(cubic_base(base), times, keep_unit=True, new_kind=NodeKind.DESTINATION)
    label = base if isinstance(base, str) else "custom"
    return Instance(g, tuple(range(g.num_nodes)), 0, f"{label}-sub{times}")


def hamilton_cycle(graph: SparseGraph) -> list[int] | None:
    """Brute-force Hamilton cycle search (small graphs only)."""
    n = graph.num_nodes
    nbrs = [sorted({graph.edges[e].other(v) for e in graph.adjacency[v]}) for v in range(n)]

    def extend(path, used):
        if len(path) == n:
            return path if 0 in nbrs[path[-1]] else None
        for w in nbrs[path[-1]]:
            if not used[w]:
                used[w] = True
                found = extend(path + [w], used)
                used[w] = False
                if found:
                    return found
        return None

    if n == 0:
        return None
    return extend([0], [True] + [False] * (n - 1))


def half_doubled_tours(base: SparseGraph, cycle: Sequence[int]) -> tuple[list[int], list[int]]:
    """Two tours on the once-subdivided ``base`` averaging to the all-ones vector.

    Both tours follow the Hamilton ``cycle``; for every base edge off the
    cycle, the first tour doubles the half at ``u`` and the second the half
    at ``v``.  Edge order matches :func:`subdivide_all_edges` with ``times=1``.
    """
    on_cycle = set()
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        on_cycle.add(frozenset((a, b)))
    first, second = [], []
    for e in base.edges:
        if frozenset((e.u, e.v)) in on_cycle:
            first += [1, 1]
            second += [1, 1]
        else:
            first += [2, 0]
            second += [0, 2]
    return first, second


def instance_from_edges(n: int, edges: Iterable[tuple[int, int, float]], destinations=None,
                        home=None, name="instance") -> Instance:
    graph = SparseGraph.from_edges(n, list(edges))
    dests = tuple(range(n)) if destinations is None else tuple(destinations)
    return Instance(graph, dests, dests[-1] if home is None else home, name)
