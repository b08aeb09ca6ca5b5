"""Sparse undirected multigraphs, GTSP instances and walk machinery.

Node and edge ids are dense 0-based integers.  Graph values are treated as
immutable: every operation returns a new object.
"""

from __future__ import annotations

import enum
import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DisconnectedDestinationsError,
    InvalidInstanceError,
    WalkPreconditionError,
)

logger = logging.getLogger(__name__)


class NodeKind(enum.Enum):
    DESTINATION = "destination"
    STEINER = "steiner"


@dataclass(frozen=True)
class Node:
    id: int
    name: str
    kind: NodeKind = NodeKind.DESTINATION


@dataclass(frozen=True)
class Edge:
    id: int
    u: int
    v: int
    cost: float

    def other(self, node: int) -> int:
        return self.v if node == self.u else self.u


@dataclass(frozen=True)
class SparseGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adj: list[list[int]] = [[] for _ in self.nodes]
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise InvalidInstanceError(f"node ids must be contiguous, got {node.id} at {i}")
        for i, e in enumerate(self.edges):
            if e.id != i:
                raise InvalidInstanceError(f"edge ids must be contiguous, got {e.id} at {i}")
            if e.u == e.v:
                raise InvalidInstanceError(f"self-loop on node {e.u} (edge {i})")
            if not (0 <= e.u < len(self.nodes) and 0 <= e.v < len(self.nodes)):
                raise InvalidInstanceError(f"edge {i} has an endpoint outside the node range")
            if not (e.cost >= 0) or math.isinf(e.cost):
                raise InvalidInstanceError(f"edge {i} has invalid cost {e.cost!r}")
            adj[e.u].append(i)
            adj[e.v].append(i)
        object.__setattr__(self, "adjacency", tuple(tuple(a) for a in adj))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]], names=None, kinds=None):
        """Build a graph on nodes ``0..n-1`` from ``(u, v, cost)`` triples."""
        names = names or [str(i) for i in range(n)]
        kinds = kinds or [NodeKind.DESTINATION] * n
        nodes = tuple(Node(i, names[i], kinds[i]) for i in range(n))
        return cls(nodes, tuple(Edge(i, u, v, c) for i, (u, v, c) in enumerate(edges)))

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def costs(self) -> list[float]:
        return [e.cost for e in self.edges]

    def node_id(self, name: str) -> int:
        for node in self.nodes:
            if node.name == name:
                return node.id
        raise KeyError(name)

    def with_kinds(self, kinds: Sequence[NodeKind]) -> "SparseGraph":
        nodes = tuple(Node(n.id, n.name, k) for n, k in zip(self.nodes, kinds))
        return SparseGraph(nodes, self.edges)


@dataclass(frozen=True)
class Instance:
    """A graph plus its destination set; ``home`` is one of the destinations."""

    graph: SparseGraph
    destinations: tuple[int, ...]
    home: int
    name: str = "instance"
    steiners: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        dests = tuple(self.destinations)
        object.__setattr__(self, "destinations", dests)
        if not dests:
            raise InvalidInstanceError("an instance needs at least one destination")
        if len(set(dests)) != len(dests):
            raise InvalidInstanceError("duplicate destinations")
        if self.home not in dests:
            raise InvalidInstanceError(f"home {self.home} is not a destination")
        dset = set(dests)
        steiners = tuple(v for v in range(self.graph.num_nodes) if v not in dset)
        object.__setattr__(self, "steiners", steiners)
        kinds = [NodeKind.DESTINATION if v in dset else NodeKind.STEINER
                 for v in range(self.graph.num_nodes)]
        if any(n.kind != k for n, k in zip(self.graph.nodes, kinds)):
            object.__setattr__(self, "graph", self.graph.with_kinds(kinds))
        if not _connects(self.graph, dests, range(self.graph.num_edges)):
            raise DisconnectedDestinationsError("destinations are not connected in the graph")

    @classmethod
    def all_destinations(cls, graph: SparseGraph, home: int | None = None, name="instance"):
        n = graph.num_nodes
        home = n - 1 if home is None else home
        return cls(graph, tuple(range(n)), home, name)

    def is_destination(self, v: int) -> bool:
        return self.graph.nodes[v].kind is NodeKind.DESTINATION

    @property
    def num_destinations(self) -> int:
        return len(self.destinations)


# ---------------------------------------------------------------------------
# shortest paths


@dataclass(frozen=True)
class ShortestPathTree:
    source: int
    dist: tuple[float, ...]
    parent_edge: tuple[int | None, ...]
    parent_node: tuple[int | None, ...]

    def reachable(self, v: int) -> bool:
        return not math.isinf(self.dist[v])

    def path_to(self, v: int) -> list[int]:
        """Node sequence from the source to ``v`` (empty if unreachable)."""
        if not self.reachable(v):
            return []
        path = [v]
        while self.parent_node[path[-1]] is not None:
            path.append(self.parent_node[path[-1]])
        return path[::-1]


def shortest_path_tree(graph: SparseGraph, source: int, blocked: Iterable[int] = ()) -> ShortestPathTree:
    """Dijkstra from ``source``.

    Ties on distance go to the predecessor with the lowest node id, then the
    lowest edge id.  Nodes in ``blocked`` may be reached but are never
    expanded, so no returned path passes through them.  Unreachable nodes get
    ``inf`` distance and no parent.
    """
    n = graph.num_nodes
    blocked = set(blocked) - {source}
    dist = [math.inf] * n
    parent: list[int | None] = [None] * n
    parent_node = [n] * n
    done = [False] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u in blocked:
            continue
        for eid in graph.adjacency[u]:
            e = graph.edges[eid]
            w = e.other(u)
            if done[w]:
                continue
            nd = d + e.cost
            if nd < dist[w] or (nd == dist[w] and (u, eid) < (parent_node[w], parent[w])):
                if nd < dist[w]:
                    heapq.heappush(heap, (nd, w))
                dist[w] = nd
                parent[w] = eid
                parent_node[w] = u
    pnode = tuple(None if p is None else parent_node[v] for v, p in enumerate(parent))
    return ShortestPathTree(source, tuple(dist), tuple(parent), pnode)


def _count_shortest_paths(graph: SparseGraph, spt: ShortestPathTree, blocked: set[int]) -> list[int]:
    """Number of distinct shortest paths (capped at 2) from the tree's source."""
    order = sorted(range(graph.num_nodes), key=lambda v: spt.dist[v])
    count = [0] * graph.num_nodes
    count[spt.source] = 1
    for u in order:
        if not spt.reachable(u) or (u in blocked and u != spt.source):
            continue
        for eid in graph.adjacency[u]:
            e = graph.edges[eid]
            w = e.other(u)
            if e.cost > 0 and spt.dist[u] + e.cost == spt.dist[w]:
                count[w] = min(2, count[w] + count[u])
    return count


def remove_steiner(instance: Instance) -> Instance:
    """Contract Steiner nodes into direct destination-to-destination edges.

    For each destination pair an edge with the shortest-path cost is added
    when some shortest path between them has no other destination in its
    interior.  Only one edge is added per pair.
    """
    g = instance.graph
    dests = list(instance.destinations)
    dset = set(dests)
    order = sorted(dests)
    new_id = {v: i for i, v in enumerate(order)}
    edges = []
    for a, i in enumerate(order):
        full = shortest_path_tree(g, i)
        restricted = shortest_path_tree(g, i, blocked=dset)
        multi = _count_shortest_paths(g, restricted, dset - {i})
        for j in order[a + 1:]:
            if not full.reachable(j):
                raise DisconnectedDestinationsError(
                    f"no path between destinations {g.nodes[i].name} and {g.nodes[j].name}")
            if restricted.dist[j] == full.dist[j]:
                edges.append((new_id[i], new_id[j], full.dist[j]))
                if multi[j] > 1:
                    logger.info("several shortest chains join %s and %s; keeping one",
                                g.nodes[i].name, g.nodes[j].name)
    names = [g.nodes[v].name for v in order]
    graph = SparseGraph.from_edges(len(order), edges, names=names)
    return Instance(graph, tuple(new_id[v] for v in dests), new_id[instance.home], instance.name)


def subdivide_all_edges(graph: SparseGraph, times: int = 1, keep_unit: bool = False,
                        new_kind: NodeKind = NodeKind.STEINER) -> SparseGraph:
    """Replace every edge by a path of ``times + 1`` edges.

    Costs are split evenly unless ``keep_unit`` is set, in which case every
    new edge costs 1.
    """
    if times < 1:
        raise ValueError("times must be a positive integer")
    nodes = list(graph.nodes)
    edges: list[tuple[int, int, float]] = []
    for e in graph.edges:
        piece = 1.0 if keep_unit else e.cost / (times + 1)
        prev = e.u
        for k in range(times):
            nid = len(nodes)
            nodes.append(Node(nid, f"{graph.nodes[e.u].name}~{graph.nodes[e.v].name}#{e.id}.{k + 1}", new_kind))
            edges.append((prev, nid, piece))
            prev = nid
        edges.append((prev, e.v, piece))
    return SparseGraph(tuple(nodes), tuple(Edge(i, u, v, c) for i, (u, v, c) in enumerate(edges)))


def minimum_spanning_tree(graph: SparseGraph) -> list[int]:
    """Kruskal; returns edge ids.  Spans each connected component."""
    parent = list(range(graph.num_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree = []
    for e in sorted(graph.edges, key=lambda e: (e.cost, e.id)):
        ru, rv = find(e.u), find(e.v)
        if ru != rv:
            parent[ru] = rv
            tree.append(e.id)
    return tree


# ---------------------------------------------------------------------------
# parity, connectivity and Euler walks


def _components(graph: SparseGraph, edge_ids: Iterable[int]) -> list[int]:
    label = list(range(graph.num_nodes))

    def find(a):
        while label[a] != a:
            label[a] = label[label[a]]
            a = label[a]
        return a

    for eid in edge_ids:
        e = graph.edges[eid]
        ru, rv = find(e.u), find(e.v)
        if ru != rv:
            label[max(ru, rv)] = min(ru, rv)
    return [find(v) for v in range(graph.num_nodes)]


def _connects(graph: SparseGraph, nodes: Sequence[int], edge_ids: Iterable[int]) -> bool:
    comp = _components(graph, edge_ids)
    return len({comp[v] for v in nodes}) <= 1


@dataclass(frozen=True)
class EvenConnectedVerdict:
    odd_nodes: tuple[int, ...] = ()
    zero_destinations: tuple[int, ...] = ()
    components: tuple[tuple[int, ...], ...] = ()

    @property
    def ok(self) -> bool:
        return not (self.odd_nodes or self.zero_destinations or self.components)

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        parts = []
        if self.odd_nodes:
            parts.append(f"odd degree at nodes {list(self.odd_nodes)}")
        if self.zero_destinations:
            parts.append(f"unvisited destinations {list(self.zero_destinations)}")
        if self.components:
            parts.append(f"{len(self.components)} disconnected components")
        return "; ".join(parts) or "ok"


def _as_counts(instance: Instance, x) -> list[int]:
    if len(x) != instance.graph.num_edges:
        raise ValueError(f"edge vector has length {len(x)}, expected {instance.graph.num_edges}")
    counts = []
    for val in x:
        r = round(float(val))
        if r < 0 or abs(float(val) - r) > 1e-6:
            raise ValueError(f"edge vector must hold nonnegative integers, got {val!r}")
        counts.append(r)
    return counts


def check_even_connected(instance: Instance, x) -> EvenConnectedVerdict:
    """Check that ``x`` encodes a closed walk through every destination.

    Support components holding no destination count as extra components.
    """
    g = instance.graph
    counts = _as_counts(instance, x)
    deg = [0] * g.num_nodes
    for e, c in zip(g.edges, counts):
        deg[e.u] += c
        deg[e.v] += c
    odd = tuple(v for v in range(g.num_nodes) if deg[v] % 2)
    single = instance.num_destinations == 1
    zero = () if single else tuple(v for v in instance.destinations if deg[v] == 0)
    comp = _components(g, [e.id for e, c in zip(g.edges, counts) if c > 0])
    groups: dict[int, list[int]] = {}
    for v in instance.destinations:
        groups.setdefault(comp[v], []).append(v)
    # positive edges away from every destination cannot be part of the walk
    stray: dict[int, list[int]] = {}
    for v in range(g.num_nodes):
        if deg[v] > 0 and comp[v] not in groups:
            stray.setdefault(comp[v], []).append(v)
    components = ()
    if len(groups) + len(stray) > 1:
        components = tuple(sorted(tuple(vs) for vs in groups.values())) + \
            tuple(sorted(tuple(vs) for vs in stray.values()))
    return EvenConnectedVerdict(odd, zero, components)


def euler_walk_edges(instance: Instance, x) -> list[int]:
    """Edge ids of a closed walk from ``home`` using edge ``e`` exactly ``x[e]`` times.

    Iterative Hierholzer on the multigraph where edge ``e`` is copied
    ``x[e]`` times.
    """
    verdict = check_even_connected(instance, x)
    if not verdict.ok:
        raise WalkPreconditionError(f"cannot build a closed walk: {verdict.describe()}", verdict)
    g = instance.graph
    remaining = _as_counts(instance, x)
    ptr = [0] * g.num_nodes
    stack: list[tuple[int, int | None]] = [(instance.home, None)]
    trail = []
    while stack:
        u, via = stack[-1]
        adj = g.adjacency[u]
        while ptr[u] < len(adj) and remaining[adj[ptr[u]]] == 0:
            ptr[u] += 1
        if ptr[u] == len(adj):
            stack.pop()
            if via is not None:
                trail.append(via)
        else:
            eid = adj[ptr[u]]
            remaining[eid] -= 1
            stack.append((g.edges[eid].other(u), eid))
    if any(remaining):
        stray = sorted(e for e, r in enumerate(remaining) if r)
        raise WalkPreconditionError(f"edges {stray} carry x > 0 but are not reachable from home", verdict)
    return trail[::-1]


def euler_walk(instance: Instance, x) -> list[int]:
    """Closed walk from ``home`` as a node sequence; see :func:`euler_walk_edges`."""
    edges = euler_walk_edges(instance, x)
    walk = [instance.home]
    for eid in edges:
        walk.append(instance.graph.edges[eid].other(walk[-1]))
    return walk
