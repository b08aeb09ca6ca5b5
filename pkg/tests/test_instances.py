import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gtsp.errors import (
    DanglingEndpointError,
    DuplicateNameError,
    GraphFormatError,
    NotCubicError,
    UnknownCityError,
)
from gtsp.graph import NodeKind, SparseGraph
from gtsp.instances import (
    InstanceSpec,
    build_instance,
    cubic_base,
    gen_path_config,
    gen_subdivided_cubic,
    half_doubled_tours,
    hamilton_cycle,
    parse_graph,
    parse_instance_spec,
    serialize_graph,
    serialize_instance_spec,
)

from oracles import random_instance


def test_parse_minimal_file():
    g = parse_graph("nodes 2 edges 1\nnode 0 a\nnode 1 b\nedge a b 5\n")
    assert g.num_nodes == 2 and g.num_edges == 1
    assert g.edges[0].cost == 5
    assert all(n.kind is NodeKind.DESTINATION for n in g.nodes)


def test_parse_comments_and_blank_lines():
    text = "# network\nnodes 2 edges 1\n\nnode 0 a\n# b next\nnode 1 b\nedge a b 7\n"
    assert parse_graph(text).edges[0].cost == 7


def test_parse_dangling_endpoint_reports_line():
    text = "nodes 2 edges 1\nnode 0 a\nnode 1 b\nedge a c 5\n"
    with pytest.raises(DanglingEndpointError) as err:
        parse_graph(text)
    assert err.value.line == 4
    assert str(err.value).startswith("line 4:")


@pytest.mark.parametrize("text, exc, line", [
    ("nodes 2 edges 0\nnode 0 a\nnode 1 a\n", DuplicateNameError, 3),
    ("nodes 2 edges 0\nnode 0 a\nnode 0 b\n", DuplicateNameError, 3),
    ("nodes 1 edges 0\nnode 0 a\nnode 1 b\n", GraphFormatError, 1),
    ("nodes 2 edges 1\nnode 0 a\nnode 1 b\nedge a b 0\n", GraphFormatError, 4),
    ("nodes 2 edges 1\nnode 0 a\nnode 1 b\nedge a b x\n", GraphFormatError, 4),
    ("nodes 2 edges 1\nnode 0 a\nnode 1 b\nedge a a 3\n", GraphFormatError, 4),
    ("graph 2\n", GraphFormatError, 1),
    ("nodes 1 edges 0\nvertex 0 a\n", GraphFormatError, 2),
    ("", GraphFormatError, 1),
])
def test_parse_errors(text, exc, line):
    with pytest.raises(exc) as err:
        parse_graph(text)
    assert err.value.line == line


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000))
def test_serialize_parse_roundtrip(seed):
    g = random_instance(seed, unit=False).graph
    back = parse_graph(serialize_graph(g))
    key = lambda gr: sorted((gr.nodes[e.u].name, gr.nodes[e.v].name, e.cost) for e in gr.edges)
    assert [n.name for n in back.nodes] == [n.name for n in g.nodes]
    assert key(back) == key(g)


def test_fractional_cost_roundtrip():
    g = SparseGraph.from_edges(2, [(0, 1, 0.1)])
    assert parse_graph(serialize_graph(g)).edges[0].cost == 0.1


def test_instance_spec_roundtrip_and_default_home():
    spec = parse_instance_spec("instance demo\ndest a\ndest b\n")
    assert spec.home_name == "b"
    spec = parse_instance_spec("instance demo home a\ndest a\ndest b\n")
    assert spec.home_name == "a"
    assert parse_instance_spec(serialize_instance_spec(spec)) == spec
    with pytest.raises(GraphFormatError):
        parse_instance_spec("instance demo\n")
    with pytest.raises(DuplicateNameError):
        parse_instance_spec("instance demo\ndest a\ndest a\n")


def line_graph():
    return parse_graph("nodes 3 edges 2\nnode 0 a\nnode 1 b\nnode 2 c\nedge a b 1\nedge b c 2\n")


def test_build_instance_all_cities():
    g = line_graph()
    inst = build_instance(g, InstanceSpec("all", ("a", "b", "c")))
    assert inst.steiners == () and inst.graph.num_edges == 2
    assert inst.home == 2


def test_build_instance_steiner_on_path():
    inst = build_instance(line_graph(), InstanceSpec("ac", ("a", "c")))
    assert [inst.graph.nodes[v].name for v in inst.steiners] == ["b"]
    assert inst.num_destinations == 2


def test_build_instance_drops_off_path_nodes():
    g = parse_graph("nodes 4 edges 3\nnode 0 a\nnode 1 b\nnode 2 c\nnode 3 d\n"
                    "edge a b 1\nedge b c 1\nedge b d 1\n")
    inst = build_instance(g, InstanceSpec("ac", ("a", "c")))
    assert sorted(n.name for n in inst.graph.nodes) == ["a", "b", "c"]


def test_build_instance_three_path_toy():
    g = parse_graph(serialize_graph(gen_path_config(3, 4, 1).graph))
    inst = build_instance(g, InstanceSpec("dakota3path", tuple(n.name for n in g.nodes)))
    assert (inst.graph.num_nodes, inst.graph.num_edges, len(inst.steiners)) == (11, 12, 0)


def test_build_instance_unknown_city():
    with pytest.raises(UnknownCityError):
        build_instance(line_graph(), InstanceSpec("x", ("a", "z")))
    with pytest.raises(UnknownCityError):
        build_instance(line_graph(), InstanceSpec("x", ("a", "b"), home="c"))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_build_instance_invariants(seed):
    g = random_instance(seed).graph
    names = [n.name for n in g.nodes]
    k = 1 + seed % len(names)
    spec = InstanceSpec("r", tuple(names[:k]))
    inst = build_instance(g, spec)
    assert inst.num_destinations == k
    assert set(inst.destinations) | set(inst.steiners) == set(range(inst.graph.num_nodes))


@pytest.mark.parametrize("p, L, nodes, edges", [(3, 4, 11, 12), (3, 7, 20, 21), (3, 3, 8, 9)])
def test_gen_path_config_examples(p, L, nodes, edges):
    inst = gen_path_config(p, L, 1)
    assert (inst.graph.num_nodes, inst.graph.num_edges) == (nodes, edges)
    assert inst.home == 0 and inst.steiners == ()


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 7), st.integers(1, 9))
def test_gen_path_config_counts(p, L):
    inst = gen_path_config(p, L, 2)
    assert inst.graph.num_nodes == p * (L - 1) + 2
    assert inst.graph.num_edges == p * L
    assert all(e.cost == 2 for e in inst.graph.edges)


def test_gen_path_config_rejects_bad_args():
    with pytest.raises(ValueError):
        gen_path_config(2, 3)
    with pytest.raises(ValueError):
        gen_path_config(3, 0)


@pytest.mark.parametrize("base, times, nodes, edges", [
    ("k4", 1, 10, 12), ("petersen", 1, 25, 30), ("k4", 2, 16, 18)])
def test_gen_subdivided_cubic(base, times, nodes, edges):
    inst = gen_subdivided_cubic(base, times)
    assert (inst.graph.num_nodes, inst.graph.num_edges) == (nodes, edges)
    assert all(e.cost == 1 for e in inst.graph.edges)
    assert inst.steiners == ()


def test_gen_subdivided_cubic_rejects_non_cubic():
    with pytest.raises(NotCubicError):
        gen_subdivided_cubic([(0, 1), (1, 2), (2, 0)])
    with pytest.raises(NotCubicError):
        cubic_base("cube")


def test_custom_cubic_edge_list():
    # triangular prism
    prism = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]
    inst = gen_subdivided_cubic(prism, 1)
    assert inst.graph.num_edges == 18


def test_hamilton_cycle_search():
    assert hamilton_cycle(cubic_base("k4")) is not None
    assert hamilton_cycle(cubic_base("petersen")) is None


def test_half_doubled_tours_average_to_ones():
    base = cubic_base("k4")
    a, b = half_doubled_tours(base, hamilton_cycle(base))
    assert [(x + y) / 2 for x, y in zip(a, b)] == [1.0] * 12
