import csv
import io

import pytest

from gtsp.formulation import BuildOptions, SubtourMode
from gtsp.instances import instance_from_edges, serialize_graph, serialize_instance_spec
from gtsp.instances import InstanceSpec
from gtsp.report import (
    CSV_HEADER,
    GapReport,
    RunConfig,
    SolveMode,
    closure,
    emit_scatter_data,
    fill_gaps,
    format_table,
    run,
)

from oracles import brute_force_gtsp, random_instance


@pytest.mark.parametrize("L, cfn, yz, ip, closed, zpct", [
    (3, 9.0, 10.0, 10.0, 100.0, None),
    (4, 12.0, 13.0, 14.0, 50.0, 33.33),
])
def test_path_reports(L, cfn, yz, ip, closed, zpct):
    rep = run(RunConfig(generator=("paths", 3, L, 1)))
    assert (rep.lp_cfn, rep.lp_yz, rep.ip) == pytest.approx((cfn, yz, ip))
    assert rep.closure_pct == pytest.approx(closed)
    assert rep.gap_abs == pytest.approx(ip - cfn)
    assert rep.gap_pct == pytest.approx(100 * (ip - cfn) / ip)
    if zpct is not None:
        assert rep.z_edge_pct == pytest.approx(zpct, abs=0.01)


def test_tree_rows_close_more_of_the_gap():
    rep = run(RunConfig(generator=("paths", 3, 7, 1), options=BuildOptions(include_halfz=True, include_tree=True),
                        mode=SolveMode.BOTH))
    assert (rep.lp_cfn, rep.lp_yz, rep.ip) == pytest.approx((21.0, 24.0, 26.0))
    assert rep.closure_pct == pytest.approx(60.0)


def test_zero_baseline_gap_leaves_closure_blank():
    rep = run(RunConfig(generator=("cubic", "k4", 1)))
    assert rep.lp_cfn == pytest.approx(rep.ip) == pytest.approx(12.0)
    assert rep.closure_pct is None
    assert rep.csv_row()[CSV_HEADER.index("closure_pct")] == ""


def test_closure_formula():
    assert closure(2.0, 1.0) == 50.0
    assert closure(2.0, 0.0) == 100.0
    assert closure(0.0, 0.0) is None


def test_relax_only_has_no_gap():
    rep = run(RunConfig(generator=("paths", 3, 4, 1), mode=SolveMode.RELAX))
    assert rep.ip is None and rep.gap_abs is None and rep.closure_pct is None
    assert rep.lp_yz == pytest.approx(13.0)


def test_ip_only_has_no_closure():
    rep = run(RunConfig(generator=("paths", 3, 4, 1), mode=SolveMode.IP))
    assert rep.ip == 14.0 and rep.lp_cfn is None and rep.closure_pct is None


def test_fill_gaps_falls_back_to_yz():
    rep = fill_gaps(GapReport("x", 3, 0, 3, 3, lp_yz=8.0, ip=10.0))
    assert rep.gap_abs == 2.0 and rep.gap_pct == 20.0 and rep.closure_pct is None


def test_config_needs_exactly_one_source():
    with pytest.raises(ValueError):
        RunConfig()
    with pytest.raises(ValueError):
        RunConfig(generator=("paths", 3, 3, 1), instance=random_instance(0))
    with pytest.raises(ValueError):
        RunConfig(graph_path="a.graph")


def test_file_source(tmp_path):
    inst = random_instance(5)
    names = [n.name for n in inst.graph.nodes]
    (tmp_path / "g.graph").write_text(serialize_graph(inst.graph))
    spec = InstanceSpec("five", tuple(names[v] for v in inst.destinations), names[inst.home])
    (tmp_path / "g.inst").write_text(serialize_instance_spec(spec))
    rep = run(RunConfig(graph_path=str(tmp_path / "g.graph"), instance_path=str(tmp_path / "g.inst")))
    assert rep.name == "five" and rep.ip == brute_force_gtsp(inst)[0]


@pytest.mark.parametrize("seed", range(12))
def test_bounds_are_ordered(seed):
    inst = random_instance(seed, unit=False)
    rep = run(RunConfig(instance=inst))
    assert rep.lp_cfn <= rep.lp_yz + 1e-6 <= rep.ip + 2e-6
    assert rep.ip == pytest.approx(brute_force_gtsp(inst)[0])


def test_remove_steiner_flag():
    # a chain of two Steiner nodes between the destinations contracts to one edge
    edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 4, 2), (4, 3, 2)]
    inst = instance_from_edges(5, edges, destinations=[0, 3, 4], home=0)
    kept = run(RunConfig(instance=inst))
    dropped = run(RunConfig(instance=inst, remove_steiner=True))
    assert kept.steiner == 2 and dropped.steiner == 0
    assert kept.edges == 5 and kept.edges_without_steiner == 3 == dropped.edges
    assert kept.ip == dropped.ip == pytest.approx(brute_force_gtsp(inst)[0])


def test_scatter_csv():
    assert emit_scatter_data([]) == ",".join(CSV_HEADER) + "\n"
    reps = [run(RunConfig(generator=("paths", 3, L, 1))) for L in (3, 4)]
    text = emit_scatter_data(reps)
    assert text == emit_scatter_data(reps)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(CSV_HEADER)
    assert rows[1][:6] == ["paths3x3", "8", "0", "9.00", "10.00", "10.00"]
    assert rows[2][CSV_HEADER.index("closure_pct")] == "50.00"


def test_table_layout():
    text = format_table([run(RunConfig(generator=("paths", 3, 4, 1), mode=SolveMode.RELAX))])
    head, row = text.splitlines()
    assert head.split()[0] == "instance" and row.split()[0] == "paths3x4"
    assert row.split()[-2] == "-"


def test_cuts_subtour_mode_gives_same_report():
    a = run(RunConfig(generator=("paths", 3, 4, 1)))
    b = run(RunConfig(generator=("paths", 3, 4, 1),
                      options=BuildOptions(include_halfz=True, subtour_mode=SubtourMode.CUTS)))
    assert (a.lp_cfn, a.lp_yz, a.ip) == pytest.approx((b.lp_cfn, b.lp_yz, b.ip))
