import io

import pytest

from gtsp.formulation import BuildOptions, build_cfn, build_yz
from gtsp.instances import gen_path_config, instance_from_edges
from gtsp.lpformat import export_lp, to_lp_string
from gtsp.model import Column, LinModel, Row, Sense, VarKind, X
from gtsp.simplex import solve_lp

from oracles import read_lp, solve_lp_text


def test_empty_model():
    text = to_lp_string(LinModel((), ()))
    assert text.splitlines()[1:] == ["Minimize", " obj:", "Subject To", "End"]
    assert solve_lp_text(text) == 0.0


def test_one_variable_model():
    m = LinModel((Column(X(0), 0.0, float("inf"), 1.0),), (Row.build("low", [(X(0), 1.0)], Sense.GE, 2),))
    text = to_lp_string(m)
    assert " low: + 1 x_0 >= 2" in text
    assert "Bounds" not in text
    assert solve_lp_text(text) == pytest.approx(2.0)


def test_sections_and_unique_row_names():
    m = build_yz(gen_path_config(3, 3, 1), BuildOptions(include_halfz=True)).with_integrality([VarKind.Y])
    text = to_lp_string(m)
    names, obj, rows, bounds, integers = read_lp(text)
    assert len(rows) == m.num_rows
    assert len({r[0] for r in rows}) == len(rows)
    assert sorted(integers) == sorted(c.ref.name for c in m.columns if c.integer)
    assert set(integers.values()) == {"binary"}
    order = [text.index(s) for s in ("Minimize", "Subject To", "Bounds", "Binary", "End")]
    assert order == sorted(order)


def test_general_integer_section():
    m = build_cfn(gen_path_config(3, 3, 1)).with_integrality([VarKind.X])
    names, obj, rows, bounds, integers = read_lp(to_lp_string(m))
    assert set(integers.values()) == {"general"}


def test_seventeen_digit_numbers():
    inst = instance_from_edges(3, [(0, 1, 0.1), (1, 2, 1 / 3), (0, 2, 2 ** 0.5)], home=0)
    names, obj, *_ = read_lp(to_lp_string(build_cfn(inst)))
    assert [obj[f"x_{e}"] for e in range(3)] == [0.1, 1 / 3, 2 ** 0.5]


def test_long_rows_wrap_and_parse():
    inst = gen_path_config(4, 3, 1)
    m = build_cfn(inst)
    text = to_lp_string(m)
    assert max(len(line) for line in text.splitlines()) < 255
    assert solve_lp_text(text) == pytest.approx(solve_lp(m).objective, abs=1e-9)


def test_export_to_sink():
    buf = io.StringIO()
    export_lp(build_cfn(gen_path_config(3, 3, 1)), buf)
    assert buf.getvalue().rstrip().endswith("End")


def test_external_solver_paths3x4_relaxation():
    m = build_yz(gen_path_config(3, 4, 1), BuildOptions(include_halfz=True))
    assert solve_lp_text(to_lp_string(m)) == pytest.approx(13.0, abs=1e-7)


def test_external_mip_with_tree_rows():
    # with the tree system the exported y/z MIP is exact
    m = build_yz(gen_path_config(3, 4, 1), BuildOptions(include_halfz=True, include_tree=True))
    text = to_lp_string(m.with_integrality([VarKind.Y]))
    assert solve_lp_text(text, integral=True) == pytest.approx(14.0, abs=1e-6)
