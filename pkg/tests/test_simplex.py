import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from gtsp.formulation import BuildOptions, build_cfn, build_yz, make_parity_row
from gtsp.instances import gen_path_config
from gtsp.model import Column, LinModel, Row, Sense, X, Y
from gtsp.simplex import LpLimits, LpStatus, StandardForm, resolve_with_rows, solve_lp

from oracles import random_instance, vertex_enumeration

SENSES = {"<=": Sense.LE, ">=": Sense.GE, "=": Sense.EQ}


def dense_model(c, A, senses, b, lower, upper):
    cols = tuple(Column(X(j), lo, hi, cj) for j, (cj, lo, hi) in enumerate(zip(c, lower, upper)))
    rows = tuple(Row.build(f"r{i}", [(X(j), a) for j, a in enumerate(ai)], SENSES[s], bi)
                 for i, (ai, s, bi) in enumerate(zip(A, senses, b)))
    return LinModel(cols, rows)


def random_lp(rng, n, m):
    c = rng.integers(-5, 6, n).astype(float)
    A = rng.integers(-3, 4, (m, n)).astype(float)
    senses = [rng.choice(["<=", ">=", "="], p=[0.45, 0.45, 0.1]) for _ in range(m)]
    x0 = rng.uniform(0, 2, n)
    b = A @ x0 + np.where(np.array(senses) == "<=", 1.0, np.where(np.array(senses) == ">=", -1.0, 0.0))
    return c, A, senses, np.round(b, 3), np.zeros(n), np.full(n, 3.0)


def linprog_value(c, A, senses, b, lower, upper):
    ub = [(a, bi) for a, s, bi in zip(A, senses, b) if s == "<="] + \
         [(-a, -bi) for a, s, bi in zip(A, senses, b) if s == ">="]
    eq = [(a, bi) for a, s, bi in zip(A, senses, b) if s == "="]
    res = linprog(c, A_ub=np.array([u[0] for u in ub]) if ub else None, b_ub=[u[1] for u in ub] or None,
                  A_eq=np.array([e[0] for e in eq]) if eq else None, b_eq=[e[1] for e in eq] or None,
                  bounds=list(zip(lower, upper)), method="highs")
    return res


# --- examples -----------------------------------------------------------------


def test_single_variable_lower_row():
    m = dense_model([1.0], [[1.0]], [">="], [2.0], [0.0], [math.inf])
    sol = solve_lp(m)
    assert sol.optimal and sol.objective == 2.0 and sol.primal[0] == 2.0


def test_empty_rows_use_bounds():
    m = LinModel((Column(X(0), -1.0, 4.0, 2.0), Column(X(1), 0.0, 3.0, -1.0)), ())
    sol = solve_lp(m)
    assert sol.objective == -5.0
    assert list(sol.primal) == [-1.0, 3.0]


def test_infeasible():
    m = dense_model([1.0, 1.0], [[1.0, 1.0]], [">="], [5.0], [0, 0], [2, 2])
    assert solve_lp(m).status is LpStatus.INFEASIBLE


def test_crossed_bounds_are_infeasible():
    m = dense_model([1.0], [[1.0]], [">="], [0.0], [0.0], [1.0])
    assert solve_lp(m, lower=[2.0], upper=[1.0]).status is LpStatus.INFEASIBLE


def test_unbounded():
    m = dense_model([-1.0, 0.0], [[1.0, -1.0]], ["<="], [1.0], [0, 0], [math.inf, math.inf])
    assert solve_lp(m).status is LpStatus.UNBOUNDED


def test_iteration_limit():
    m = build_cfn(gen_path_config(3, 5, 1))
    sol = solve_lp(m, LpLimits(max_iterations=3))
    assert sol.status is LpStatus.ITERATION_LIMIT and math.isnan(sol.objective)


def test_path_configuration_relaxations():
    inst = gen_path_config(3, 4, 1)
    assert solve_lp(build_cfn(inst)).objective == pytest.approx(12.0)
    assert solve_lp(build_yz(inst, BuildOptions(include_halfz=True))).objective == pytest.approx(13.0)


# --- against independent solvers -----------------------------------------------


@pytest.mark.parametrize("seed", range(40))
def test_matches_linprog(seed):
    rng = np.random.default_rng(seed)
    c, A, senses, b, lo, hi = random_lp(rng, int(rng.integers(2, 9)), int(rng.integers(1, 9)))
    ref = linprog_value(c, A, senses, b, lo, hi)
    sol = solve_lp(dense_model(c, A, senses, b, lo, hi))
    if ref.status == 2:
        assert sol.status is LpStatus.INFEASIBLE
    else:
        assert sol.optimal and sol.objective == pytest.approx(ref.fun, abs=1e-7)


@pytest.mark.parametrize("seed", range(20))
def test_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    c, A, senses, b, lo, hi = random_lp(rng, int(rng.integers(2, 5)), int(rng.integers(1, 5)))
    best = vertex_enumeration(c, A, senses, b, lo, hi)
    sol = solve_lp(dense_model(c, A, senses, b, lo, hi))
    if best is None:
        assert sol.status is LpStatus.INFEASIBLE
    else:
        assert sol.objective == pytest.approx(best, abs=1e-9)


@pytest.mark.parametrize("seed", range(15))
def test_gtsp_relaxations_match_linprog(seed):
    inst = random_instance(seed, unit=False)
    for m in (build_cfn(inst), build_yz(inst, BuildOptions(include_halfz=True, include_tree=True))):
        sf = StandardForm(m)
        A = sf.A.toarray()
        senses, b, rows = [], [], []
        for i in range(sf.m):
            if sf.row_lo[i] == sf.row_hi[i]:
                rows.append(A[i]), senses.append("="), b.append(sf.row_lo[i])
                continue
            if np.isfinite(sf.row_lo[i]):
                rows.append(A[i]), senses.append(">="), b.append(sf.row_lo[i])
            if np.isfinite(sf.row_hi[i]):
                rows.append(A[i]), senses.append("<="), b.append(sf.row_hi[i])
        ref = linprog_value(sf.c, rows, senses, b, sf.lower, sf.upper)
        assert solve_lp(m).objective == pytest.approx(ref.fun, abs=1e-7)


# --- duality and invariances ----------------------------------------------------


@pytest.mark.parametrize("seed", range(25))
def test_strong_duality(seed):
    rng = np.random.default_rng(2000 + seed)
    c, A, senses, b, lo, hi = random_lp(rng, 6, 5)
    m = dense_model(c, A, senses, b, lo, hi)
    sol = solve_lp(m)
    if not sol.optimal:
        return
    sf = StandardForm(m)
    dual = sol.dual_objective(sf.lower, sf.upper, sf.row_lo, sf.row_hi)
    assert dual == pytest.approx(sol.objective, abs=1e-7)
    # reduced costs agree with c - A^T y
    assert np.allclose(sol.reduced_costs, c - A.T @ sol.duals, atol=1e-8)


@pytest.mark.parametrize("seed", range(10))
def test_row_order_does_not_change_value(seed):
    rng = np.random.default_rng(3000 + seed)
    c, A, senses, b, lo, hi = random_lp(rng, 6, 6)
    perm = rng.permutation(len(b))
    one = solve_lp(dense_model(c, A, senses, b, lo, hi))
    two = solve_lp(dense_model(c, A[perm], [senses[i] for i in perm], b[perm], lo, hi))
    assert one.status is two.status
    if one.optimal:
        assert one.objective == pytest.approx(two.objective, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_adding_rows_never_lowers_value(seed):
    inst = random_instance(seed)
    m = build_cfn(inst)
    base = solve_lp(m)
    rng = np.random.default_rng(seed)
    extra = [Row.build("extra", [(X(int(e)), 1.0) for e in rng.choice(inst.graph.num_edges, 2)], Sense.GE, 2)]
    more = solve_lp(m, extra_rows=extra)
    assert more.status is LpStatus.INFEASIBLE or more.objective >= base.objective - 1e-9


# --- warm starts ----------------------------------------------------------------


def test_resolve_with_parity_row():
    inst = gen_path_config(3, 4, 1)
    m = build_yz(inst, BuildOptions())
    first = solve_lp(m)
    extra = Row.build("extra_cap", [(Y(0), 1.0)], Sense.LE, 0)
    warm = resolve_with_rows(m, first, [extra])
    cold = solve_lp(m.with_rows([extra]))
    assert warm.optimal and warm.objective == pytest.approx(cold.objective, abs=1e-9)
    assert warm.objective >= first.objective - 1e-9


def test_resolve_with_duplicate_row_name_rejected():
    m = build_yz(gen_path_config(3, 3, 1))
    first = solve_lp(m)
    with pytest.raises(ValueError):
        resolve_with_rows(m, first, [make_parity_row(m.instance.graph, 0, [m.instance.graph.adjacency[0][0]])])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 5))
def test_warm_start_equals_cold_after_bound_change(seed, which):
    inst = random_instance(seed, unit=False)
    m = build_cfn(inst)
    first = solve_lp(m)
    e = which % inst.graph.num_edges
    hi = np.array([c.upper for c in m.columns])
    hi[m.col(X(e))] = 1.0
    warm = solve_lp(m, upper=hi, basis=first.basis)
    cold = solve_lp(m, upper=hi)
    assert warm.status is cold.status
    if cold.optimal:
        assert warm.objective == pytest.approx(cold.objective, abs=1e-8)
