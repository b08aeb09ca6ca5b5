"""Bounded-variable primal simplex.

Every model row ``lo <= a.x <= hi`` gets a logical column ``r = a.x`` so the
working system is ``A x - r = 0`` with bounds on both ``x`` and ``r``.  The
all-logical basis ``-I`` is always available, and any basis (for example the
optimal one of a parent problem) can seed a solve: basic variables outside
their bounds are driven back by a composite phase 1 that minimises the sum
of infeasibilities before the true objective is priced.

Pricing is Dantzig's rule, switching to Bland's rule after a streak of
degenerate pivots.  The basis is kept as a sparse LU factorisation with a
product-form eta file between refactorisations.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .model import LinModel, Row, Sense

BASIC, AT_LOWER, AT_UPPER, AT_ZERO = 0, 1, 2, 3


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpLimits:
    max_iterations: int = 200_000
    time_limit: float | None = None
    tol_feas: float = 1e-7
    tol_opt: float = 1e-9
    tol_pivot: float = 1e-9
    bland_after: int = 50
    refactor_every: int = 100


@dataclass(frozen=True)
class Basis:
    """Structural statuses by column position, logical statuses by row name.

    Rows missing from ``rows`` have a basic logical, so a basis carries over
    to a model with extra rows appended.
    """

    structural: tuple[int, ...]
    rows: dict = field(default_factory=dict)


@dataclass
class LpSolution:
    status: LpStatus
    objective: float
    primal: np.ndarray
    duals: np.ndarray
    reduced_costs: np.ndarray
    row_activity: np.ndarray
    basis: Basis | None
    iterations: int
    row_names: tuple[str, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def dual_objective(self, lower, upper, row_lo, row_hi, tol: float = 1e-12) -> float:
        """Lagrangian dual value implied by the reduced costs and row duals.

        Multipliers below ``tol`` in magnitude are roundoff and are skipped so
        they never pair with an infinite bound.
        """
        total = 0.0
        for j, dj in enumerate(self.reduced_costs):
            if abs(dj) > tol:
                total += dj * (lower[j] if dj > 0 else upper[j])
        for i, yi in enumerate(self.duals):
            if abs(yi) > tol:
                total += yi * (row_lo[i] if yi > 0 else row_hi[i])
        return total


class StandardForm:
    """Column-major matrix, bounds and objective for a model plus extra rows."""

    def __init__(self, model: LinModel, extra_rows: Sequence[Row] = (), lower=None, upper=None):
        rows = tuple(model.rows) + tuple(extra_rows)
        self.row_names = tuple(r.name for r in rows)
        n, m = model.num_columns, len(rows)
        self.n, self.m = n, m
        idx = model.index
        ri, ci, vals = [], [], []
        self.row_lo = np.full(m, -np.inf)
        self.row_hi = np.full(m, np.inf)
        for i, row in enumerate(rows):
            for ref, c in row.coefs:
                ri.append(i)
                ci.append(idx[ref])
                vals.append(c)
            if row.sense is not Sense.LE:
                self.row_lo[i] = row.rhs
            if row.sense is not Sense.GE:
                self.row_hi[i] = row.rhs
        self.A = sp.csc_matrix((vals, (ri, ci)), shape=(m, n), dtype=float)
        self.AT = self.A.T.tocsr()
        self.c = np.array([col.obj for col in model.columns], dtype=float)
        self.lower = np.array([col.lower for col in model.columns], dtype=float)
        self.upper = np.array([col.upper for col in model.columns], dtype=float)
        if lower is not None:
            self.lower = np.asarray(lower, dtype=float).copy()
        if upper is not None:
            self.upper = np.asarray(upper, dtype=float).copy()


class _Factor:
    def __init__(self, bmat):
        self.lu = splu(bmat.tocsc(), permc_spec="COLAMD")
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, a):
        x = self.lu.solve(a)
        for r, w in self.etas:
            xr = x[r] / w[r]
            x -= w * xr
            x[r] = xr
        return x

    def btran(self, c):
        v = c.astype(float).copy()
        for r, w in reversed(self.etas):
            v[r] = (v[r] - (v @ w - v[r] * w[r])) / w[r]
        return self.lu.solve(v, trans="T")


class _Simplex:
    def __init__(self, sf: StandardForm, limits: LpLimits, status=None):
        self.sf = sf
        self.lim = limits
        n, m = sf.n, sf.m
        self.N = n + m
        self.lo = np.concatenate([sf.lower, sf.row_lo])
        self.hi = np.concatenate([sf.upper, sf.row_hi])
        self.cost = np.concatenate([sf.c, np.zeros(m)])
        if status is None:
            status = np.full(self.N, AT_LOWER, dtype=np.int8)
            status[n:] = BASIC
        self.status = np.asarray(status, dtype=np.int8).copy()
        self.x = np.zeros(self.N)
        for j in range(self.N):
            if self.status[j] != BASIC:
                self._place_nonbasic(j, self.status[j])
        self.head = np.flatnonzero(self.status == BASIC)
        if len(self.head) != m:
            raise ValueError("basis size mismatch")
        self.iterations = 0

    def _place_nonbasic(self, j, want):
        lo, hi = self.lo[j], self.hi[j]
        if want == AT_UPPER and np.isfinite(hi):
            st, val = AT_UPPER, hi
        elif np.isfinite(lo):
            st, val = AT_LOWER, lo
        elif np.isfinite(hi):
            st, val = AT_UPPER, hi
        else:
            st, val = AT_ZERO, 0.0
        self.status[j] = st
        self.x[j] = val

    def column(self, j):
        m = self.sf.m
        a = np.zeros(m)
        if j < self.sf.n:
            A = self.sf.A
            s, e = A.indptr[j], A.indptr[j + 1]
            a[A.indices[s:e]] = A.data[s:e]
        else:
            a[j - self.sf.n] = -1.0
        return a

    def refactor(self):
        n, m = self.sf.n, self.sf.m
        blocks_r, blocks_c, blocks_v = [], [], []
        A = self.sf.A
        for pos, j in enumerate(self.head):
            if j < n:
                s, e = A.indptr[j], A.indptr[j + 1]
                blocks_r.append(A.indices[s:e])
                blocks_c.append(np.full(e - s, pos))
                blocks_v.append(A.data[s:e])
            else:
                blocks_r.append(np.array([j - n]))
                blocks_c.append(np.array([pos]))
                blocks_v.append(np.array([-1.0]))
        B = sp.csc_matrix((np.concatenate(blocks_v), (np.concatenate(blocks_r), np.concatenate(blocks_c))),
                          shape=(m, m))
        self.factor = _Factor(B)
        self._recompute_basics()

    def _recompute_basics(self):
        n = self.sf.n
        xn = self.x.copy()
        xn[self.head] = 0.0
        rhs = -(self.sf.A @ xn[:n] - xn[n:])
        self.x[self.head] = self.factor.ftran(rhs)

    def reduced_costs(self, cvec, y):
        d = cvec - np.concatenate([self.sf.AT @ y, -y])
        d[self.head] = 0.0
        return d

    def run(self):
        lim = self.lim
        tol = lim.tol_feas
        start = time.monotonic()
        self.refactor()
        streak = 0
        rejected: set[int] = set()
        nonbasic_fixed = self.lo == self.hi
        while True:
            if self.iterations >= lim.max_iterations:
                return LpStatus.ITERATION_LIMIT
            if lim.time_limit is not None and time.monotonic() - start > lim.time_limit:
                return LpStatus.ITERATION_LIMIT
            head = self.head
            xb = self.x[head]
            lb, ub = self.lo[head], self.hi[head]
            below = xb < lb - tol
            above = xb > ub + tol
            phase1 = bool(below.any() or above.any())
            if phase1:
                cb = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                cvec = np.zeros(self.N)
            else:
                cb = self.cost[head]
                cvec = self.cost
            y = self.factor.btran(cb)
            d = self.reduced_costs(cvec, y)
            self.y, self.d = y, d
            st = self.status
            elig = (((st == AT_LOWER) & (d < -lim.tol_opt)) | ((st == AT_UPPER) & (d > lim.tol_opt))
                    | ((st == AT_ZERO) & (np.abs(d) > lim.tol_opt))) & ~nonbasic_fixed
            if rejected:
                elig[list(rejected)] = False
            cand = np.flatnonzero(elig)
            if len(cand) == 0:
                return LpStatus.INFEASIBLE if phase1 else LpStatus.OPTIMAL
            bland = streak >= lim.bland_after
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            sigma = 1.0 if d[q] < 0 else -1.0
            w = self.factor.ftran(self.column(q))
            rho = -sigma * w

            ok = np.abs(w) > lim.tol_pivot
            up = ok & (rho > 0) & ~above
            dn = ok & (rho < 0) & ~below
            target = np.full(len(head), np.nan)
            target[up] = np.where(below[up], lb[up], ub[up])
            target[dn] = np.where(above[dn], ub[dn], lb[dn])
            limited = np.flatnonzero(np.isfinite(target))
            flip = self.hi[q] - self.lo[q]
            r = -1
            theta = math.inf
            if len(limited):
                t = target[limited]
                rr = rho[limited]
                xl = xb[limited]
                relaxed = (t + np.sign(rr) * tol - xl) / rr
                tmax = relaxed.min()
                exact = (t - xl) / rr
                pool = np.flatnonzero(exact <= tmax)
                if bland:
                    pick = pool[np.argmin(head[limited[pool]])]
                else:
                    pick = pool[np.argmax(np.abs(w[limited[pool]]))]
                r = int(limited[pick])
                theta = max(float(exact[pick]), 0.0)
            if flip <= theta:
                theta = flip
                r = -1
            if math.isinf(theta):
                if phase1:
                    rejected.add(q)
                    continue
                return LpStatus.UNBOUNDED
            self.iterations += 1
            self.x[q] += sigma * theta
            self.x[head] += rho * theta
            if r < 0:
                st[q] = AT_UPPER if sigma > 0 else AT_LOWER
                self.x[q] = self.hi[q] if sigma > 0 else self.lo[q]
            else:
                p = head[r]
                if rho[r] > 0:
                    bound, bst = (lb[r], AT_LOWER) if below[r] else (ub[r], AT_UPPER)
                else:
                    bound, bst = (ub[r], AT_UPPER) if above[r] else (lb[r], AT_LOWER)
                self.x[p] = bound
                st[p] = bst
                st[q] = BASIC
                head[r] = q
                self.factor.etas.append((r, w))
                if len(self.factor.etas) >= lim.refactor_every:
                    self.refactor()
            rejected.clear()
            streak = streak + 1 if theta <= 1e-12 else 0


def _initial_status(sf: StandardForm, basis: Basis | None):
    if basis is None or len(basis.structural) != sf.n:
        return None
    status = np.empty(sf.n + sf.m, dtype=np.int8)
    status[:sf.n] = basis.structural
    for i, name in enumerate(sf.row_names):
        status[sf.n + i] = basis.rows.get(name, BASIC)
    if int((status == BASIC).sum()) != sf.m:
        return None
    return status


def _solve_empty(sf: StandardForm, limits: LpLimits) -> LpSolution:
    x = np.where(sf.c >= 0, sf.lower, sf.upper)
    x = np.where(np.isinf(x) & (sf.c == 0), 0.0, x)
    if np.isinf(x).any():
        status = LpStatus.UNBOUNDED
        obj = -math.inf
    else:
        status = LpStatus.OPTIMAL
        obj = float(sf.c @ x)
    basis = Basis(tuple(AT_UPPER if c < 0 else AT_LOWER for c in sf.c), {})
    return LpSolution(status, obj, x, np.zeros(0), sf.c.copy(), np.zeros(0), basis, 0, ())


def solve_standard(sf: StandardForm, limits: LpLimits | None = None, basis: Basis | None = None) -> LpSolution:
    limits = limits or LpLimits()
    if np.any(sf.lower > sf.upper):
        return _failed(sf, LpStatus.INFEASIBLE, 0)
    if sf.m == 0:
        return _solve_empty(sf, limits)
    status = _initial_status(sf, basis)
    try:
        solver = _Simplex(sf, limits, status)
        outcome = solver.run()
    except RuntimeError:
        if status is None:
            raise
        solver = _Simplex(sf, limits, None)
        outcome = solver.run()
    if outcome is not LpStatus.OPTIMAL:
        return _failed(sf, outcome, solver.iterations)
    if solver.factor.etas:
        solver.refactor()
    n = sf.n
    x = solver.x[:n].copy()
    rows = {sf.row_names[i]: int(solver.status[n + i])
            for i in range(sf.m) if solver.status[n + i] != BASIC}
    basis = Basis(tuple(int(s) for s in solver.status[:n]), rows)
    return LpSolution(LpStatus.OPTIMAL, float(sf.c @ x), x, solver.y.copy(), solver.d[:n].copy(),
                      solver.x[n:].copy(), basis, solver.iterations, sf.row_names)


def _failed(sf, status, iterations):
    nan = np.full(sf.n, np.nan)
    return LpSolution(status, math.nan, nan, np.full(sf.m, np.nan), nan.copy(), np.full(sf.m, np.nan),
                      None, iterations, sf.row_names)


def solve_lp(model: LinModel, limits: LpLimits | None = None, *, lower=None, upper=None,
             extra_rows: Sequence[Row] = (), basis: Basis | None = None) -> LpSolution:
    """Solve the LP relaxation of ``model`` (integrality flags are ignored).

    ``lower``/``upper`` override column bounds, ``extra_rows`` are appended
    after the model rows and ``basis`` seeds the starting basis.
    """
    return solve_standard(StandardForm(model, extra_rows, lower, upper), limits, basis)


def resolve_with_rows(model: LinModel, previous: LpSolution, rows: Sequence[Row],
                      limits: LpLimits | None = None) -> LpSolution:
    """Solve ``model`` extended by ``rows``, warm-started from ``previous``."""
    return solve_lp(model.with_rows(rows), limits, basis=previous.basis)
