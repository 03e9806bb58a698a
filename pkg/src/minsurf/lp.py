"""Exact-rational linear programming.

The core is a dense two-phase primal simplex over `Fraction` entries with
Dantzig pivoting that switches to Bland's rule after a degenerate stall,
so termination is guaranteed.  Large programs are solved by column
generation around that core: a floating-point solve (scipy/HiGHS) seeds
the working column set, the restricted program is solved exactly, and an
exact pricing sweep over all columns either certifies global optimality
or grows the working set.  Every returned solution carries exact duals;
`verify_certificate` recomputes primal/dual feasibility and complementary
slackness from scratch.

Sign conventions (minimization, variables >= 0):
  reduced cost   r_j = c_j - sum_i y_i A_ij >= 0 at optimality,
  inequality duals (rows A x <= b) satisfy y_i <= 0,
  strong duality c.x = y.b holds exactly at optimality (gap 0).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .util import ResourceLimitError, as_fraction

EQ = "eq"
LE = "le"


class LinearProgram:
    """min c.x subject to equality and <= rows, x >= 0 componentwise."""

    def __init__(self):
        self.names = []
        self._index = {}
        self.costs = []
        self.rows = []  # (coeffs: dict[var_idx, Fraction], rhs, sense)

    def n_vars(self) -> int:
        return len(self.names)

    def n_rows(self) -> int:
        return len(self.rows)

    def add_variable(self, name, cost=0) -> int:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        idx = len(self.names)
        self.names.append(name)
        self._index[name] = idx
        self.costs.append(as_fraction(cost))
        return idx

    def var(self, name) -> int:
        return self._index[name]

    def _row(self, coeffs, rhs, sense):
        row = {}
        for key, val in coeffs.items():
            idx = key if isinstance(key, int) else self._index[key]
            v = as_fraction(val)
            if v:
                row[idx] = row.get(idx, Fraction(0)) + v
        self.rows.append((row, as_fraction(rhs), sense))

    def add_eq(self, coeffs, rhs):
        self._row(coeffs, rhs, EQ)

    def add_ineq(self, coeffs, rhs):
        """Row  sum coeffs . x <= rhs."""
        self._row(coeffs, rhs, LE)

    def columns(self):
        cols = [[] for _ in self.names]
        for i, (row, _, _) in enumerate(self.rows):
            for j, v in row.items():
                cols[j].append((i, v))
        return cols


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    x: dict = field(default_factory=dict)  # var index -> Fraction, sparse
    objective: Fraction | None = None
    duals: list = field(default_factory=list)  # per original row
    gap: Fraction = Fraction(0)
    budget: Fraction = Fraction(0)
    iterations: int = 0
    pricing_rounds: int = 0
    method: str = "exact"

    def value(self, p: LinearProgram, name) -> Fraction:
        return self.x.get(p.var(name), Fraction(0))


# -- dense exact simplex -------------------------------------------------------


class _Tableau:
    def __init__(self, costs, rows, iteration_limit):
        # rows: list of (dict col->Fr, rhs, sense); slack vars appended here
        self.m = len(rows)
        ncols = len(costs)
        slack_of = {}
        row_sign = [1] * self.m
        data = []
        rhs = []
        for i, (row, b, sense) in enumerate(rows):
            row = dict(row)
            if sense == LE:
                slack_of[i] = ncols
                row[ncols] = Fraction(1)
                ncols += 1
            if b < 0:
                row = {j: -v for j, v in row.items()}
                b = -b
                row_sign[i] = -1
            data.append(row)
            rhs.append(b)
        # initial basis: usable +1 slacks, then singleton +1 columns ("crash"
        # basis; the flat-norm and mass LPs carry an identity block, which
        # makes phase 1 unnecessary), artificials for whatever remains
        crash_of = {}
        col_count = {}
        col_entry = {}
        for i in range(self.m):
            for j, v in data[i].items():
                col_count[j] = col_count.get(j, 0) + 1
                col_entry[j] = (i, v)
        claimed = set()
        for i in range(self.m):
            j = slack_of.get(i)
            if j is not None and data[i].get(j) == 1:
                continue
            for j, v in data[i].items():
                if v == 1 and col_count.get(j) == 1 and j not in claimed:
                    crash_of[i] = j
                    claimed.add(j)
                    break
        self.art_of = {}
        for i in range(self.m):
            j = slack_of.get(i)
            if (j is not None and data[i].get(j) == 1) or i in crash_of:
                continue
            self.art_of[i] = ncols
            data[i][ncols] = Fraction(1)
            ncols += 1
        self.ncols = ncols
        self.nstruct = len(costs)
        self.slack_of = slack_of
        self.row_sign = row_sign
        self.iteration_limit = iteration_limit
        self.iterations = 0
        T = np.empty((self.m, ncols + 1), dtype=object)
        T[:, :] = Fraction(0)
        for i, row in enumerate(data):
            for j, v in row.items():
                T[i, j] = v
            T[i, ncols] = rhs[i]
        self.T = T
        self.basis = []
        # tracker: a column whose initial tableau column is e_i, so its
        # current column is B^{-1} e_i and duals can be read off it
        self.tracker_of = {}
        for i in range(self.m):
            if i in self.art_of:
                self.basis.append(self.art_of[i])
                self.tracker_of[i] = self.art_of[i]
            elif i in crash_of:
                self.basis.append(crash_of[i])
                self.tracker_of[i] = crash_of[i]
            else:
                self.basis.append(slack_of[i])
                self.tracker_of[i] = slack_of[i]
        self.costs = list(costs)

    def _reduced_costs(self, c):
        z = np.array(c + [Fraction(0)] * (self.ncols + 1 - len(c)), dtype=object)
        for i in range(self.m):
            cb = c[self.basis[i]] if self.basis[i] < len(c) else Fraction(0)
            if cb:
                z = z - cb * self.T[i, :]
        return z

    def _pivot(self, r, j):
        T = self.T
        piv = T[r, j]
        if piv != 1:
            T[r, :] = T[r, :] / piv
        col = T[:, j]
        for i in range(self.m):
            if i != r and col[i] != 0:
                T[i, :] = T[i, :] - col[i] * T[r, :]
        if self.z[j] != 0:
            self.z = self.z - self.z[j] * T[r, :]
        self.basis[r] = j

    def _ratio_row(self, j):
        best = None
        for i in range(self.m):
            a = self.T[i, j]
            if a > 0:
                ratio = self.T[i, self.ncols] / a
                key = (ratio, self.basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        return None if best is None else best[1]

    def _run(self, c, forbid):
        """Minimize c over the current tableau.  Returns 'optimal'/'unbounded'."""
        self.z = self._reduced_costs(c)
        stall = 0
        bland = False
        last_obj = None
        while True:
            if self.iterations >= self.iteration_limit:
                raise ResourceLimitError(
                    f"simplex iteration limit {self.iteration_limit} exceeded"
                )
            enter = None
            if bland:
                for j in range(self.ncols):
                    if j not in forbid and self.z[j] < 0 and j not in self._basis_set:
                        enter = j
                        break
            else:
                best = Fraction(0)
                for j in range(self.ncols):
                    if j in forbid or j in self._basis_set:
                        continue
                    zj = self.z[j]
                    if zj < best:
                        best = zj
                        enter = j
            if enter is None:
                return "optimal"
            r = self._ratio_row(enter)
            if r is None:
                return "unbounded"
            obj = self.z[self.ncols]
            self._basis_set.discard(self.basis[r])
            self._pivot(r, enter)
            self._basis_set.add(enter)
            self.iterations += 1
            if last_obj is not None and self.z[self.ncols] == obj:
                stall += 1
                if stall > 40:
                    bland = True
            else:
                stall = 0
            last_obj = obj

    def solve(self, costs):
        self._basis_set = set(self.basis)
        arts = set(self.art_of.values())
        # phase 1: drive artificial variables to zero
        if arts:
            c1 = [Fraction(0)] * self.ncols
            for j in arts:
                c1[j] = Fraction(1)
            status = self._run(c1, forbid=set())  # artificials may move in phase 1
            if status != "optimal":  # pragma: no cover - phase 1 is bounded
                raise AssertionError("phase 1 cannot be unbounded")
            infeas = sum(
                (self.T[i, self.ncols] for i in range(self.m) if self.basis[i] in arts),
                Fraction(0),
            )
            if infeas != 0:
                # Farkas certificate: duals of the phase-1 objective
                y = self._duals(c1)
                return "infeasible", y
            # pivot remaining zero-value artificials out of the basis
            for i in range(self.m):
                if self.basis[i] in arts:
                    for j in range(self.ncols):
                        if j not in arts and self.T[i, j] != 0:
                            self._basis_set.discard(self.basis[i])
                            self._pivot(i, j)
                            self._basis_set.add(j)
                            break
                    # a fully-zero row is redundant; its artificial stays basic
                    # at value zero and is simply never allowed to re-enter.
        c2 = [as_fraction(c) for c in costs] + [Fraction(0)] * (self.ncols - len(costs))
        status = self._run(c2, forbid=arts)
        return status, None

    def _duals(self, c_full):
        """y_i = c_B . B^{-1} e_i read from the initial identity columns."""
        y = []
        for i in range(self.m):
            col = self.tracker_of[i]
            # reduced cost of the tracker: c_col - y_i * (+1)
            c_col = c_full[col] if col < len(c_full) else Fraction(0)
            y.append((c_col - self.z[col]) * self.row_sign[i])
        return y

    def primal(self):
        x = {}
        for i in range(self.m):
            j = self.basis[i]
            if j < self.nstruct:
                v = self.T[i, self.ncols]
                if v:
                    x[j] = v
        return x


def _solve_dense(p: LinearProgram, iteration_limit: int) -> LpSolution:
    tab = _Tableau(p.costs, p.rows, iteration_limit)
    status, farkas = tab.solve(p.costs)
    if status == "infeasible" or farkas is not None:
        return LpSolution(status="infeasible", duals=farkas or [], iterations=tab.iterations)
    if status == "unbounded":
        return LpSolution(status="unbounded", iterations=tab.iterations)
    c_full = list(p.costs) + [Fraction(0)] * (tab.ncols - p.n_vars())
    y = tab._duals(c_full)
    x = tab.primal()
    obj = sum((p.costs[j] * v for j, v in x.items()), Fraction(0))
    return LpSolution(
        status="optimal",
        x=x,
        objective=obj,
        duals=y,
        gap=Fraction(0),
        iterations=tab.iterations,
    )


# -- restricted solves and pricing --------------------------------------------


def _keep_rows(p: LinearProgram, support):
    """Rows that a support-restricted program must carry: rows touched by the
    support plus rows that x=0 cannot satisfy (their duals default to 0)."""
    keep = []
    for i, (row, rhs, sense) in enumerate(p.rows):
        touched = any(j in support for j in row)
        if touched or (sense == EQ and rhs != 0) or (sense == LE and rhs < 0):
            keep.append(i)
    return keep


def _restricted_program(p: LinearProgram, support):
    sub = LinearProgram()
    order = sorted(support)
    for j in order:
        sub.add_variable(p.names[j], p.costs[j])
    pos = {j: k for k, j in enumerate(order)}
    keep = _keep_rows(p, support)
    for i in keep:
        row, rhs, sense = p.rows[i]
        sub.rows.append(({pos[j]: v for j, v in row.items() if j in pos}, rhs, sense))
    return sub, order, keep


def _price_all(p: LinearProgram, duals, support, cols, limit=200):
    """Exact pricing sweep: columns with negative reduced cost, worst first."""
    bad = []
    for j in range(p.n_vars()):
        if j in support:
            continue
        r = p.costs[j]
        for i, v in cols[j]:
            yi = duals[i]
            if yi:
                r -= yi * v
        if r < 0:
            bad.append((r, j))
    bad.sort()
    return [j for _, j in bad[:limit]]


def _float_support(p: LinearProgram, threshold=1e-9):
    """HiGHS warm start; returns indices of the (near-)support or None."""
    try:
        from scipy import sparse
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return None
    m_eq = [i for i, r in enumerate(p.rows) if r[2] == EQ]
    m_le = [i for i, r in enumerate(p.rows) if r[2] == LE]
    def build(idx_list):
        rows, cols, vals, rhs = [], [], [], []
        for r_out, i in enumerate(idx_list):
            row, b, _ = p.rows[i]
            rhs.append(float(b))
            for j, v in row.items():
                rows.append(r_out)
                cols.append(j)
                vals.append(float(v))
        mat = sparse.coo_matrix(
            (vals, (rows, cols)), shape=(len(idx_list), p.n_vars())
        ).tocsr()
        return mat, rhs
    kwargs = {}
    if m_eq:
        kwargs["A_eq"], kwargs["b_eq"] = build(m_eq)
    if m_le:
        kwargs["A_ub"], kwargs["b_ub"] = build(m_le)
    res = linprog(
        c=[float(c) for c in p.costs],
        bounds=(0, None),
        method="highs",
        **kwargs,
    )
    if res.status != 0:
        return None
    return [j for j, v in enumerate(res.x) if v > threshold]


def solve_lp(
    p: LinearProgram,
    suboptimality_budget=0,
    *,
    iteration_limit: int = 200_000,
    dense_limit: int = 24_000,
    pricing_rounds: int = 60,
    float_warm_start: bool = True,
) -> LpSolution:
    """Solve to exact optimality (gap 0); the budget is recorded for callers
    that use it to stop early, but the returned certificate always verifies.
    """
    budget = as_fraction(suboptimality_budget)
    if budget < 0:
        raise ValueError("suboptimality budget must be nonnegative")
    n, m = p.n_vars(), p.n_rows()
    if n * max(m, 1) <= dense_limit:
        sol = _solve_dense(p, iteration_limit)
        sol.budget = budget
        return sol

    support = set()
    if float_warm_start:
        fs = _float_support(p)
        if fs is not None:
            support.update(fs)
    total_iters = 0
    cols = p.columns()
    singleton_by_row = {}
    for j, col in enumerate(cols):
        if len(col) == 1:
            singleton_by_row.setdefault(col[0][0], []).append(j)
    for round_no in range(pricing_rounds):
        # singleton columns of the rows in play bound those rows' duals and
        # supply a crash basis, which kills the classic colgen tailing
        for i in _keep_rows(p, support):
            support.update(singleton_by_row.get(i, ()))
        sub, order, keep = _restricted_program(p, support)
        sol = _solve_dense(sub, iteration_limit)
        total_iters += sol.iterations
        duals = [Fraction(0)] * m
        for r_sub, i in enumerate(keep):
            if r_sub < len(sol.duals):
                duals[i] = sol.duals[r_sub]
        if sol.status == "unbounded":
            sol.iterations = total_iters
            sol.budget = budget
            return sol
        if sol.status == "infeasible":
            # Farkas pricing: columns that could reduce the infeasibility
            bad = []
            for j in range(n):
                if j in support:
                    continue
                r = Fraction(0)
                for i, v in cols[j]:
                    if duals[i]:
                        r -= duals[i] * v
                if r < 0:
                    bad.append((r, j))
            if not bad:
                return LpSolution(
                    status="infeasible",
                    duals=duals,
                    iterations=total_iters,
                    pricing_rounds=round_no + 1,
                    method="colgen",
                )
            bad.sort()
            support.update(j for _, j in bad[:200])
            continue
        entering = _price_all(p, duals, support, cols)
        if not entering:
            x = {order[j]: v for j, v in sol.x.items()}
            return LpSolution(
                status="optimal",
                x=x,
                objective=sol.objective,
                duals=duals,
                gap=Fraction(0),
                budget=budget,
                iterations=total_iters,
                pricing_rounds=round_no + 1,
                method="colgen",
            )
        support.update(entering)
    raise ResourceLimitError(f"column generation did not settle in {pricing_rounds} rounds")


def verify_certificate(p: LinearProgram, s: LpSolution) -> bool:
    """Exact primal feasibility + dual feasibility + complementary slackness.

    Complementary slackness is equivalent to a zero duality gap, so the check
    admits at most the recorded suboptimality budget (0 for exact solves).
    """
    if s.status != "optimal":
        return False
    if len(s.duals) != p.n_rows():
        return False
    for v in s.x.values():
        if v < 0:
            return False
    dual_rhs = Fraction(0)
    for (row, rhs, sense), y in zip(p.rows, s.duals):
        lhs = sum((v * s.x.get(j, Fraction(0)) for j, v in row.items()), Fraction(0))
        if sense == EQ and lhs != rhs:
            return False
        if sense == LE:
            if lhs > rhs:
                return False
            if y > 0:
                return False
        dual_rhs += y * rhs
    cols = p.columns()
    for j in range(p.n_vars()):
        r = p.costs[j]
        for i, v in cols[j]:
            if s.duals[i]:
                r -= s.duals[i] * v
        if r < 0:
            return False
    primal = sum((p.costs[j] * v for j, v in s.x.items()), Fraction(0))
    if primal != s.objective:
        return False
    gap = primal - dual_rhs
    return Fraction(0) <= gap <= s.budget


def write_lp_text(p: LinearProgram, path) -> None:
    """Debug dump in LP-like text form.  Each row and the objective are
    scaled by the lcm of their denominators, so every emitted coefficient
    is an exact integer (documented fixed-point encoding, scale factor 1/D
    recorded in a comment)."""
    from .util import common_scale

    def emit(row):
        d = common_scale([abs(v) for v in row.values()] or [Fraction(1)])
        terms = " + ".join(
            f"{int(v * d)} x{j}" for j, v in sorted(row.items())
        )
        return d, terms

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\ minsurf LP dump; rows scaled to integers, scale in comments\n")
        d, terms = emit({j: c for j, c in enumerate(p.costs) if c})
        fh.write(f"Minimize \\ scale 1/{d}\n obj: {terms}\n")
        fh.write("Subject To\n")
        for i, (row, rhs, sense) in enumerate(p.rows):
            full = dict(row)
            d = common_scale([abs(v) for v in full.values()] + [abs(rhs)] or [Fraction(1)])
            terms = " + ".join(f"{int(v * d)} x{j}" for j, v in sorted(full.items()))
            op = "=" if sense == EQ else "<="
            fh.write(f" r{i}: {terms} {op} {int(rhs * d)} \\ scale 1/{d}\n")
        fh.write("Bounds\n")
        for j in range(p.n_vars()):
            fh.write(f" 0 <= x{j}\n")
        fh.write("End\n")
