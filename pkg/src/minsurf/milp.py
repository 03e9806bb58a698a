"""Branch and bound over exact LP relaxations.

Built for one non-convex pattern: a mass threshold on a split-variable
block ("the filling must be large"), which binaries restore to an exact
disjunction via big-M rows.  Every big-M bound must come with a recorded
provenance string; the solver never invents one.

Search is best-first on the exact relaxation bound.  With a zero budget
the incumbent equals the true mixed-integer optimum; with a positive
budget nodes within the budget of the incumbent are pruned and the
incumbent is certified to be within the budget of the optimum.  The
tightest closed bound is reported alongside the incumbent.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction

from .lp import LinearProgram, LpSolution, solve_lp
from .util import ResourceLimitError, as_fraction


@dataclass
class MilpProblem:
    lp: LinearProgram
    binaries: list
    big_m: dict = field(default_factory=dict)  # name -> (bound, provenance)

    def __post_init__(self):
        for name in self.binaries:
            self.lp.var(name)  # raises on unknown binary


@dataclass
class MilpResult:
    status: str  # optimal | infeasible
    x: dict = field(default_factory=dict)
    objective: Fraction | None = None
    lower_bound: Fraction | None = None
    nodes: int = 0
    lp_iterations: int = 0
    budget: Fraction = Fraction(0)

    def value(self, p: LinearProgram, name) -> Fraction:
        return self.x.get(p.var(name), Fraction(0))


def _node_program(m: MilpProblem, fixed: dict) -> LinearProgram:
    sub = LinearProgram()
    sub.names = list(m.lp.names)
    sub._index = dict(m.lp._index)
    sub.costs = list(m.lp.costs)
    sub.rows = list(m.lp.rows)
    for name in m.binaries:
        j = m.lp.var(name)
        if j in fixed:
            sub.add_eq({j: 1}, fixed[j])
        else:
            sub.add_ineq({j: 1}, 1)
    return sub


def solve_reverse_milp(
    m: MilpProblem,
    suboptimality_budget=0,
    *,
    node_limit: int = 20_000,
    lp_iteration_limit: int = 200_000,
) -> MilpResult:
    budget = as_fraction(suboptimality_budget)
    bin_idx = [m.lp.var(name) for name in m.binaries]

    incumbent: LpSolution | None = None
    incumbent_obj: Fraction | None = None
    closed_lb: Fraction | None = None  # min bound over closed leaves
    nodes = 0
    lp_iters = 0
    counter = 0

    def note_leaf(bound):
        nonlocal closed_lb
        if bound is None:
            return
        if closed_lb is None or bound < closed_lb:
            closed_lb = bound

    def evaluate(fixed):
        nonlocal lp_iters
        sub = _node_program(m, fixed)
        sol = solve_lp(sub, iteration_limit=lp_iteration_limit, float_warm_start=False)
        lp_iters += sol.iterations
        return sol

    root = evaluate({})
    nodes += 1
    heap = []
    if root.status == "optimal":
        heapq.heappush(heap, (root.objective, counter, {}, root))
    elif root.status == "unbounded":
        raise ResourceLimitError("relaxation unbounded; missing big-M bounds")
    # infeasible root: fall through with empty heap

    while heap:
        lb, _, fixed, sol = heapq.heappop(heap)
        if incumbent_obj is not None and lb >= incumbent_obj - budget:
            note_leaf(lb)
            continue
        frac = [
            (abs(sol.x.get(j, Fraction(0)) - Fraction(1, 2)), j)
            for j in bin_idx
            if j not in fixed and sol.x.get(j, Fraction(0)).denominator != 1
        ]
        # also branch binaries that sit at an integer but are unfixed only if
        # some other unfixed binary is fractional; integral relaxations are
        # feasible outright because the big-M rows see only 0/1 values
        if not frac:
            integral = all(
                sol.x.get(j, Fraction(0)) in (Fraction(0), Fraction(1))
                for j in bin_idx
            )
            if integral:
                if incumbent_obj is None or sol.objective < incumbent_obj:
                    incumbent, incumbent_obj = sol, sol.objective
                note_leaf(sol.objective)
                continue
            # non-binary value at an unfixed z without fractional part cannot
            # happen under the z <= 1 rows; guard anyway
            frac = [
                (Fraction(0), j)
                for j in bin_idx
                if j not in fixed and sol.x.get(j, Fraction(0)) not in (0, 1)
            ]
            if not frac:  # pragma: no cover
                continue
        frac.sort()
        branch_var = frac[0][1]
        for val in (0, 1):
            if nodes >= node_limit:
                raise ResourceLimitError(
                    f"branch-and-bound node limit {node_limit} exceeded",
                    partial=MilpResult(
                        status="optimal" if incumbent else "infeasible",
                        x=incumbent.x if incumbent else {},
                        objective=incumbent_obj,
                        lower_bound=min(
                            (t[0] for t in heap), default=incumbent_obj
                        ),
                        nodes=nodes,
                        lp_iterations=lp_iters,
                        budget=budget,
                    ),
                )
            child_fixed = dict(fixed)
            child_fixed[branch_var] = val
            child = evaluate(child_fixed)
            nodes += 1
            counter += 1
            if child.status == "optimal":
                heapq.heappush(heap, (child.objective, counter, child_fixed, child))
            # infeasible child: closed with bound +inf (does not lower closed_lb)

    if incumbent is None:
        return MilpResult(status="infeasible", nodes=nodes, lp_iterations=lp_iters, budget=budget)
    lower = closed_lb if closed_lb is not None else incumbent_obj
    return MilpResult(
        status="optimal",
        x=incumbent.x,
        objective=incumbent_obj,
        lower_bound=lower,
        nodes=nodes,
        lp_iterations=lp_iters,
        budget=budget,
    )


def enumerate_binary_optimum(m: MilpProblem, lp_iteration_limit: int = 200_000):
    """Oracle: exhaustive sweep over all binary assignments (tests only)."""
    import itertools

    bin_idx = [m.lp.var(name) for name in m.binaries]
    best = None
    best_x = None
    for assignment in itertools.product((0, 1), repeat=len(bin_idx)):
        fixed = dict(zip(bin_idx, assignment))
        sub = _node_program(m, fixed)
        sol = solve_lp(sub, iteration_limit=lp_iteration_limit, float_warm_start=False)
        if sol.status == "optimal" and (best is None or sol.objective < best):
            best = sol.objective
            best_x = sol.x
    if best is None:
        return MilpResult(status="infeasible")
    return MilpResult(status="optimal", x=best_x, objective=best, lower_bound=best)
