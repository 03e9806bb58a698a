"""Flat norm decomposition and top-dimensional fillings.

The grid-relative flat norm of a codimension-1 chain T is

    F(T) = min { M(X) + M(Y) : T = X + dY }

over chains X, Y on the complex, solved as an LP in split variables with
an exact certificate.  The value upper-bounds the ambient flat norm and
converges to it under refinement.

A cycle of codimension 1 bounds a unique top-dimensional chain on a box
complex; `fill_top` recovers it by sweeping along the last axis (the
boundary operator is triangular along any axis), which also yields the
coefficient bounds the branch-and-bound layer needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chains import Chain, chain_from_text, chain_to_text
from .grid import CellComplex, CellKey, cell_boundary
from .lp import LinearProgram, solve_lp
from .util import ContractViolation, as_fraction, format_rational, parse_rational


@dataclass
class FlatDecomposition:
    value: Fraction
    x: Chain
    y: Chain
    lp_iterations: int = 0

    def serialize(self) -> str:
        return (
            f"value={format_rational(self.value)}\n"
            "[x]\n" + chain_to_text(self.x) + "[y]\n" + chain_to_text(self.y)
        )

    @staticmethod
    def parse(text: str, cx: CellComplex) -> "FlatDecomposition":
        head, rest = text.split("[x]\n", 1)
        xs, ys = rest.split("[y]\n", 1)
        value = parse_rational(head.strip().split("=", 1)[1])
        return FlatDecomposition(value, chain_from_text(xs, cx), chain_from_text(ys, cx))


def _flat_program(t: Chain):
    cx = t.cx
    n = cx.spec.n
    if t.dim != n - 1:
        raise ValueError(f"flat norm expects dimension {n - 1}, got {t.dim}")
    vol_f = cx.measure(n - 1)
    vol_c = cx.measure(n)
    p = LinearProgram()
    nf = cx.num_cells(n - 1)
    nc = cx.num_cells(n)
    for i in range(nf):
        p.add_variable(("x+", i), vol_f)
        p.add_variable(("x-", i), vol_f)
    for i in range(nc):
        p.add_variable(("y+", i), vol_c)
        p.add_variable(("y-", i), vol_c)
    sides = cx.spec.sides
    rows = [dict() for _ in range(nf)]
    for i in range(nf):
        rows[i][2 * i] = Fraction(1)
        rows[i][2 * i + 1] = Fraction(-1)
    for ci in range(nc):
        key = cx.key_at(n, ci)
        for face, sign in cell_boundary(key):
            fi = cx.cell_index(face)
            rows[fi][2 * nf + 2 * ci] = Fraction(sign)
            rows[fi][2 * nf + 2 * ci + 1] = Fraction(-sign)
    targets = [Fraction(0)] * nf
    for key, val in t.coeffs.items():
        targets[cx.cell_index(key)] = val
    for i in range(nf):
        p.rows.append((rows[i], targets[i], "eq"))
    return p, nf, nc


def flat_norm_decompose(t: Chain, **solver_kwargs) -> FlatDecomposition:
    """Minimize M(X) + M(Y) over exact decompositions T = X + dY."""
    cx = t.cx
    n = cx.spec.n
    p, nf, nc = _flat_program(t)
    sol = solve_lp(p, **solver_kwargs)
    if sol.status != "optimal":  # cannot happen: X=T, Y=0 is feasible
        raise ContractViolation(f"flat norm LP ended {sol.status}")
    xc, yc = {}, {}
    for j, v in sol.x.items():
        if j < 2 * nf:
            idx, pos = divmod(j, 2)
            key = cx.key_at(n - 1, idx)
            xc[key] = xc.get(key, Fraction(0)) + (v if pos == 0 else -v)
        else:
            idx, pos = divmod(j - 2 * nf, 2)
            key = cx.key_at(n, idx)
            yc[key] = yc.get(key, Fraction(0)) + (v if pos == 0 else -v)
    x = Chain(cx, n - 1, xc)
    y = Chain(cx, n, yc)
    if x + y.boundary() != t:
        raise AssertionError("flat decomposition does not reassemble the input")
    if x.mass() + y.mass() != sol.objective:
        raise AssertionError("optimal split variables overlap; not a vertex optimum")
    return FlatDecomposition(sol.objective, x, y, lp_iterations=sol.iterations)


def flat_distance(a: Chain, b: Chain, **solver_kwargs) -> Fraction:
    """Grid flat distance F(a - b); symmetric, satisfies the triangle bound."""
    return flat_norm_decompose(a - b, **solver_kwargs).value


# -- fillings -----------------------------------------------------------------


def fill_along(g: Chain, cell_axes: tuple, sweep_axis: int) -> Chain:
    """Unique chain W spanning `cell_axes` with dW = g, by a sweep.

    Walls normal to the sweep axis determine each cell coefficient from its
    predecessor; the result is verified against g in full, so a non-cycle
    input fails loudly.
    """
    cx = g.cx
    if sweep_axis not in cell_axes:
        raise ValueError("sweep axis must be spanned")
    pos = cell_axes.index(sweep_axis)
    sigma = -1 if pos % 2 else 1
    wall_axes = cell_axes[:pos] + cell_axes[pos + 1 :]
    side = cx.spec.sides[sweep_axis]

    columns = {}
    for key, val in g.coeffs.items():
        if key.axes != wall_axes:
            continue
        transverse = key.anchor[:sweep_axis] + key.anchor[sweep_axis + 1 :]
        columns.setdefault(transverse, {})[key.anchor[sweep_axis]] = val

    coeffs = {}
    for transverse, walls in sorted(columns.items()):
        w = Fraction(0)
        for level in range(side):
            w = w - sigma * walls.get(level, Fraction(0))
            if w:
                anchor = list(transverse[:sweep_axis]) + [level] + list(
                    transverse[sweep_axis:]
                )
                coeffs[CellKey(tuple(anchor), cell_axes)] = w
        top = w - sigma * walls.get(side, Fraction(0))
        if top != 0:
            raise ContractViolation(
                "input is not a boundary: sweep does not close at the box face"
            )
    w_chain = Chain(cx, len(cell_axes), coeffs)
    if w_chain.boundary() != g:
        raise ContractViolation("input is not a cycle: filling verification failed")
    return w_chain


def fill_top(g: Chain) -> Chain:
    """The unique N-chain W with dW = g, for an (N-1)-cycle g."""
    n = g.cx.spec.n
    if g.dim != n - 1:
        raise ValueError(f"fill_top expects dimension {n - 1}, got {g.dim}")
    return fill_along(g, tuple(range(n)), n - 1)


def filling_coefficient_bound(mass_total: Fraction, cx: CellComplex) -> Fraction:
    """|w_j| <= M(G)/h^{N-1}: each sweep column accumulates at most the
    total wall coefficient mass.  Used as big-M provenance."""
    n = cx.spec.n
    return as_fraction(mass_total) / cx.measure(n - 1)
