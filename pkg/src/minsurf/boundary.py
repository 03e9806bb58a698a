"""Boundary ingestion: polylines to grid cycles, plus grid-to-grid pushes.

Off-grid closed polylines are snapped to the lattice (nearest point, ties
toward -inf) and routed between snapped vertices as monotone staircase
paths in lexicographic axis order, so ingestion is deterministic.  The
reported displacement bound is N*h per input point: each coordinate moves
less than h in snapping and at most h during staircase routing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .chains import Chain
from .grid import CellComplex, CellKey
from .util import MinsurfError, ParseError, as_fraction, parse_rational


class DegenerateInputError(MinsurfError):
    pass


@dataclass
class BoundaryInput:
    loops: list  # (vertices: list[tuple[Fraction,...]], multiplicity: int)

    @property
    def n(self) -> int:
        return len(self.loops[0][0][0]) if self.loops else 0


@dataclass
class IngestReport:
    displacement_bound: Fraction
    snapped_loops: int = 0
    warnings: list = field(default_factory=list)


def parse_boundary_file(path) -> BoundaryInput:
    loops = []
    vertices = None
    mult = 1
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("loop"):
                if vertices:
                    loops.append((vertices, mult))
                vertices = []
                mult = 1
                parts = line.split()
                for part in parts[1:]:
                    if part.startswith("mult="):
                        mult = int(part.split("=", 1)[1])
            else:
                if vertices is None:
                    raise ParseError("vertex line before any 'loop' header")
                vertices.append(tuple(parse_rational(v) for v in line.split()))
    if vertices:
        loops.append((vertices, mult))
    if not loops:
        return BoundaryInput([])
    n = len(loops[0][0][0])
    for verts, _ in loops:
        for v in verts:
            if len(v) != n:
                raise ParseError("inconsistent vertex dimensions in boundary file")
    return BoundaryInput(loops)


def write_boundary_file(inp: BoundaryInput, path) -> None:
    from .util import format_rational

    with open(path, "w", encoding="utf-8") as fh:
        for verts, mult in inp.loops:
            fh.write(f"loop mult={mult}\n")
            for v in verts:
                fh.write(" ".join(format_rational(c) for c in v) + "\n")


def _snap(value: Fraction, origin: Fraction, h: Fraction) -> int:
    """Nearest lattice index, ties toward -inf."""
    t = (value - origin) / h
    return math.ceil(t - Fraction(1, 2))


def _staircase_edges(p, q, chain_coeffs, mult, n):
    """Monotone lattice path p -> q, one axis at a time in index order."""
    cur = list(p)
    for axis in range(n):
        step = 1 if q[axis] > cur[axis] else -1
        while cur[axis] != q[axis]:
            lo = list(cur)
            if step < 0:
                lo[axis] -= 1
            key = CellKey(tuple(lo), (axis,))
            # an edge traversed in +axis direction enters with +1
            chain_coeffs[key] = chain_coeffs.get(key, Fraction(0)) + mult * step
            cur[axis] += step


def ingest_boundary(inp: BoundaryInput, cx: CellComplex):
    """Snap and route a polyline boundary onto the grid as an integral
    (N-2)-cycle.  Only N = 3 consumes polylines; higher dimensions supply
    chain files directly.
    """
    n = cx.spec.n
    if n != 3:
        raise ParseError("polyline ingestion is defined for N = 3 inputs")
    spec = cx.spec
    margin = 2 * spec.h
    coeffs = {}
    warnings = []
    for verts, mult in inp.loops:
        if len(verts) < 2:
            raise DegenerateInputError("loop with fewer than 2 vertices")
        for v in verts:
            for k in range(n):
                if not (
                    spec.box_min[k] + margin <= v[k] <= spec.box_max[k] - margin
                ):
                    raise ParseError(
                        f"vertex {tuple(map(str, v))} is within 2h of the box faces"
                    )
        snapped = [
            tuple(_snap(v[k], spec.box_min[k], spec.h) for k in range(n))
            for v in verts
        ]
        if abs(mult) != 1:
            warnings.append(
                f"loop with multiplicity {mult}: accepted, support may be non-manifold"
            )
        for a, b in zip(snapped, snapped[1:] + snapped[:1]):
            _staircase_edges(a, b, coeffs, Fraction(mult), n)
    chain = Chain(cx, n - 2, coeffs)
    if inp.loops and not chain:
        raise DegenerateInputError("all loops collapsed to zero after snapping")
    bnd = chain.boundary() if chain else chain
    if chain and bnd:
        raise AssertionError("staircase routing produced a non-cycle")
    report = IngestReport(
        displacement_bound=spec.n * spec.h,
        snapped_loops=len(inp.loops),
        warnings=warnings,
    )
    return chain, report


@dataclass
class CycleDiagnostics:
    is_cycle: bool
    offending_cells: list
    mass: Fraction
    bounding_box: tuple | None
    component_count: int


def validate_cycle(b: Chain) -> CycleDiagnostics:
    """Check dB = 0 and report mass, support box and component count."""
    bnd = b.boundary() if b.dim >= 1 else Chain(b.cx, 0)
    offenders = sorted(bnd.coeffs, key=lambda k: (k.axes, k.anchor))
    bbox = None
    if b.coeffs:
        boxes = [b.cx.cell_box(k) for k in b.coeffs]
        n = b.cx.spec.n
        bbox = (
            tuple(min(bx[0][k] for bx in boxes) for k in range(n)),
            tuple(max(bx[1][k] for bx in boxes) for k in range(n)),
        )
    return CycleDiagnostics(
        is_cycle=not bnd,
        offending_cells=offenders,
        mass=b.mass(),
        bounding_box=bbox,
        component_count=_component_count(b),
    )


def _component_count(b: Chain) -> int:
    """Connected components of the support (cells sharing any face point)."""
    keys = list(b.coeffs)
    if not keys:
        return 0
    boxes = {k: b.cx.cell_box(k) for k in keys}
    parent = {k: k for k in keys}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, c):
        ra, rc = find(a), find(c)
        if ra != rc:
            parent[ra] = rc

    for i, a in enumerate(keys):
        for c in keys[i + 1 :]:
            la, ha = boxes[a]
            lc, hc = boxes[c]
            if all(lc[k] <= ha[k] and la[k] <= hc[k] for k in range(len(la))):
                union(a, c)
    return len({find(k) for k in keys})


@dataclass
class DeformReport:
    mass_factor: Fraction | None
    error_chain_mass: Fraction
    exact_inverse: bool


def deform_to_grid(t: Chain, cx: CellComplex):
    """Push a chain from a refinement onto the coarse complex.

    Exactly inverts subdivision when possible; otherwise each fine cell is
    sent to the nearest coarse-aligned plane and its slab average is taken
    (a linear projection, mass factor <= 1).  The boundary-commutation
    defect is returned as an explicit error chain.
    """
    fine_spec = t.cx.spec
    if fine_spec.box_min != cx.spec.box_min or fine_spec.box_max != cx.spec.box_max:
        raise ParseError("grids are not nested: boxes differ")
    ratio = cx.spec.h / fine_spec.h
    if ratio.denominator != 1 or ratio < 1:
        raise ParseError("grids are not nested: coarse spacing must be a multiple")
    r = int(ratio)
    if r == 1:
        return t.copy(), DeformReport(Fraction(1), Fraction(0), True)

    def project(chain: Chain) -> Chain:
        dim = chain.dim
        weight = Fraction(1, r**dim)
        out = {}
        for key, val in chain.coeffs.items():
            anchor = []
            for k in range(cx.spec.n):
                a = key.anchor[k]
                if k in key.axes:
                    anchor.append(a // r)
                else:
                    anchor.append(_snap(Fraction(a), Fraction(0), Fraction(r)))
            ck = CellKey(tuple(anchor), key.axes)
            out[ck] = out.get(ck, Fraction(0)) + val * weight
        return Chain(cx, dim, out)

    coarse = project(t)
    err = coarse.boundary() - project(t.boundary()) if t.dim >= 1 else Chain(cx, 0)
    mass_factor = coarse.mass() / t.mass() if t.mass() else None
    # exactness: does subdividing the result reproduce the input chain?
    exact = False
    if err.mass() == 0 and (r & (r - 1)) == 0:
        back = coarse
        fine_cx = cx
        for _ in range(r.bit_length() - 1):
            fine_cx = fine_cx.refine()
            back = back.subdivided(fine_cx)
        exact = back == t
    return coarse, DeformReport(mass_factor, err.mass(), exact)
