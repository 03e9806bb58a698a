"""Grid-aligned regions and exact distance computations.

Supports are unions of axis-aligned boxes (cells of any dimension expose
their closed hull that way), so all squared Euclidean distances decompose
per coordinate and stay rational:

  * min distance between two boxes is exact (interval gaps per axis);
  * max distance from a box to a single box is exact (separable convex
    maximum, attained at corners per coordinate);
  * max distance from a box to a *union* of boxes is enclosed between the
    corner evaluations (lower) and the min-over-boxes corner maximum
    (upper), and resolved by bisection when the enclosure must close.

Region kinds cover the open ball I(r) around a support, its closed
complement O(r), explicit cell sets with cell-granular complements, and
the trimming region built from a fine sub-lattice (see `minimize`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .grid import CellComplex, CellKey
from .util import sqrt_upper

Box = tuple  # (lo, hi) pair of coordinate tuples


def chain_support_boxes(chain) -> list:
    return [chain.cx.cell_box(k) for k in sorted(chain.coeffs, key=lambda c: (c.axes, c.anchor))]


# -- exact distance primitives ------------------------------------------------


def _axis_gap(lo1, hi1, lo2, hi2) -> Fraction:
    if lo2 > hi1:
        return lo2 - hi1
    if lo1 > hi2:
        return lo1 - hi2
    return Fraction(0)


def box_min_sq_dist(a: Box, b: Box) -> Fraction:
    lo1, hi1 = a
    lo2, hi2 = b
    tot = Fraction(0)
    for k in range(len(lo1)):
        g = _axis_gap(lo1[k], hi1[k], lo2[k], hi2[k])
        tot += g * g
    return tot


def _axis_max_sq(lo1, hi1, lo2, hi2) -> Fraction:
    """max over x in [lo1,hi1] of squared distance to [lo2,hi2]; convex, so
    it is attained at an endpoint."""
    best = Fraction(0)
    for x in (lo1, hi1):
        if x < lo2:
            g = lo2 - x
        elif x > hi2:
            g = x - hi2
        else:
            g = Fraction(0)
        if g * g > best:
            best = g * g
    return best


def box_max_sq_dist(a: Box, b: Box) -> Fraction:
    """Exact max over a of squared distance to the single box b."""
    lo1, hi1 = a
    lo2, hi2 = b
    return sum(
        (_axis_max_sq(lo1[k], hi1[k], lo2[k], hi2[k]) for k in range(len(lo1))),
        Fraction(0),
    )


def min_sq_to_support(box: Box, support) -> Fraction:
    return min(box_min_sq_dist(box, s) for s in support)


def max_sq_to_support_upper(box: Box, support) -> Fraction:
    """Upper bound for max over box of squared distance to the union."""
    return min(box_max_sq_dist(box, s) for s in support)


def point_min_sq_to_support(p, support) -> Fraction:
    pb = (p, p)
    return min(box_min_sq_dist(pb, s) for s in support)


def box_corners(box: Box):
    lo, hi = box
    ranges = [(lo[k],) if lo[k] == hi[k] else (lo[k], hi[k]) for k in range(len(lo))]
    return itertools.product(*ranges)


def max_sq_to_support_lower(box: Box, support) -> Fraction:
    """Lower bound: evaluate at corners and the center."""
    best = Fraction(0)
    for corner in box_corners(box):
        d = point_min_sq_to_support(corner, support)
        if d > best:
            best = d
    center = tuple((box[0][k] + box[1][k]) / 2 for k in range(len(box[0])))
    d = point_min_sq_to_support(center, support)
    return max(best, d)


def max_sq_to_support(box: Box, support, max_splits: int = 4000):
    """Enclosure [lo, hi] for max over box of squared distance to the union.

    Bisects the worst sub-box until the enclosure closes; on lattice inputs
    the maximum sits at half-lattice points and the bounds meet exactly.
    """
    lo0 = max_sq_to_support_lower(box, support)
    hi0 = max_sq_to_support_upper(box, support)
    # (upper, box) worklist; global lower tracks best corner evaluation seen
    work = [(hi0, box)]
    glo = lo0
    splits = 0
    while work and splits < max_splits:
        work.sort(key=lambda t: t[0])
        hi, bx = work.pop()
        if hi <= glo:
            work.append((hi, bx))
            break
        # split the widest axis
        widths = [bx[1][k] - bx[0][k] for k in range(len(bx[0]))]
        axis = max(range(len(widths)), key=lambda k: widths[k])
        if widths[axis] == 0:
            glo = max(glo, hi)  # degenerate: corner bounds were already exact
            continue
        mid = (bx[0][axis] + bx[1][axis]) / 2
        for part in (
            (bx[0], tuple(mid if k == axis else bx[1][k] for k in range(len(bx[0])))),
            (tuple(mid if k == axis else bx[0][k] for k in range(len(bx[0]))), bx[1]),
        ):
            p_hi = max_sq_to_support_upper(part, support)
            p_lo = max_sq_to_support_lower(part, support)
            glo = max(glo, p_lo)
            if p_hi > glo:
                work.append((p_hi, part))
        splits += 1
    ghi = max((t[0] for t in work), default=glo)
    ghi = max(ghi, glo)
    return glo, ghi


# -- region kinds --------------------------------------------------------------


class WholeBoxRegion:
    kind = "whole"

    def contains_cell(self, cx: CellComplex, key: CellKey) -> bool:
        return cx.contains(key)


class CellSetRegion:
    """Closed union of N-cells of one grid, given by their keys."""

    kind = "cellset"

    def __init__(self, spec, cells: frozenset):
        self.spec = spec
        self.cells = frozenset(cells)

    def contains_cell(self, cx: CellComplex, key: CellKey) -> bool:
        if cx.spec != self.spec:
            raise ValueError("region and chain live on different grids")
        n = self.spec.n
        if key.dim == n:
            return key in self.cells
        # a lower cell lies in the closed union iff some incident N-cell is in
        free = [k for k in range(n) if k not in key.axes]
        sides = self.spec.sides
        for offs in itertools.product((0, -1), repeat=len(free)):
            anchor = list(key.anchor)
            ok = True
            for k, o in zip(free, offs):
                anchor[k] += o
                if not 0 <= anchor[k] < sides[k]:
                    ok = False
                    break
            if ok and CellKey(tuple(anchor), tuple(range(n))) in self.cells:
                return True
        return False


class ComplementRegion:
    """Cell-granular complement: contains exactly the cells the inner one
    does not.  This is the convention that makes restriction split mass
    exactly (a shared boundary face belongs to one side only)."""

    kind = "complement"

    def __init__(self, inner):
        self.inner = inner

    def contains_cell(self, cx: CellComplex, key: CellKey) -> bool:
        return not self.inner.contains_cell(cx, key)


class DistanceBall:
    """I(r): open Euclidean (or closed L-inf) neighborhood of a support.

    Containment of a closed cell in the open Euclidean ball is certified
    via the exact upper bound on the max distance: conservative (a cell
    whose true max distance is below r but whose bound is not will be
    reported outside).  For single-box supports the bound is exact.
    """

    kind = "ball"

    def __init__(self, support, radius, metric="euclid"):
        self.support = list(support)
        self.radius = Fraction(radius)
        if metric not in ("euclid", "linf"):
            raise ValueError(f"unknown metric {metric!r}")
        self.metric = metric

    def contains_cell(self, cx: CellComplex, key: CellKey) -> bool:
        if not self.support:
            return False
        box = cx.cell_box(key)
        if self.metric == "euclid":
            return max_sq_to_support_upper(box, self.support) < self.radius**2
        # L-inf: max over cell of min over boxes of linf distance, bounded by
        # min over boxes of the per-box exact linf maximum
        best = None
        for s in self.support:
            m = Fraction(0)
            for k in range(len(box[0])):
                g = _axis_max_sq(box[0][k], box[1][k], s[0][k], s[1][k])
                if g > m:
                    m = g
            if best is None or m < best:
                best = m
        return best <= self.radius**2


class DistanceComplement:
    """O(r) = {x : dist(x, support) >= r}; containment is exact."""

    kind = "complement_band"

    def __init__(self, support, radius):
        self.support = list(support)
        self.radius = Fraction(radius)

    def contains_cell(self, cx: CellComplex, key: CellKey) -> bool:
        if not self.support:
            return True
        box = cx.cell_box(key)
        return min_sq_to_support(box, self.support) >= self.radius**2


@dataclass
class HausdorffResult:
    """Squared two-sided Hausdorff distance with exactness bookkeeping."""

    lower_sq: Fraction | None
    upper_sq: Fraction | None
    infinite: bool = False

    @property
    def exact(self) -> bool:
        return self.infinite or self.lower_sq == self.upper_sq

    @property
    def sq_value(self):
        return self.lower_sq if self.exact and not self.infinite else None

    def less_than(self, eps: Fraction):
        """Certified comparison dist < eps; None if the enclosure straddles."""
        if self.infinite:
            return False
        e2 = Fraction(eps) ** 2
        if self.upper_sq < e2:
            return True
        if self.lower_sq >= e2:
            return False
        return None

    def float_value(self) -> float:
        if self.infinite:
            return float("inf")
        mid = (self.lower_sq + self.upper_sq) / 2
        return float(mid) ** 0.5


def directed_hausdorff_sq(a_boxes, b_boxes):
    """Enclosure of sup over the union A of squared distance to union B."""
    glo, ghi = Fraction(0), Fraction(0)
    for abox in a_boxes:
        lo, hi = max_sq_to_support(abox, b_boxes)
        glo = max(glo, lo)
        ghi = max(ghi, hi)
    return glo, ghi


def hausdorff_distance(a_boxes, b_boxes) -> HausdorffResult:
    """Two-sided Hausdorff distance between closed box unions.

    Empty-vs-empty is 0; empty-vs-nonempty is the +infinity sentinel.
    """
    a_boxes, b_boxes = list(a_boxes), list(b_boxes)
    if not a_boxes and not b_boxes:
        return HausdorffResult(Fraction(0), Fraction(0))
    if not a_boxes or not b_boxes:
        return HausdorffResult(None, None, infinite=True)
    lo1, hi1 = directed_hausdorff_sq(a_boxes, b_boxes)
    lo2, hi2 = directed_hausdorff_sq(b_boxes, a_boxes)
    return HausdorffResult(max(lo1, lo2), max(hi1, hi2))


def hausdorff_between_chains(a, b) -> HausdorffResult:
    return hausdorff_distance(chain_support_boxes(a), chain_support_boxes(b))


def ball_closure_inside_ball(support, r_inner: Fraction, r_outer: Fraction) -> bool:
    """Clos[I(r_inner)] subset of I(r_outer) for balls around one support."""
    return Fraction(r_inner) < Fraction(r_outer)


def sqrt_n_upper(n: int) -> Fraction:
    """Rational upper bound for sqrt(n), used for cell-diameter margins."""
    return sqrt_upper(Fraction(n), bits=24)
