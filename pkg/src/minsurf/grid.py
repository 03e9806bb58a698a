"""Axis-aligned cubical cell complexes over a rational box.

A cell is identified by a lattice anchor and the sorted tuple of axes it
spans: the cell is ``box_min + h*(anchor + [0,1]^axes x {0}^others)``.  Only
the dimensions used by the algorithms (N-2, N-1, N) are indexed, but cell
keys of any dimension can be manipulated combinatorially.

Boundary orientation convention (fixed): for a cell spanning sorted axes
a_0 < ... < a_{k-1}, the face obtained by removing axis a_p on the +e side
gets sign (-1)^p and the opposite face the negated sign.  This makes
boundary-of-boundary vanish identically over the integers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple

import numpy as np
from scipy import sparse

from .util import (
    ParseError,
    ResourceLimitError,
    as_fraction,
    format_rational,
    format_vector,
    parse_rational,
    parse_vector,
)


class CellKey(NamedTuple):
    anchor: tuple
    axes: tuple

    @property
    def dim(self) -> int:
        return len(self.axes)

    def serialize(self) -> str:
        a = ",".join(str(v) for v in self.anchor)
        j = ",".join(str(v) for v in self.axes)
        return f"anchor=({a});axes=({j})"

    @staticmethod
    def parse(text: str) -> "CellKey":
        text = text.strip()
        try:
            apart, jpart = text.split(";")
            a = apart.split("=", 1)[1].strip("()")
            j = jpart.split("=", 1)[1].strip("()")
            anchor = tuple(int(v) for v in a.split(",") if v != "")
            axes = tuple(int(v) for v in j.split(",") if v != "")
            return CellKey(anchor, axes)
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad cell key: {text!r}") from exc


@dataclass(frozen=True)
class GridSpec:
    """Box plus spacing; box sides must be positive integer multiples of h."""

    n: int
    box_min: tuple
    box_max: tuple
    h: Fraction

    def __post_init__(self):
        if self.n < 3:
            raise ParseError(f"dimension must be >= 3, got {self.n}")
        if len(self.box_min) != self.n or len(self.box_max) != self.n:
            raise ParseError("box vectors must have length n")
        if self.h <= 0:
            raise ParseError("spacing h must be positive")
        for k in range(self.n):
            side = (self.box_max[k] - self.box_min[k]) / self.h
            if side <= 0 or side.denominator != 1:
                raise ParseError(
                    f"box side along axis {k} is not a positive multiple of h"
                )

    @property
    def sides(self) -> tuple:
        return tuple(
            int((self.box_max[k] - self.box_min[k]) / self.h) for k in range(self.n)
        )

    def refined(self) -> "GridSpec":
        return GridSpec(self.n, self.box_min, self.box_max, self.h / 2)


def cell_boundary(key: CellKey) -> list:
    """Signed codimension-1 faces of a cell, from the orientation convention.

    Purely combinatorial; valid for keys of any dimension >= 1.
    """
    out = []
    anchor, axes = key
    for p, a in enumerate(axes):
        face_axes = axes[:p] + axes[p + 1 :]
        sign = -1 if p % 2 else 1
        upper = list(anchor)
        upper[a] += 1
        out.append((CellKey(tuple(upper), face_axes), sign))
        out.append((CellKey(anchor, face_axes), -sign))
    return out


def cell_cofaces(key: CellKey, sides) -> list:
    """Signed incidences (coface, sign) of all (dim+1)-cells containing key."""
    out = []
    anchor, axes = key
    n = len(anchor)
    for a in range(n):
        if a in axes:
            continue
        up_axes = tuple(sorted(axes + (a,)))
        p = up_axes.index(a)
        sign = -1 if p % 2 else 1
        # key is the lower a-face of the coface anchored at `anchor` ...
        if anchor[a] < sides[a]:
            out.append((CellKey(anchor, up_axes), -sign))
        # ... and the upper a-face of the coface anchored one step below.
        if anchor[a] > 0:
            lo = list(anchor)
            lo[a] -= 1
            out.append((CellKey(tuple(lo), up_axes), sign))
    return out


class CellComplex:
    """Indexed cubical complex storing dimensions N-2, N-1 and N."""

    def __init__(self, spec: GridSpec, cell_limit: int | None = None):
        self.spec = spec
        n = spec.n
        self.dims = (n - 2, n - 1, n)
        sides = spec.sides
        self._blocks = {}
        self._offsets = {}
        self._counts = {}
        total = 0
        for d in self.dims:
            blocks = list(itertools.combinations(range(n), d))
            shapes = []
            offsets = []
            running = 0
            for axes in blocks:
                shape = tuple(
                    sides[k] if k in axes else sides[k] + 1 for k in range(n)
                )
                cnt = int(np.prod(shape, dtype=object))
                shapes.append(shape)
                offsets.append(running)
                running += cnt
            self._blocks[d] = (blocks, shapes)
            self._offsets[d] = offsets
            self._counts[d] = running
            total += running
        if cell_limit is not None and total > cell_limit:
            raise ResourceLimitError(
                f"complex would hold {total} cells, above the limit {cell_limit}"
            )
        self._bnd_cache = {}

    # -- indexing -------------------------------------------------------

    def num_cells(self, dim: int) -> int:
        return self._counts[dim]

    def _block_of(self, axes: tuple, dim: int) -> int:
        blocks, _ = self._blocks[dim]
        try:
            return blocks.index(axes)
        except ValueError as exc:
            raise KeyError(f"no block with axes {axes}") from exc

    def contains(self, key: CellKey) -> bool:
        dim = key.dim
        if dim not in self._blocks:
            return False
        blocks, shapes = self._blocks[dim]
        try:
            b = blocks.index(key.axes)
        except ValueError:
            return False
        shape = shapes[b]
        return all(0 <= key.anchor[k] < shape[k] for k in range(self.spec.n))

    def cell_index(self, key: CellKey) -> int:
        dim = key.dim
        blocks, shapes = self._blocks[dim]
        b = self._block_of(key.axes, dim)
        shape = shapes[b]
        idx = 0
        for k in range(self.spec.n):
            a = key.anchor[k]
            if not 0 <= a < shape[k]:
                raise KeyError(f"cell {key} outside complex")
            idx = idx * shape[k] + a
        return self._offsets[dim][b] + idx

    def key_at(self, dim: int, index: int) -> CellKey:
        blocks, shapes = self._blocks[dim]
        offsets = self._offsets[dim]
        for b in range(len(blocks) - 1, -1, -1):
            if index >= offsets[b]:
                rem = index - offsets[b]
                shape = shapes[b]
                anchor = [0] * self.spec.n
                for k in range(self.spec.n - 1, -1, -1):
                    anchor[k] = rem % shape[k]
                    rem //= shape[k]
                return CellKey(tuple(anchor), blocks[b])
        raise IndexError(index)

    def iter_cells(self, dim: int) -> Iterator[CellKey]:
        blocks, shapes = self._blocks[dim]
        for axes, shape in zip(blocks, shapes):
            for anchor in itertools.product(*(range(s) for s in shape)):
                yield CellKey(anchor, axes)

    # -- geometry ---------------------------------------------------------

    def cell_measure(self, key: CellKey) -> Fraction:
        if not self.contains(key):
            raise KeyError(f"unknown cell {key}")
        return self.spec.h ** key.dim

    def measure(self, dim: int) -> Fraction:
        return self.spec.h**dim

    def cell_box(self, key: CellKey):
        """Closed hull of the cell as (lo, hi) rational vectors."""
        h = self.spec.h
        lo = tuple(
            self.spec.box_min[k] + key.anchor[k] * h for k in range(self.spec.n)
        )
        hi = tuple(
            lo[k] + (h if k in key.axes else 0) for k in range(self.spec.n)
        )
        return lo, hi

    # -- boundary matrices -------------------------------------------------

    def boundary_matrix(self, k: int):
        """Sparse signed incidence matrix of d on k-cells, k in {N-1, N}."""
        n = self.spec.n
        if k not in (n - 1, n):
            raise ParseError(f"boundary matrix defined for k in {{{n-1}, {n}}}")
        if k in self._bnd_cache:
            return self._bnd_cache[k]
        blocks, shapes = self._blocks[k]
        fblocks, fshapes = self._blocks[k - 1]
        rows, cols, vals = [], [], []
        for b, (axes, shape) in enumerate(zip(blocks, shapes)):
            cnt = int(np.prod(shape, dtype=object))
            if cnt == 0:
                continue
            idx = np.arange(cnt)
            anchors = np.array(np.unravel_index(idx, shape))  # (n, cnt)
            col = self._offsets[k][b] + idx
            for p, a in enumerate(axes):
                face_axes = axes[:p] + axes[p + 1 :]
                fb = fblocks.index(face_axes)
                fshape = fshapes[fb]
                foff = self._offsets[k - 1][fb]
                sign = -1 if p % 2 else 1
                lower = foff + np.ravel_multi_index(anchors, fshape)
                up = anchors.copy()
                up[a] += 1
                upper = foff + np.ravel_multi_index(up, fshape)
                rows.append(upper)
                cols.append(col)
                vals.append(np.full(cnt, sign, dtype=np.int8))
                rows.append(lower)
                cols.append(col)
                vals.append(np.full(cnt, -sign, dtype=np.int8))
        mat = sparse.coo_matrix(
            (
                np.concatenate(vals),
                (np.concatenate(rows), np.concatenate(cols)),
            ),
            shape=(self.num_cells(k - 1), self.num_cells(k)),
            dtype=np.int8,
        ).tocsc()
        self._bnd_cache[k] = mat
        return mat

    # -- refinement ---------------------------------------------------------

    def refine(self, cell_limit: int | None = None) -> "CellComplex":
        return CellComplex(self.spec.refined(), cell_limit=cell_limit)


def subdivide_key(key: CellKey) -> list:
    """Children of a cell under h -> h/2 refinement (equal coefficients)."""
    anchor, axes = key
    base = tuple(2 * a for a in anchor)
    out = []
    for offs in itertools.product((0, 1), repeat=len(axes)):
        child = list(base)
        for a, o in zip(axes, offs):
            child[a] += o
        out.append(CellKey(tuple(child), axes))
    return out


def build_grid(spec: GridSpec, cell_limit: int | None = None) -> CellComplex:
    """Build the full cubical complex over the box of `spec`."""
    return CellComplex(spec, cell_limit=cell_limit)


# -- grid spec file format ---------------------------------------------------


def parse_grid_file(path) -> GridSpec:
    data = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(f"bad grid line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            data[key] = val
    try:
        n = int(data["N"])
        h = parse_rational(data["h"])
        box_min = parse_vector(data["box_min"], n)
        box_max = parse_vector(data["box_max"], n)
    except KeyError as exc:
        raise ParseError(f"grid file missing key {exc}") from exc
    return GridSpec(n, box_min, box_max, h)


def write_grid_file(spec: GridSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"N = {spec.n}\n")
        fh.write(f"box_min = {format_vector(spec.box_min)}\n")
        fh.write(f"box_max = {format_vector(spec.box_max)}\n")
        fh.write(f"h = {format_rational(spec.h)}\n")


def make_spec(n, box_min, box_max, h) -> GridSpec:
    return GridSpec(
        n,
        tuple(as_fraction(x) for x in box_min),
        tuple(as_fraction(x) for x in box_max),
        as_fraction(h),
    )
