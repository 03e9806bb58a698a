"""Polyhedral chains with exact rational coefficients.

A chain is a sparse coefficient map over cells of one dimension.  Mass is
the measure-weighted l1 norm of the coefficients; restriction is at cell
granularity (a cell is kept iff its closed hull lies in the region).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .grid import CellComplex, CellKey, cell_boundary, subdivide_key
from .util import ParseError, as_fraction, format_rational, parse_rational


class Chain:
    __slots__ = ("cx", "dim", "coeffs")

    def __init__(self, cx: CellComplex, dim: int, coeffs=None):
        self.cx = cx
        self.dim = dim
        clean = {}
        if coeffs:
            for key, val in coeffs.items():
                v = as_fraction(val)
                if v == 0:
                    continue
                if key.dim != dim:
                    raise ValueError(f"cell {key} has dim {key.dim}, chain dim {dim}")
                clean[key] = v
        self.coeffs = clean

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(cx: CellComplex, dim: int) -> "Chain":
        return Chain(cx, dim)

    @staticmethod
    def from_cell(cx: CellComplex, key: CellKey, coeff=1) -> "Chain":
        return Chain(cx, key.dim, {key: as_fraction(coeff)})

    def copy(self) -> "Chain":
        return Chain(self.cx, self.dim, dict(self.coeffs))

    # -- group operations ---------------------------------------------------

    def _check_compatible(self, other: "Chain"):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.cx.spec != other.cx.spec:
            raise ValueError("chains live on different complexes")

    def __add__(self, other: "Chain") -> "Chain":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for key, val in other.coeffs.items():
            s = out.get(key, Fraction(0)) + val
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return Chain(self.cx, self.dim, out)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + other.scale(-1)

    def __neg__(self) -> "Chain":
        return self.scale(-1)

    def scale(self, factor) -> "Chain":
        f = as_fraction(factor)
        if f == 0:
            return Chain(self.cx, self.dim)
        return Chain(self.cx, self.dim, {k: v * f for k, v in self.coeffs.items()})

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Chain)
            and self.dim == other.dim
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        raise TypeError("chains are not hashable")

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    # -- measure-theoretic ops ----------------------------------------------

    def boundary(self) -> "Chain":
        if self.dim < 1:
            raise ValueError("boundary needs dim >= 1")
        out = {}
        for key, val in self.coeffs.items():
            for face, sign in cell_boundary(key):
                s = out.get(face, Fraction(0)) + sign * val
                if s == 0:
                    out.pop(face, None)
                else:
                    out[face] = s
        return Chain(self.cx, self.dim - 1, out)

    def mass(self) -> Fraction:
        unit = self.cx.measure(self.dim)
        return sum((abs(v) for v in self.coeffs.values()), Fraction(0)) * unit

    def restrict(self, region) -> "Chain":
        kept = {
            k: v for k, v in self.coeffs.items() if region.contains_cell(self.cx, k)
        }
        return Chain(self.cx, self.dim, kept)

    def support_keys(self) -> frozenset:
        return frozenset(self.coeffs)

    @property
    def is_integral(self) -> bool:
        return all(v.denominator == 1 for v in self.coeffs.values())

    def rounded(self) -> "Chain":
        """Nearest-integer coefficients, halves toward -inf (deterministic)."""
        out = {}
        for k, v in self.coeffs.items():
            r = math.ceil(v - Fraction(1, 2))  # ties go toward -inf
            if r:
                out[k] = Fraction(r)
        return Chain(self.cx, self.dim, out)

    def subdivided(self, fine: CellComplex) -> "Chain":
        """Image on the half-spacing complex; mass and boundary are preserved."""
        if fine.spec.h * 2 != self.cx.spec.h or fine.spec.box_min != self.cx.spec.box_min:
            raise ValueError("target complex is not the half-spacing refinement")
        out = {}
        for key, val in self.coeffs.items():
            for child in subdivide_key(key):
                out[child] = out.get(child, Fraction(0)) + val
        return Chain(fine, self.dim, out)

    def sorted_items(self):
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0].axes, kv[0].anchor))

    def __repr__(self):
        return f"Chain(dim={self.dim}, cells={len(self.coeffs)}, mass={self.mass()})"


def chain_inner(a: Chain, b: Chain) -> Fraction:
    """Plain coefficient inner product (no measure weights)."""
    if len(a.coeffs) > len(b.coeffs):
        a, b = b, a
    tot = Fraction(0)
    for k, v in a.coeffs.items():
        w = b.coeffs.get(k)
        if w is not None:
            tot += v * w
    return tot


# -- chain file format --------------------------------------------------------
#
# Header line `dim=<k> h=<p/q>`, then one line per cell:
# `anchor=(...);axes=(...) coeff=<p/q>`.  Round-trips bit-exactly.


def write_chain(chain: Chain, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(chain_to_text(chain))


def chain_to_text(chain: Chain) -> str:
    lines = [f"dim={chain.dim} h={format_rational(chain.cx.spec.h)}"]
    for key, val in chain.sorted_items():
        lines.append(f"{key.serialize()} coeff={format_rational(val)}")
    return "\n".join(lines) + "\n"


def read_chain(path, cx: CellComplex) -> Chain:
    with open(path, "r", encoding="utf-8") as fh:
        return chain_from_text(fh.read(), cx)


def chain_from_text(text: str, cx: CellComplex) -> Chain:
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise ParseError("empty chain file")
    header = lines[0]
    try:
        dim_part, h_part = header.split()
        dim = int(dim_part.split("=", 1)[1])
        h = parse_rational(h_part.split("=", 1)[1])
    except (ValueError, IndexError) as exc:
        raise ParseError(f"bad chain header: {header!r}") from exc
    if h != cx.spec.h:
        raise ParseError(f"chain spacing {h} does not match grid spacing {cx.spec.h}")
    coeffs = {}
    for line in lines[1:]:
        try:
            keypart, coeffpart = line.rsplit(" ", 1)
            key = CellKey.parse(keypart)
            val = parse_rational(coeffpart.split("=", 1)[1])
        except (ValueError, IndexError) as exc:
            raise ParseError(f"bad chain line: {line!r}") from exc
        if not cx.contains(key):
            raise ParseError(f"cell {key} not in the complex")
        coeffs[key] = coeffs.get(key, Fraction(0)) + val
    return Chain(cx, dim, coeffs)
