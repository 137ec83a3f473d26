"""Continuous piecewise polynomials on open n-dimensional intervals.

A domain is an open box given by a rational center and per-axis radii.  A
piecewise polynomial subdivides it by a tensor grid of interior breakpoints
and stores one exact polynomial per cell.  Construction validates that
adjacent cells agree identically on their shared faces, so every stored
object is a continuous function; evaluation at any rational point of the
closed box is exact.

The calculus needed downstream lives here: cellwise partial derivatives
(refused with a named face when the function is not C^1 in that axis),
primitives anchored at the domain center, restriction, and exact integration.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional

from .poly import Poly
from .rationals import as_fraction


class PiecewiseError(ValueError):
    pass


# -- multi-indices: plain int tuples with componentwise helpers -------------

def mi(parts: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(p) for p in parts)
    if any(p < 0 for p in out):
        raise ValueError(f"multi-index must be natural: {out}")
    return out


def mi_le(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mi_max(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(max(x, y) for x, y in zip(a, b))


def mi_add(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    if not mi_le(b, a):
        raise ValueError(f"{b} exceeds {a} somewhere")
    return tuple(x - y for x, y in zip(a, b))


def unit_index(n: int, axis: int) -> tuple[int, ...]:
    return tuple(1 if i == axis else 0 for i in range(n))


@dataclass(frozen=True)
class Interval:
    """Open box prod_k (c_k - r_k, c_k + r_k) with rational data."""

    center: tuple[Fraction, ...]
    radii: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.center) != len(self.radii) or not self.center:
            raise PiecewiseError("center and radii must match and be nonempty")
        if any(r <= 0 for r in self.radii):
            raise PiecewiseError("radii must be positive")

    @staticmethod
    def make(center, radii) -> "Interval":
        return Interval(tuple(as_fraction(c) for c in center),
                        tuple(as_fraction(r) for r in radii))

    @staticmethod
    def of_1d(lo, hi) -> "Interval":
        lo, hi = as_fraction(lo), as_fraction(hi)
        if hi <= lo:
            raise PiecewiseError("empty interval")
        return Interval((lo + (hi - lo) / 2,), ((hi - lo) / 2,))

    @property
    def dim(self) -> int:
        return len(self.center)

    def lo(self, axis: int) -> Fraction:
        return self.center[axis] - self.radii[axis]

    def hi(self, axis: int) -> Fraction:
        return self.center[axis] + self.radii[axis]

    def contains_point(self, point, closed: bool = True) -> bool:
        pt = [as_fraction(v) for v in point]
        for k, v in enumerate(pt):
            if closed:
                if not (self.lo(k) <= v <= self.hi(k)):
                    return False
            elif not (self.lo(k) < v < self.hi(k)):
                return False
        return True

    def contains(self, other: "Interval") -> bool:
        return all(
            abs(other.center[k] - self.center[k]) + other.radii[k] <= self.radii[k]
            for k in range(self.dim))

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        centers, radii = [], []
        for k in range(self.dim):
            lo = max(self.lo(k), other.lo(k))
            hi = min(self.hi(k), other.hi(k))
            if hi <= lo:
                return None
            centers.append((lo + hi) / 2)
            radii.append((hi - lo) / 2)
        return Interval(tuple(centers), tuple(radii))


class PiecewisePoly:
    __slots__ = ("domain", "breaks", "cells")

    def __init__(self, domain: Interval,
                 breaks: tuple[tuple[Fraction, ...], ...],
                 cells: dict[tuple[int, ...], Poly],
                 validate: bool = True):
        self.domain = domain
        self.breaks = tuple(tuple(as_fraction(b) for b in bs) for bs in breaks)
        self.cells = dict(cells)
        if len(self.breaks) != domain.dim:
            raise PiecewiseError("one breakpoint list per axis required")
        for k, bs in enumerate(self.breaks):
            if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
                raise PiecewiseError(f"axis {k} breakpoints must increase")
            if bs and not (domain.lo(k) < bs[0] and bs[-1] < domain.hi(k)):
                raise PiecewiseError(f"axis {k} breakpoints must be interior")
        shape = self.shape
        expected = set(product(*(range(s) for s in shape)))
        if set(self.cells) != expected:
            raise PiecewiseError("cell table does not match the grid")
        for idx, p in self.cells.items():
            if not isinstance(p, Poly) or p.nvars != domain.dim:
                raise PiecewiseError(f"cell {idx} is not a polynomial in "
                                     f"{domain.dim} variables")
        if validate:
            self._check_continuity()

    def __eq__(self, other) -> bool:
        # structural: same grid and same cell polynomials
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return (self.domain == other.domain and self.breaks == other.breaks
                and self.cells == other.cells)

    def __hash__(self) -> int:
        return hash((self.domain, self.breaks,
                     frozenset(self.cells.items())))

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(bs) + 1 for bs in self.breaks)

    def edges(self, axis: int) -> tuple[Fraction, ...]:
        return (self.domain.lo(axis),) + self.breaks[axis] + (self.domain.hi(axis),)

    def _check_continuity(self):
        for k in range(self.dim):
            for t, b in enumerate(self.breaks[k]):
                for idx in self._indices_with(k, t):
                    jdx = list(idx)
                    jdx[k] += 1
                    left = self.cells[idx].substitute_axis(k, b)
                    right = self.cells[tuple(jdx)].substitute_axis(k, b)
                    if left != right:
                        raise PiecewiseError(
                            f"discontinuous across axis {k} at {b}")

    def _indices_with(self, axis: int, value: int):
        ranges = [range(s) for s in self.shape]
        ranges[axis] = range(value, value + 1)
        return product(*ranges)

    # -- structural constructors -----------------------------------------

    @staticmethod
    def from_poly(domain: Interval, p: Poly) -> "PiecewisePoly":
        br = tuple(() for _ in range(domain.dim))
        return PiecewisePoly(domain, br, {(0,) * domain.dim: p}, validate=False)

    @staticmethod
    def constant(domain: Interval, c) -> "PiecewisePoly":
        return PiecewisePoly.from_poly(domain, Poly.const(domain.dim, c))

    @staticmethod
    def zero(domain: Interval) -> "PiecewisePoly":
        return PiecewisePoly.constant(domain, 0)

    @staticmethod
    def from_cells_1d(domain: Interval, breaks, polys) -> "PiecewisePoly":
        if domain.dim != 1:
            raise PiecewiseError("from_cells_1d needs a 1-d domain")
        breaks = tuple(as_fraction(b) for b in breaks)
        cells = {(i,): p for i, p in enumerate(polys)}
        return PiecewisePoly(domain, (breaks,), cells)

    # -- lookup and evaluation -------------------------------------------

    def cell_index(self, point) -> tuple[int, ...]:
        pt = [as_fraction(v) for v in point]
        if not self.domain.contains_point(pt, closed=True):
            raise PiecewiseError(f"point {pt} outside the closed domain")
        idx = []
        for k, v in enumerate(pt):
            i = bisect.bisect_right(self.breaks[k], v)
            idx.append(min(i, self.shape[k] - 1))
        return tuple(idx)

    def eval(self, point) -> Fraction:
        return self.cells[self.cell_index(point)].eval(point)

    # -- algebra over a common refinement --------------------------------

    def refine_to(self, breaks: tuple[tuple[Fraction, ...], ...]) -> "PiecewisePoly":
        """Re-grid onto a superset of breakpoints without changing the function."""
        for k in range(self.dim):
            if not set(self.breaks[k]) <= set(breaks[k]):
                raise PiecewiseError("refinement must keep existing breakpoints")
        new_edges = [(self.domain.lo(k),) + tuple(breaks[k]) + (self.domain.hi(k),)
                     for k in range(self.dim)]
        cells = {}
        for idx in product(*(range(len(e) - 1) for e in new_edges)):
            mid = [(new_edges[k][i] + new_edges[k][i + 1]) / 2
                   for k, i in enumerate(idx)]
            cells[idx] = self.cells[self.cell_index(mid)]
        return PiecewisePoly(self.domain, breaks, cells, validate=False)

    def _common(self, other: "PiecewisePoly"):
        if self.domain != other.domain:
            raise PiecewiseError("domains differ")
        joint = tuple(tuple(sorted(set(a) | set(b)))
                      for a, b in zip(self.breaks, other.breaks))
        return self.refine_to(joint), other.refine_to(joint)

    def __add__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        a, b = self._common(other)
        cells = {i: a.cells[i] + b.cells[i] for i in a.cells}
        return PiecewisePoly(self.domain, a.breaks, cells, validate=False)

    def __sub__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        return self + other.scale(-1)

    def __mul__(self, other: "PiecewisePoly") -> "PiecewisePoly":
        a, b = self._common(other)
        cells = {i: a.cells[i] * b.cells[i] for i in a.cells}
        return PiecewisePoly(self.domain, a.breaks, cells, validate=False)

    def scale(self, c) -> "PiecewisePoly":
        return PiecewisePoly(self.domain, self.breaks,
                             {i: p.scale(c) for i, p in self.cells.items()},
                             validate=False)

    def equal_function(self, other: "PiecewisePoly") -> bool:
        a, b = self._common(other)
        return all(a.cells[i] == b.cells[i] for i in a.cells)

    @property
    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.cells.values())

    # -- calculus ---------------------------------------------------------

    def partial(self, axis: int) -> "PiecewisePoly":
        """Cellwise derivative in one axis; refuses at the first face where
        the one-sided derivatives disagree."""
        deriv = {i: p.partial(axis) for i, p in self.cells.items()}
        for t, b in enumerate(self.breaks[axis]):
            for idx in self._indices_with(axis, t):
                jdx = list(idx)
                jdx[axis] += 1
                if deriv[idx].substitute_axis(axis, b) != \
                        deriv[tuple(jdx)].substitute_axis(axis, b):
                    raise PiecewiseError(
                        f"not C^1 in axis {axis}: derivative jumps at {b}")
        return PiecewisePoly(self.domain, self.breaks, deriv, validate=False)

    def is_c1_in_axis(self, axis: int) -> bool:
        try:
            self.partial(axis)
            return True
        except PiecewiseError:
            return False

    def primitive(self, axis: int) -> "PiecewisePoly":
        """Integral from the domain center plane along one axis.

        The result vanishes on x_axis = center and is continuous across the
        grid by construction.
        """
        edges = self.edges(axis)
        m = self.shape[axis]
        c = self.domain.center[axis]
        j0 = min(max(bisect.bisect_right(edges, c) - 1, 0), m - 1)

        other = [range(s) for s in self.shape]
        other[axis] = range(1)
        new_cells: dict[tuple[int, ...], Poly] = {}
        for base in product(*other):
            def at(j):
                idx = list(base)
                idx[axis] = j
                return tuple(idx)

            anti = [self.cells[at(j)].antiderivative(axis) for j in range(m)]
            # F_j = anti[j] + accum[j]; the anchor F(c) = 0 fixes cell j0 and
            # continuity at shared edges propagates the rest
            accum: dict[int, Poly] = {j0: -anti[j0].substitute_axis(axis, c)}
            for j in range(j0 + 1, m):
                left = anti[j - 1].substitute_axis(axis, edges[j]) + accum[j - 1]
                accum[j] = left - anti[j].substitute_axis(axis, edges[j])
            for j in range(j0 - 1, -1, -1):
                right = anti[j + 1].substitute_axis(axis, edges[j + 1]) + accum[j + 1]
                accum[j] = right - anti[j].substitute_axis(axis, edges[j + 1])
            for j in range(m):
                new_cells[at(j)] = anti[j] + accum[j]
        return PiecewisePoly(self.domain, self.breaks, new_cells, validate=False)

    def primitive_multi(self, alpha: tuple[int, ...]) -> "PiecewisePoly":
        out = self
        for axis, count in enumerate(alpha):
            for _ in range(count):
                out = out.primitive(axis)
        return out

    def restrict(self, sub: Interval) -> "PiecewisePoly":
        if sub.dim != self.dim or not self.domain.contains(sub):
            raise PiecewiseError("restriction target is not a subinterval")
        new_breaks = tuple(
            tuple(b for b in self.breaks[k] if sub.lo(k) < b < sub.hi(k))
            for k in range(self.dim))
        edges = [(sub.lo(k),) + new_breaks[k] + (sub.hi(k),)
                 for k in range(self.dim)]
        cells = {}
        for idx in product(*(range(len(e) - 1) for e in edges)):
            mid = [(edges[k][i] + edges[k][i + 1]) / 2 for k, i in enumerate(idx)]
            cells[idx] = self.cells[self.cell_index(mid)]
        return PiecewisePoly(sub, new_breaks, cells, validate=False)

    def integral(self) -> Fraction:
        """Exact integral over the whole domain."""
        total = Fraction(0)
        for idx, p in self.cells.items():
            cur = p
            for k in range(self.dim):
                lo = self.edges(k)[idx[k]]
                hi = self.edges(k)[idx[k] + 1]
                anti = cur.antiderivative(k)
                cur = anti.substitute_axis(k, hi) - anti.substitute_axis(k, lo)
            total += cur.eval((0,) * self.dim)
        return total

    def face_values(self, axis: int, side: str) -> list[Poly]:
        """Boundary traces: each boundary cell's polynomial pinned to the
        lo or hi face of the given axis."""
        value = self.domain.lo(axis) if side == "lo" else self.domain.hi(axis)
        which = 0 if side == "lo" else self.shape[axis] - 1
        return [self.cells[idx].substitute_axis(axis, value)
                for idx in self._indices_with(axis, which)]

    def __repr__(self):
        return (f"PiecewisePoly(dim={self.dim}, shape={self.shape}, "
                f"domain=[{[str(c) for c in self.domain.center]}±"
                f"{[str(r) for r in self.domain.radii]}])")


def ramp_1d(domain: Interval) -> PiecewisePoly:
    """max(x, 0) on a 1-d domain containing 0."""
    x = Poly.var(1, 0)
    zero = Poly.zero(1)
    if not (domain.lo(0) < 0 < domain.hi(0)):
        raise PiecewiseError("ramp needs 0 in the interior")
    return PiecewisePoly.from_cells_1d(domain, (Fraction(0),), [zero, x])


def abs_1d(domain: Interval) -> PiecewisePoly:
    x = Poly.var(1, 0)
    if not (domain.lo(0) < 0 < domain.hi(0)):
        raise PiecewiseError("abs needs 0 in the interior")
    return PiecewisePoly.from_cells_1d(domain, (Fraction(0),), [-x, x])
