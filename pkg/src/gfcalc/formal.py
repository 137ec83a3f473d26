"""Finite-order distributions as derivatives of continuous functions.

A formal distribution on an open box is a pair (order, rep): a multi-index
and a continuous piecewise polynomial, read as the order-th distributional
derivative of the representative.  Two pairs describe the same distribution
when, after integrating both representatives up to a common order m, the
difference lies in the degenerate space P_m: sums of per-axis polynomials of
degree below m_k whose coefficients do not depend on that axis.

Membership in P_m is decided by an annihilator: order-m_k divided
differences taken along every axis with m_k > 0 kill exactly the degenerate
functions.  The test grid per axis collects all breakpoints plus
degree + m_k + 2 equispaced rationals in each cell, which is dense enough
that vanishing on the grid forces identical vanishing.  Single-cell inputs
take a monomial shortcut.  Everything is exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .piecewise import (Interval, PiecewiseError, PiecewisePoly, mi, mi_add,
                        mi_le, mi_max, mi_sub, unit_index)
from .poly import Poly
from .rationals import as_fraction


class DistributionError(ValueError):
    pass


@dataclass(frozen=True)
class FormalDistribution:
    order: tuple[int, ...]
    rep: PiecewisePoly

    def __post_init__(self):
        object.__setattr__(self, "order", mi(self.order))
        if len(self.order) != self.rep.dim:
            raise DistributionError("order length must match the dimension")

    @property
    def domain(self) -> Interval:
        return self.rep.domain

    @property
    def dim(self) -> int:
        return self.rep.dim


# -- construction and module operations -------------------------------------

def fd_lambda(f: PiecewisePoly) -> FormalDistribution:
    """A continuous function viewed as a distribution of order zero."""
    return FormalDistribution((0,) * f.dim, f)


def fd_derive(t: FormalDistribution, axis: int) -> FormalDistribution:
    return FormalDistribution(mi_add(t.order, unit_index(t.dim, axis)), t.rep)


def fd_derive_multi(t: FormalDistribution, beta) -> FormalDistribution:
    return FormalDistribution(mi_add(t.order, mi(beta)), t.rep)


def fd_raise(t: FormalDistribution, target) -> FormalDistribution:
    """Rewrite with a higher order by integrating the representative."""
    target = mi(target)
    if not mi_le(t.order, target):
        raise DistributionError(f"cannot raise order {t.order} to {target}")
    return FormalDistribution(target, t.rep.primitive_multi(mi_sub(target, t.order)))

def fd_add(t: FormalDistribution, s: FormalDistribution) -> FormalDistribution:
    if t.domain != s.domain:
        raise DistributionError("cannot add distributions on different domains")
    m = mi_max(t.order, s.order)
    return FormalDistribution(m, fd_raise(t, m).rep + fd_raise(s, m).rep)


def fd_scale(t: FormalDistribution, mu) -> FormalDistribution:
    return FormalDistribution(t.order, t.rep.scale(as_fraction(mu)))


def fd_restrict(t: FormalDistribution, sub: Interval) -> FormalDistribution:
    return FormalDistribution(t.order, t.rep.restrict(sub))


# -- smoothness of representatives ------------------------------------------

def c_alpha_member(f: PiecewisePoly, alpha) -> bool:
    """Iterated one-axis smoothness: f is C^alpha when for each axis with
    alpha_k > 0 the axis derivative exists (continuously) and is itself
    C^(alpha - e_k)."""
    alpha = mi(alpha)
    for k, a in enumerate(alpha):
        if a == 0:
            continue
        try:
            g = f.partial(k)
        except PiecewiseError:
            return False
        if not c_alpha_member(g, mi_sub(alpha, unit_index(f.dim, k))):
            return False
    return True


# -- the degenerate space P_m ------------------------------------------------

def monomial_pm_member(p: Poly, m) -> bool:
    """Single polynomial: degenerate iff no monomial dominates m componentwise."""
    m = mi(m)
    if all(x == 0 for x in m):
        return p.is_zero
    return not any(mi_le(m, e) for e in p.terms)


def _axis_grid(h: PiecewisePoly, axis: int, order: int) -> list[Fraction]:
    deg = max(max(p.degree(axis) for p in h.cells.values()), 0)
    count = deg + order + 2
    pts: set[Fraction] = set(h.breaks[axis])
    edges = h.edges(axis)
    for lo, hi in zip(edges, edges[1:]):
        step = (hi - lo) / (count - 1)
        pts.update(lo + step * i for i in range(count))
    return sorted(pts)


def _apply_window_differences(values: dict, lens: list[int], axis: int,
                              order: int, grid: list[Fraction]) -> dict:
    """Replace axis indices by sliding windows of order-th divided
    differences over consecutive grid nodes."""
    nwin = lens[axis] - order
    weights = []
    for w in range(nwin):
        nodes = grid[w:w + order + 1]
        ws = []
        for i, ti in enumerate(nodes):
            denom = Fraction(1)
            for j, tj in enumerate(nodes):
                if i != j:
                    denom *= ti - tj
            ws.append(1 / denom)
        weights.append(ws)
    out = {}
    ranges = [range(n) for n in lens]
    ranges[axis] = range(nwin)
    for idx in product(*ranges):
        total = Fraction(0)
        base = list(idx)
        for i, wgt in enumerate(weights[idx[axis]]):
            base[axis] = idx[axis] + i
            total += wgt * values[tuple(base)]
        out[idx] = total
    lens[axis] = nwin
    return out


def divided_difference_pm_member(h: PiecewisePoly, m) -> bool:
    """Annihilator decision on the canonical grid.

    Vanishing of all consecutive-window composites is equivalent to
    vanishing for arbitrary node tuples drawn from the grid: windowed
    differences force grid-wise agreement with a low-degree polynomial,
    which every higher difference then kills.
    """
    m = mi(m)
    if all(x == 0 for x in m):
        return h.is_zero
    grids = [_axis_grid(h, k, m[k]) for k in range(h.dim)]
    lens = [len(g) for g in grids]
    values = _tabulate(h, grids)
    for axis in range(h.dim):
        if m[axis] > 0:
            values = _apply_window_differences(values, lens, axis, m[axis],
                                               grids[axis])
    return all(v == 0 for v in values.values())


def _tabulate(h: PiecewisePoly, grids) -> dict[tuple[int, ...], Fraction]:
    """Exact values of h on the tensor grid, by axiswise substitution.

    Grid points on a breakpoint may use either neighboring cell; validated
    continuity makes the value identical.
    """
    import bisect as _bisect

    n = h.dim
    bands = [
        [min(_bisect.bisect_right(h.breaks[k], g), h.shape[k] - 1) for g in grids[k]]
        for k in range(n)
    ]
    values: dict[tuple[int, ...], Fraction] = {}

    def rec(axis: int, polymap: dict, prefix: tuple[int, ...]):
        if axis == n:
            p = polymap[()]
            values[prefix] = p.terms.get((0,) * n, Fraction(0))
            return
        for gi, g in enumerate(grids[axis]):
            band = bands[axis][gi]
            sub = {key[1:]: p.substitute_axis(axis, g)
                   for key, p in polymap.items() if key[0] == band}
            rec(axis + 1, sub, prefix + (gi,))

    rec(0, dict(h.cells), ())
    return values


def pm_member(h: PiecewisePoly, m) -> bool:
    """Membership of a continuous piecewise polynomial in P_m."""
    m = mi(m)
    if all(s == 1 for s in h.shape):
        return monomial_pm_member(h.cells[(0,) * h.dim], m)
    return divided_difference_pm_member(h, m)


# -- equality and pairing ----------------------------------------------------

def fd_equal(t: FormalDistribution, s: FormalDistribution) -> bool:
    """Same distribution: raise to the common order, difference degenerate."""
    if t.domain != s.domain:
        raise DistributionError("equality needs a common domain")
    m = mi_max(t.order, s.order)
    h = fd_raise(t, m).rep - fd_raise(s, m).rep
    return pm_member(h, m)


def fd_pair(t: FormalDistribution, phi: PiecewisePoly) -> Fraction:
    """Exact action on a compatible test function.

    The test function must be C^order with every derivative of strictly
    smaller axis order vanishing on the boundary, so that integrating by
    parts order-many times produces no boundary terms.
    """
    if phi.domain != t.domain:
        raise DistributionError("test function lives on a different domain")
    alpha = t.order
    if not c_alpha_member(phi, alpha):
        raise DistributionError("test function is not smooth enough to pair")
    for k, a in enumerate(alpha):
        d = phi
        for j in range(a):
            for side in ("lo", "hi"):
                if not all(tr.is_zero for tr in d.face_values(k, side)):
                    raise DistributionError(
                        f"derivative {j} does not vanish on the axis-{k} "
                        f"{side} face; integration by parts is invalid")
            d = d.partial(k)
    dphi = phi
    for k, a in enumerate(alpha):
        for _ in range(a):
            dphi = dphi.partial(k)
    sign = -1 if sum(alpha) % 2 else 1
    return sign * (t.rep * dphi).integral()
