"""Expression trees for parameter-dependent smooth functions.

A net here is a closed-form recipe: a tree over the coordinates, the gauge
parameter, arithmetic, a few transcendentals, a polynomial bump kernel, and
piecewise data with series coefficients.  Trees evaluate three ways: in
floats at a concrete parameter value, exactly at a rational one, and
symbolically to a gauge series when the tree permits.  Differentiation is
symbolic and stays inside the grammar; each derivative of a bump factor
spends one degree of its smoothness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .gauge import GaugeExpr
from .piecewise import Interval
from .rationals import as_fraction


class NetError(ValueError):
    pass


class Node:
    """Base class for tree nodes; concrete nodes are frozen dataclasses."""

    __slots__ = ()

    def __add__(self, other: "Node") -> "Node":
        return simplify(Sum((self, other)))

    def __sub__(self, other: "Node") -> "Node":
        return simplify(Sum((self, Prod((Const(Fraction(-1)), other)))))

    def __mul__(self, other: "Node") -> "Node":
        return simplify(Prod((self, other)))

    def __neg__(self) -> "Node":
        return simplify(Prod((Const(Fraction(-1)), self)))


@dataclass(frozen=True)
class Const(Node):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", as_fraction(self.value))


@dataclass(frozen=True)
class Var(Node):
    axis: int

    def __post_init__(self):
        if self.axis < 0:
            raise NetError("variable axis must be nonnegative")


@dataclass(frozen=True)
class RhoPow(Node):
    # the gauge parameter raised to a fixed rational power
    exponent: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exponent", as_fraction(self.exponent))


@dataclass(frozen=True)
class Sum(Node):
    children: tuple[Node, ...]


@dataclass(frozen=True)
class Prod(Node):
    children: tuple[Node, ...]


@dataclass(frozen=True)
class Sin(Node):
    child: Node


@dataclass(frozen=True)
class Cos(Node):
    child: Node


@dataclass(frozen=True)
class Exp(Node):
    child: Node


def bump_normalizer(p: int) -> Fraction:
    """Unit-mass constant for the degree-p bump (1 - u^2)^p on [-1, 1]."""
    c = Fraction(1, 2)
    for j in range(1, p + 1):
        c *= Fraction(2 * j + 1, 2 * j)
    return c


@dataclass(frozen=True)
class Bump(Node):
    """Normalized compactly supported kernel of finite smoothness.

    Evaluates to bump_normalizer(p) * (1 - u^2)^p for |u| <= 1 and to zero
    outside, where u is the child's value.  The function is p-1 times
    continuously differentiable across |u| = 1 and integrates to one.
    """

    p: int
    child: Node

    def __post_init__(self):
        if self.p < 0:
            raise NetError("bump degree must be nonnegative")


@dataclass(frozen=True)
class GaugePoly:
    """Polynomial in one coordinate whose coefficients are gauge series.

    The polynomial reads sum coeffs[k] * (x - anchor)^k; a nonzero anchor
    keeps data that naturally lives near a point compact instead of
    exploding it into powers of x.  Arithmetic requires matching anchors.
    """

    coeffs: tuple[GaugeExpr, ...]  # degree-indexed, constant term first
    anchor: Fraction = Fraction(0)

    def __post_init__(self):
        coeffs = list(self.coeffs)
        while coeffs and _expr_is_zero(coeffs[-1]):
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))
        object.__setattr__(self, "anchor", as_fraction(self.anchor))

    @staticmethod
    def zero() -> "GaugePoly":
        return GaugePoly(())

    @staticmethod
    def const(c: GaugeExpr) -> "GaugePoly":
        return GaugePoly((c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _align(self, other: "GaugePoly") -> Fraction:
        if self.anchor != other.anchor and self.coeffs and other.coeffs:
            raise NetError("anchors differ")
        return self.anchor if self.coeffs else other.anchor

    def __add__(self, other: "GaugePoly") -> "GaugePoly":
        anchor = self._align(other)
        n = max(len(self.coeffs), len(other.coeffs))
        zero = GaugeExpr.const(0)
        a = self.coeffs + (zero,) * (n - len(self.coeffs))
        b = other.coeffs + (zero,) * (n - len(other.coeffs))
        return GaugePoly(tuple(x + y for x, y in zip(a, b)), anchor)

    def __neg__(self) -> "GaugePoly":
        return GaugePoly(tuple(-c for c in self.coeffs), self.anchor)

    def __sub__(self, other: "GaugePoly") -> "GaugePoly":
        return self + (-other)

    def __mul__(self, other: "GaugePoly") -> "GaugePoly":
        if not self.coeffs or not other.coeffs:
            return GaugePoly.zero()
        anchor = self._align(other)
        out = [GaugeExpr.const(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return GaugePoly(tuple(out), anchor)

    def scale(self, c: GaugeExpr) -> "GaugePoly":
        return GaugePoly(tuple(a * c for a in self.coeffs), self.anchor)

    def eval(self, x: GaugeExpr) -> GaugeExpr:
        if self.anchor:
            x = x - GaugeExpr.const(self.anchor)
        acc = GaugeExpr.const(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float, eps: float) -> float:
        x -= float(self.anchor)
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c.eval_float(eps)
        return acc

    def derivative(self) -> "GaugePoly":
        return GaugePoly(tuple(c.scale(k)
                               for k, c in enumerate(self.coeffs) if k > 0),
                         self.anchor)

    def is_zero(self) -> bool:
        return not self.coeffs


def _expr_is_zero(e: GaugeExpr) -> bool:
    return not e.terms and e.trunc is None


@dataclass(frozen=True)
class PiecewiseGauge(Node):
    """One-dimensional piecewise polynomial whose breakpoints slide with
    the gauge parameter.

    Break i sits at breaks[i] = (b, s), meaning the point b + s*rho; the
    list must be strictly increasing in the limit of small rho, i.e. in the
    lexicographic order on (b, s).  Cell j covers the gap below break j and
    cells[-1] the gap above the last one.  Callers promise adjacent cells
    agree at their shared break, so evaluation exactly on a break may use
    either side.
    """

    domain: Interval
    breaks: tuple[tuple[Fraction, Fraction], ...]
    cells: tuple[GaugePoly, ...]

    def __post_init__(self):
        if self.domain.dim != 1:
            raise NetError("sliding-break data is one-dimensional")
        if len(self.cells) != len(self.breaks) + 1:
            raise NetError("need one more cell than breaks")
        for a, b in zip(self.breaks, self.breaks[1:]):
            if a >= b:
                raise NetError("breaks must increase")

    def cell_at(self, x: GaugeExpr) -> GaugePoly:
        lead = x.leading
        if lead is not None and lead[0] < 0:
            raise NetError("evaluation point is unbounded")
        std = dict(x.terms).get(Fraction(0), Fraction(0))
        if not (self.domain.lo(0) <= std <= self.domain.hi(0)):
            raise NetError("evaluation point outside the domain")
        for i, (b, s) in enumerate(self.breaks):
            gap = x - GaugeExpr.make([(Fraction(0), b), (Fraction(1), s)])
            if gap.sign() <= 0:
                return self.cells[i]
        return self.cells[-1]

    def cell_at_float(self, x: float, eps: float) -> GaugePoly:
        for i, (b, s) in enumerate(self.breaks):
            if x <= float(b) + float(s) * eps:
                return self.cells[i]
        return self.cells[-1]


def simplify(node: Node) -> Node:
    if isinstance(node, Sum):
        flat: list[Node] = []
        const = Fraction(0)
        for ch in map(simplify, node.children):
            if isinstance(ch, Sum):
                flat.extend(ch.children)
            elif isinstance(ch, Const):
                const += ch.value
            else:
                flat.append(ch)
        if const != 0 or not flat:
            flat.append(Const(const))
        return flat[0] if len(flat) == 1 else Sum(tuple(flat))
    if isinstance(node, Prod):
        flat = []
        const = Fraction(1)
        rho_exp = Fraction(0)
        for ch in map(simplify, node.children):
            if isinstance(ch, Prod):
                flat.extend(ch.children)
            elif isinstance(ch, Const):
                const *= ch.value
            elif isinstance(ch, RhoPow):
                rho_exp += ch.exponent
            else:
                flat.append(ch)
        if const == 0:
            return Const(Fraction(0))
        if rho_exp != 0:
            flat.insert(0, RhoPow(rho_exp))
        if const != 1 or not flat:
            flat.insert(0, Const(const))
        return flat[0] if len(flat) == 1 else Prod(tuple(flat))
    if isinstance(node, Sin):
        return Sin(simplify(node.child))
    if isinstance(node, Cos):
        return Cos(simplify(node.child))
    if isinstance(node, Exp):
        return Exp(simplify(node.child))
    if isinstance(node, Bump):
        return Bump(node.p, simplify(node.child))
    if isinstance(node, RhoPow) and node.exponent == 0:
        return Const(Fraction(1))
    return node


def arity(node: Node) -> int:
    """Number of coordinates the tree mentions (highest axis plus one)."""
    if isinstance(node, Var):
        return node.axis + 1
    if isinstance(node, (Sum, Prod)):
        return max((arity(c) for c in node.children), default=0)
    if isinstance(node, (Sin, Cos, Exp)):
        return arity(node.child)
    if isinstance(node, Bump):
        return arity(node.child)
    if isinstance(node, PiecewiseGauge):
        return 1
    return 0


def eval_float(node: Node, xs: tuple[float, ...], eps: float) -> float:
    if isinstance(node, Const):
        return float(node.value)
    if isinstance(node, Var):
        return xs[node.axis]
    if isinstance(node, RhoPow):
        return eps ** float(node.exponent)
    if isinstance(node, Sum):
        return math.fsum(eval_float(c, xs, eps) for c in node.children)
    if isinstance(node, Prod):
        out = 1.0
        for c in node.children:
            out *= eval_float(c, xs, eps)
        return out
    if isinstance(node, Sin):
        return math.sin(eval_float(node.child, xs, eps))
    if isinstance(node, Cos):
        return math.cos(eval_float(node.child, xs, eps))
    if isinstance(node, Exp):
        return math.exp(eval_float(node.child, xs, eps))
    if isinstance(node, Bump):
        u = eval_float(node.child, xs, eps)
        if abs(u) >= 1.0:
            return 0.0
        return float(bump_normalizer(node.p)) * (1.0 - u * u) ** node.p
    if isinstance(node, PiecewiseGauge):
        x = xs[0]
        return node.cell_at_float(x, eps).eval_float(x, eps)
    raise NetError(f"cannot evaluate {type(node).__name__}")


def eval_exact(node: Node, xs: tuple[Fraction, ...], eps: Fraction) -> Fraction:
    """Exact value at rational coordinates and parameter; defined only for
    trees without transcendental nodes."""
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return xs[node.axis]
    if isinstance(node, RhoPow):
        if node.exponent.denominator != 1:
            raise NetError("fractional parameter power has no exact value")
        return eps ** node.exponent.numerator
    if isinstance(node, Sum):
        return sum((eval_exact(c, xs, eps) for c in node.children),
                   Fraction(0))
    if isinstance(node, Prod):
        out = Fraction(1)
        for c in node.children:
            out *= eval_exact(c, xs, eps)
        return out
    if isinstance(node, Bump):
        u = eval_exact(node.child, xs, eps)
        if abs(u) >= 1:
            return Fraction(0)
        return bump_normalizer(node.p) * (1 - u * u) ** node.p
    if isinstance(node, PiecewiseGauge):
        # at a concrete parameter the sliding breaks are at b + s*eps
        x = xs[0]
        cell = node.cells[-1]
        for i, (b, s) in enumerate(node.breaks):
            if x <= b + s * eps:
                cell = node.cells[i]
                break
        return cell.eval(GaugeExpr.const(x)).eval_exact(eps)
    raise NetError(f"no exact value for {type(node).__name__}")


def eval_gauge(node: Node,
               xs: tuple[Union[Fraction, GaugeExpr], ...]) -> GaugeExpr:
    """Symbolic value as a series in the gauge parameter.

    Coordinates may be rationals or gauge series (generalized points).
    Raises when the tree has no series form, e.g. a sine of anything with a
    nonzero value; callers fall back to numeric sampling in that case.
    """
    pts = tuple(x if isinstance(x, GaugeExpr) else GaugeExpr.const(x)
                for x in xs)
    return _eval_gauge(node, pts)


def _eval_gauge(node: Node, xs: tuple[GaugeExpr, ...]) -> GaugeExpr:
    if isinstance(node, Const):
        return GaugeExpr.const(node.value)
    if isinstance(node, Var):
        return xs[node.axis]
    if isinstance(node, RhoPow):
        return GaugeExpr.rho(node.exponent)
    if isinstance(node, Sum):
        out = GaugeExpr.const(0)
        for c in node.children:
            out = out + _eval_gauge(c, xs)
        return out
    if isinstance(node, Prod):
        out = GaugeExpr.const(1)
        for c in node.children:
            out = out * _eval_gauge(c, xs)
        return out
    if isinstance(node, (Sin, Cos, Exp)):
        u = _eval_gauge(node.child, xs)
        if _expr_is_zero(u):
            return GaugeExpr.const(0 if isinstance(node, Sin) else 1)
        raise NetError("transcendental value is not a gauge series")
    if isinstance(node, Bump):
        u = _eval_gauge(node.child, xs)
        inside = GaugeExpr.const(1) - u * u
        if inside.sign() <= 0:
            return GaugeExpr.const(0)
        return inside.power(node.p).scale(bump_normalizer(node.p))
    if isinstance(node, PiecewiseGauge):
        return node.cell_at(xs[0]).eval(xs[0])
    raise NetError(f"no series value for {type(node).__name__}")


def derive(node: Node, axis: int) -> Node:
    """Symbolic partial derivative, staying inside the grammar.

    Differentiating a bump lowers its degree by one via
    d/du B_p(u) = -(2p+1) u B_{p-1}(u); a degree-0 bump is a jump and has
    no derivative here.
    """
    if isinstance(node, (Const, RhoPow)):
        return Const(Fraction(0))
    if isinstance(node, Var):
        return Const(Fraction(1 if node.axis == axis else 0))
    if isinstance(node, Sum):
        return simplify(Sum(tuple(derive(c, axis) for c in node.children)))
    if isinstance(node, Prod):
        parts = []
        for i, c in enumerate(node.children):
            factors = list(node.children)
            factors[i] = derive(c, axis)
            parts.append(Prod(tuple(factors)))
        return simplify(Sum(tuple(parts)))
    if isinstance(node, Sin):
        return simplify(Prod((Cos(node.child), derive(node.child, axis))))
    if isinstance(node, Cos):
        return simplify(Prod((Const(Fraction(-1)), Sin(node.child),
                              derive(node.child, axis))))
    if isinstance(node, Exp):
        return simplify(Prod((node, derive(node.child, axis))))
    if isinstance(node, Bump):
        # B_p is (p-1)-times differentiable; below p = 2 the derivative
        # would jump at the support edge
        if node.p < 2:
            raise NetError("bump smoothness exhausted")
        return simplify(Prod((Const(Fraction(-(2 * node.p + 1))),
                              node.child, Bump(node.p - 1, node.child),
                              derive(node.child, axis))))
    if isinstance(node, PiecewiseGauge):
        if axis != 0:
            return Const(Fraction(0))
        return PiecewiseGauge(node.domain, node.breaks,
                              tuple(c.derivative() for c in node.cells))
    raise NetError(f"cannot differentiate {type(node).__name__}")


def smoothness_budget(node: Node) -> Optional[int]:
    """How many classical derivatives the tree still supports per axis;
    None when unlimited."""
    if isinstance(node, Bump):
        inner = smoothness_budget(node.child)
        mine = node.p - 1
        return mine if inner is None else min(mine, inner)
    if isinstance(node, (Sum, Prod)):
        vals = [smoothness_budget(c) for c in node.children]
        vals = [v for v in vals if v is not None]
        return min(vals) if vals else None
    if isinstance(node, (Sin, Cos, Exp)):
        return smoothness_budget(node.child)
    if isinstance(node, PiecewiseGauge):
        return _sliding_break_budget(node)
    return None


def _sliding_break_budget(node: PiecewiseGauge) -> Optional[int]:
    """Cross-break smoothness: count how many successive cell derivatives
    match at every sliding break.  Matching through the top degree means
    the cells are one polynomial, hence unlimited."""
    if not node.breaks:
        return None
    cap = max((c.degree for c in node.cells), default=0)
    pts = [GaugeExpr.make([(Fraction(0), b), (Fraction(1), s)])
           for b, s in node.breaks]
    cells = list(node.cells)
    for m in range(cap + 1):
        for pt, left, right in zip(pts, cells, cells[1:]):
            if left.eval(pt) != right.eval(pt):
                # a mismatch at level m kills the m-th classical
                # derivative; a plain jump leaves none at all
                return max(m - 1, 0)
        cells = [c.derivative() for c in cells]
    return None


# -- numeric estimates over a compact box ------------------------------------

def grid_points(box: Interval, per_axis: int) -> list[tuple[float, ...]]:
    axes = []
    for k in range(box.dim):
        lo, hi = float(box.lo(k)), float(box.hi(k))
        axes.append([lo + (hi - lo) * i / (per_axis - 1)
                     for i in range(per_axis)])
    pts = [()]
    for axis in axes:
        pts = [p + (v,) for p in pts for v in axis]
    return pts


def max_on_grid(node: Node, box: Interval, eps: float,
                per_axis: int = 17) -> float:
    out = 0.0
    for p in grid_points(box, per_axis):
        try:
            out = max(out, abs(eval_float(node, p, eps)))
        except OverflowError:
            return math.inf
    return out


def decay_lower_bound(node: Node, box: Interval, schedule: list[float],
                      per_axis: int = 9) -> float:
    """Conservative estimate of the decay order of sup |node| on the box.

    Returns the minimum pairwise slope of log max-value against log
    parameter over schedule points where the max is a positive float;
    values that underflow to zero end the scan.  math.inf means the
    function was below float range at nearly every parameter.
    """
    pts = []
    for eps in sorted(schedule, reverse=True):
        v = max_on_grid(node, box, eps, per_axis)
        if not math.isfinite(v):
            return -math.inf
        if v == 0.0:
            break
        pts.append((math.log(eps), math.log(v)))
    if len(pts) < 2:
        return math.inf
    slopes = [(y2 - y1) / (x2 - x1)
              for (x1, y1), (x2, y2) in zip(pts, pts[1:])]
    return min(slopes)
