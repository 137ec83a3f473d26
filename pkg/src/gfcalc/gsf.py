"""Generalized smooth functions: nets with domains, certificates, and the
mollification that carries a distribution into the algebra.

The embedding is computed in closed form.  Convolving a piecewise
polynomial against a derivative of the polynomial bump kernel, at kernel
width equal to the gauge parameter, lands back in piecewise data whose
breakpoints slide with the parameter and whose coefficients are exact
Laurent-style gauge series.  No quadrature is involved anywhere; the only
inexact answers in this module are the sampling-based verdicts, and those
say so.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Optional, Sequence, Union

from .formal import FormalDistribution, fd_derive
from .gauge import (CANONICAL_GAUGE, DEFAULT_SCHEDULE, Gauge, GaugeExpr,
                    GeneralizedNumber, UndeterminedError, Verdict,
                    _moderate_samples)
from .nets import (Bump, Const, Cos, Exp, GaugePoly, NetError, Node,
                   PiecewiseGauge, Prod, RhoPow, Sin, Sum, Var,
                   bump_normalizer, decay_lower_bound, derive, eval_float,
                   eval_gauge, max_on_grid, simplify, smoothness_budget)
from .piecewise import Interval, PiecewisePoly
from .poly import Poly
from .rationals import as_fraction

NEGLIGIBLE_DECADES = 10.0
DEFAULT_KERNEL_DEGREE = 8
CLASS_EQUAL_EPS = (Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10000))


class GSFError(ValueError):
    pass


@dataclass(frozen=True)
class GeneralizedPoint:
    """Point with gauge-series coordinates."""

    coords: tuple[GaugeExpr, ...]

    @staticmethod
    def make(values: Sequence[Union[GaugeExpr, Fraction, int, str]]
             ) -> "GeneralizedPoint":
        return GeneralizedPoint(tuple(
            v if isinstance(v, GaugeExpr) else GaugeExpr.const(as_fraction(v))
            for v in values))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def floats(self, eps: float) -> tuple[float, ...]:
        return tuple(c.eval_float(eps) for c in self.coords)

    def standard_part(self) -> tuple[Fraction, ...]:
        out = []
        for c in self.coords:
            lead = c.leading
            if lead is not None and lead[0] < 0:
                raise GSFError("coordinate is unbounded")
            out.append(dict(c.terms).get(Fraction(0), Fraction(0)))
        return tuple(out)


@dataclass(frozen=True)
class SharpBall:
    """Open box membership read in the sharp order: strictly inside means
    the slack has positive sign as a gauge series."""

    box: Interval

    @property
    def dim(self) -> int:
        return self.box.dim

    def contains(self, pt: GeneralizedPoint) -> bool:
        if pt.dim != self.dim:
            raise GSFError("point dimension mismatch")
        try:
            for k, c in enumerate(pt.coords):
                gap = c - GaugeExpr.const(self.box.center[k])
                slack = GaugeExpr.const(self.box.radii[k]) - gap.abs()
                if slack.sign() <= 0:
                    return False
        except UndeterminedError as exc:
            raise GSFError("membership is undetermined at this truncation") \
                from exc
        return True

    def contains_near_standard(self, pt: GeneralizedPoint) -> bool:
        """Standard part strictly inside; the compactly supported points."""
        try:
            std = pt.standard_part()
        except GSFError:
            return False
        return all(abs(std[k] - self.box.center[k]) < self.box.radii[k]
                   for k in range(self.dim))


@dataclass(frozen=True)
class GSFunction:
    """A net of smooth functions on a sharp domain.

    Certificates (moderateness and friends) are memoized on the instance;
    the cache is the one mutable corner and is guarded by a lock.
    """

    net: Node
    domain: SharpBall
    gauge: Gauge = CANONICAL_GAUGE
    _certs: dict = field(default_factory=dict, compare=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock,
                                  compare=False, repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def budget(self) -> Optional[int]:
        with self._lock:
            if "budget" in self._certs:
                return self._certs["budget"]
        out = smoothness_budget(self.net)
        with self._lock:
            self._certs.setdefault("budget", out)
            return self._certs["budget"]


def gsf_from_poly(pp: PiecewisePoly) -> GSFunction:
    """Wrap an unparameterized piecewise polynomial as a constant net."""
    if pp.dim != 1:
        raise GSFError("only one-dimensional wrapping is supported")
    cells = tuple(_gauge_poly_from_poly(pp.cells[(i,)])
                  for i in range(len(pp.breaks[0]) + 1))
    net = PiecewiseGauge(pp.domain,
                         tuple((b, Fraction(0)) for b in pp.breaks[0]), cells)
    return GSFunction(net, SharpBall(pp.domain))


def _gauge_poly_from_poly(p: Poly) -> GaugePoly:
    deg = p.degree(0)
    coeffs = [GaugeExpr.const(p.terms.get((k,), Fraction(0)))
              for k in range(deg + 1)]
    return GaugePoly(tuple(coeffs))


def gsf_eval(f: GSFunction, pt: GeneralizedPoint) -> GeneralizedNumber:
    """Value at a generalized point: a symbolic series when the net has
    one, otherwise an opaque net of floats."""
    if not f.domain.contains(pt):
        raise GSFError("point is not sharply inside the domain")
    try:
        body = eval_gauge(f.net, pt.coords)
        return GeneralizedNumber(body, f.gauge)
    except (NetError, UndeterminedError):
        pass
    net = f.net
    coords = pt.coords

    def evaluator(eps: float) -> float:
        return eval_float(net, tuple(c.eval_float(eps) for c in coords), eps)

    return GeneralizedNumber.from_net(evaluator, f.gauge)


def gsf_derive(f: GSFunction, axis: int = 0) -> GSFunction:
    budget = f.budget()
    if budget is not None and budget < 1:
        raise GSFError("smoothness budget exhausted")
    with f._lock:
        hit = f._certs.get(("derive", axis))
    if hit is not None:
        return hit
    out = GSFunction(derive(f.net, axis), f.domain, f.gauge)
    # each derivative spends one degree of cross-break smoothness
    out._certs["budget"] = None if budget is None else budget - 1
    with f._lock:
        f._certs.setdefault(("derive", axis), out)
        return f._certs[("derive", axis)]


def gsf_add(f: GSFunction, g: GSFunction) -> GSFunction:
    _same_domain(f, g)
    return GSFunction(f.net + g.net, f.domain, f.gauge)


def gsf_mul(f: GSFunction, g: GSFunction) -> GSFunction:
    _same_domain(f, g)
    return GSFunction(f.net * g.net, f.domain, f.gauge)


def gsf_scale(f: GSFunction, c) -> GSFunction:
    return GSFunction(f.net * Const(as_fraction(c)), f.domain, f.gauge)


def _same_domain(f: GSFunction, g: GSFunction) -> None:
    if f.domain != g.domain:
        raise GSFError("domains differ")
    if f.gauge != g.gauge:
        raise GSFError("gauges differ")


# -- certificates ------------------------------------------------------------

def certify_moderate(f: GSFunction) -> Verdict:
    """Growth certificate for sup |f| over the closed domain box.

    Exact interval arithmetic over the tree when possible; otherwise a
    grid-sampled bound search, labeled as such.
    """
    with f._lock:
        if "moderate" in f._certs:
            return f._certs["moderate"]
    exact = _exact_growth_bound(f.net, f.domain.box)
    if exact is not None:
        expo, size = exact
        n = max(0, math.ceil(-expo))
        verdict = Verdict("yes", bound=n, exact=True,
                          note=f"sup bound {float(size):.3g} * rho^{expo}")
    else:
        rhos = [f.gauge.rho_float(e) for e in DEFAULT_SCHEDULE]
        values = [max_on_grid(f.net, f.domain.box, r, per_axis=9)
                  for r in rhos]
        verdict = _moderate_samples(values, rhos)
    with f._lock:
        f._certs.setdefault("moderate", verdict)
        return f._certs["moderate"]


def _exact_growth_bound(node: Node, box: Interval
                        ) -> Optional[tuple[Fraction, Fraction]]:
    """Bound |node| <= size * rho^expo on the box for rho <= 1, exactly.
    None when the tree resists (unbounded exponentials, truncated data)."""
    if isinstance(node, Const):
        return (Fraction(0), abs(node.value))
    if isinstance(node, Var):
        k = node.axis
        if k >= box.dim:
            raise GSFError("tree mentions an axis outside the domain")
        return (Fraction(0), max(abs(box.lo(k)), abs(box.hi(k))))
    if isinstance(node, RhoPow):
        return (min(node.exponent, Fraction(0)), Fraction(1))
    if isinstance(node, Sum):
        parts = [_exact_growth_bound(c, box) for c in node.children]
        if any(p is None for p in parts):
            return None
        return (min(e for e, _ in parts), sum(s for _, s in parts))
    if isinstance(node, Prod):
        expo, size = Fraction(0), Fraction(1)
        for c in node.children:
            part = _exact_growth_bound(c, box)
            if part is None:
                return None
            expo, size = expo + part[0], size * part[1]
        return (expo, size)
    if isinstance(node, (Sin, Cos)):
        return (Fraction(0), Fraction(1))
    if isinstance(node, Bump):
        return (Fraction(0), bump_normalizer(node.p))
    if isinstance(node, Exp):
        inner = _exact_growth_bound(node.child, box)
        if inner is None or inner[0] < 0 or inner[1] > 700:
            return None
        return (Fraction(0), Fraction(math.ceil(math.exp(float(inner[1])))))
    if isinstance(node, PiecewiseGauge):
        m = max(abs(box.lo(0)), abs(box.hi(0)))
        expo, size = None, Fraction(0)
        for cell in node.cells:
            mm = m + abs(cell.anchor)
            for k, coeff in enumerate(cell.coeffs):
                if coeff.trunc is not None:
                    return None
                if not coeff.terms:
                    continue
                ce = min(min(e for e, _ in coeff.terms), Fraction(0))
                cs = sum(abs(c) for _, c in coeff.terms) * mm**k
                expo = ce if expo is None else min(expo, ce)
                size += cs
        if expo is None:
            expo = Fraction(0)
        return (expo, size)
    return None


def certify_negligible(f: GSFunction) -> Verdict:
    """Decay certificate for sup |f| over the closed domain box."""
    if _net_is_zero(f.net):
        return Verdict("yes", exact=True, note="identically zero")
    witness = _exact_persistent_witness(f.net)
    if witness is not None:
        return Verdict("no", exact=True, note=witness)
    lb = decay_lower_bound(f.net, f.domain.box,
                           [f.gauge.rho_float(e) for e in DEFAULT_SCHEDULE])
    if lb >= NEGLIGIBLE_DECADES:
        return Verdict("yes", exact=False,
                       note=f"sampled decay order at least {lb:.1f}")
    return Verdict("no", exact=False,
                   note=f"sampled decay order only {lb:.1f}")


def _net_is_zero(node: Node) -> bool:
    node = simplify(node)
    if isinstance(node, Const):
        return node.value == 0
    if isinstance(node, PiecewiseGauge):
        return all(c.is_zero() for c in node.cells)
    return False


def _exact_persistent_witness(node: Node) -> Optional[str]:
    """A reason the net cannot be negligible: a cell of fixed positive
    width carrying an exact nonzero polynomial.  Shrinking cells and
    non-piecewise trees yield None (undecided here)."""
    if not isinstance(node, PiecewiseGauge):
        return None
    edges = ([(node.domain.lo(0), Fraction(0))] + list(node.breaks)
             + [(node.domain.hi(0), Fraction(0))])
    for i, cell in enumerate(node.cells):
        lo, hi = edges[i], edges[i + 1]
        if lo[0] >= hi[0]:
            continue  # width shrinks with the parameter
        if cell.is_zero():
            continue
        if any(c.trunc is not None for c in cell.coeffs):
            return None
        lead = min(min(e for e, _ in c.terms)
                   for c in cell.coeffs if c.terms)
        return (f"nonzero on ({lo[0]},{hi[0]}) with leading order {lead}")
    return None


# -- class equality ----------------------------------------------------------

def class_equal(f: GSFunction, g: GSFunction,
                eps_list: Sequence[Fraction] = CLASS_EQUAL_EPS) -> Verdict:
    """Do two nets present the same class, i.e. is their difference
    negligible on every fixed compact inside the domain?

    Decided exactly when the data allows; otherwise by exact comparison of
    the instantiated functions at the sampled parameters on a
    parameter-shrunk interior, and failing that by a decay probe.
    """
    _same_domain(f, g)
    if f.net == g.net:
        return Verdict("yes", exact=True, note="identical nets")
    if isinstance(f.net, PiecewiseGauge) and isinstance(g.net, PiecewiseGauge) \
            and f.net.breaks == g.net.breaks:
        try:
            diff_cells = tuple(a - b for a, b in zip(f.net.cells, g.net.cells))
        except NetError:
            diff_cells = None  # cells centered differently, compare by value
        if diff_cells is not None:
            diff = PiecewiseGauge(f.net.domain, f.net.breaks, diff_cells)
            if all(c.is_zero() for c in diff_cells):
                return Verdict("yes", exact=True,
                               note="identical piecewise data")
            witness = _exact_persistent_witness(diff)
            if witness is not None:
                return Verdict("no", exact=True, note=witness)
    try:
        results = []
        for eps in eps_list:
            a = piecewise_at_eps(f, eps)
            b = piecewise_at_eps(g, eps)
            inner = _shrunk(f.domain.box, eps)
            results.append(a.restrict(inner).equal_function(b.restrict(inner)))
        if all(results):
            return Verdict("yes", exact=False,
                           note="exact interior agreement at sampled "
                                "parameters")
        return Verdict("no", exact=False,
                       note="interior disagreement at a sampled parameter")
    except GSFError:
        pass
    d = f.net - g.net
    h = GSFunction(d, f.domain, f.gauge)
    verdict = certify_negligible(h)
    return Verdict(verdict.kind, exact=False, note=verdict.note)


def _shrunk(box: Interval, margin: Fraction) -> Interval:
    radii = tuple(r - margin for r in box.radii)
    if any(r <= 0 for r in radii):
        raise GSFError("margin swallows the domain")
    return Interval(box.center, radii)


# -- instantiation -----------------------------------------------------------

def piecewise_at_eps(f: GSFunction, eps: Fraction) -> PiecewisePoly:
    """The concrete representative at one rational parameter value, as an
    exact piecewise polynomial.  Memoized per instance."""
    eps = as_fraction(eps)
    with f._lock:
        hit = f._certs.get(("instantiated", eps))
    if hit is not None:
        if isinstance(hit, GSFError):
            raise hit
        return hit
    try:
        out = _instantiate(f, eps)
    except GSFError as exc:
        with f._lock:
            f._certs.setdefault(("instantiated", eps), exc)
        raise
    with f._lock:
        f._certs.setdefault(("instantiated", eps), out)
        return f._certs[("instantiated", eps)]


def _instantiate(f: GSFunction, eps: Fraction) -> PiecewisePoly:
    node = simplify(f.net)
    box = f.domain.box
    if isinstance(node, PiecewiseGauge):
        breaks = []
        for b, s in node.breaks:
            pos = b + s * eps
            if not box.lo(0) < pos < box.hi(0):
                raise GSFError("parameter too large for the break layout")
            breaks.append(pos)
        if any(x >= y for x, y in zip(breaks, breaks[1:])):
            raise GSFError("parameter too large for the break layout")
        cells = [_poly_at_eps(c, eps) for c in node.cells]
        return PiecewisePoly.from_cells_1d(box, tuple(breaks), cells)
    poly = _tree_poly_at_eps(node, eps)
    if poly is None:
        raise GSFError("net has no exact piecewise form")
    return PiecewisePoly.from_poly(box, poly)


def _poly_at_eps(gp: GaugePoly, eps: Fraction) -> Poly:
    out = Poly(1, {(k,): c.eval_exact(eps)
                   for k, c in enumerate(gp.coeffs)})
    if gp.anchor:
        out = out.compose_axis_affine(0, 1, -gp.anchor)
    return out


def _tree_poly_at_eps(node: Node, eps: Fraction) -> Optional[Poly]:
    if isinstance(node, Const):
        return Poly.const(1, node.value)
    if isinstance(node, Var):
        if node.axis != 0:
            return None
        return Poly.var(1, 0)
    if isinstance(node, RhoPow):
        if node.exponent.denominator != 1:
            return None
        return Poly.const(1, eps ** node.exponent.numerator)
    if isinstance(node, Sum):
        total = Poly.zero(1)
        for c in node.children:
            part = _tree_poly_at_eps(c, eps)
            if part is None:
                return None
            total = total + part
        return total
    if isinstance(node, Prod):
        total = Poly.const(1, Fraction(1))
        for c in node.children:
            part = _tree_poly_at_eps(c, eps)
            if part is None:
                return None
            total = total * part
        return total
    return None


# -- the embedding -----------------------------------------------------------

_EMBED_CACHE: dict = {}
_EMBED_CACHE_LOCK = threading.Lock()
_EMBED_CACHE_CAP = 512


def embed_distribution(t: FormalDistribution,
                       kernel_degree: int = DEFAULT_KERNEL_DEGREE
                       ) -> GSFunction:
    """Mollify a formal distribution into the algebra, in closed form.

    The representative at parameter value s is the convolution of the
    (constantly extended) continuous representative against the order-th
    derivative of the degree-p bump at width s, divided by s^order.  The
    result is piecewise data: breakpoints sit at the old ones shifted by
    -s and +s, coefficients are exact Laurent series in s.  Results are
    cached by content; repeated embeddings share certificates.
    """
    key = (t, kernel_degree)
    with _EMBED_CACHE_LOCK:
        hit = _EMBED_CACHE.get(key)
    if hit is not None:
        return hit
    out = _embed_uncached(t, kernel_degree)
    with _EMBED_CACHE_LOCK:
        if len(_EMBED_CACHE) >= _EMBED_CACHE_CAP:
            _EMBED_CACHE.clear()
        _EMBED_CACHE.setdefault(key, out)
        return _EMBED_CACHE[key]


def _embed_uncached(t: FormalDistribution, kernel_degree: int) -> GSFunction:
    if t.dim != 1:
        raise GSFError("embedding is implemented for one dimension")
    a = t.order[0]
    p = kernel_degree
    if a > p - 1:
        raise GSFError(
            f"order {a} exceeds what a degree-{p} kernel can absorb")
    f = t.rep
    box = f.domain
    lo, hi = box.lo(0), box.hi(0)
    kernel = _bump_poly(p)
    for _ in range(a):
        kernel = kernel.partial(0)
    gammas = [lo] + list(f.breaks[0]) + [hi]
    inner = [f.cells[(i,)] for i in range(len(f.breaks[0]) + 1)]
    ext = ([Poly.const(1, f.eval((lo,)))] + inner
           + [Poly.const(1, f.eval((hi,)))])
    # ext[j] is the valid piece strictly below gammas[j] .. above gammas[j-1]
    breaks: list[tuple[Fraction, Fraction]] = []
    cells: list[GaugePoly] = []
    for j, gamma in enumerate(gammas):
        if j == 0:
            breaks.append((gamma, Fraction(1)))
        elif j == len(gammas) - 1:
            breaks.append((gamma, Fraction(-1)))
        else:
            breaks.append((gamma, Fraction(-1)))
            breaks.append((gamma, Fraction(1)))
        # work in the coordinate centered at gamma so the kernel-window
        # substitution u = y/s stays a monomial relabeling
        below = ext[j].compose_axis_affine(0, 1, gamma)
        above = ext[j + 1].compose_axis_affine(0, 1, gamma)
        crossing = _xs_add(_conv_full(above, kernel, a),
                           _cross_extra(below - above, kernel, a))
        cells.append(_xs_to_gauge_poly(crossing, gamma))
        if j < len(gammas) - 1:
            cells.append(_xs_to_gauge_poly(_conv_full(ext[j + 1], kernel, a)))
    breaks_sorted = sorted(breaks)
    if breaks_sorted != breaks:
        raise GSFError("representative breakpoints are out of order")
    net = PiecewiseGauge(box, tuple(breaks), tuple(cells))
    return GSFunction(net, SharpBall(box))


def _bump_poly(p: int) -> Poly:
    base = Poly(1, {(0,): Fraction(1), (2,): Fraction(-1)})
    out = Poly.const(1, bump_normalizer(p))
    for _ in range(p):
        out = out * base
    return out


# The little Laurent workspace: {(x_power, s_power): coefficient}.

def _xs_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for key, c in b.items():
        out[key] = out.get(key, Fraction(0)) + c
    return {k: c for k, c in out.items() if c != 0}


def _shifted_upoly(p: Poly) -> list[dict]:
    """p(x - s*u) as a u-polynomial with Laurent-workspace coefficients."""
    deg = max((e[0] for e in p.terms), default=0)
    out: list[dict] = [{} for _ in range(deg + 1)]
    for (k,), c in p.terms.items():
        for j in range(k + 1):
            coeff = c * comb(k, j) * (-1) ** j
            out[j] = _xs_add(out[j], {(k - j, j): coeff})
    return out


def _u_mul_poly(upoly: list[dict], q: Poly) -> list[dict]:
    qdeg = max((e[0] for e in q.terms), default=0)
    out: list[dict] = [{} for _ in range(len(upoly) + qdeg)]
    for j, xs in enumerate(upoly):
        if not xs:
            continue
        for (e,), c in q.terms.items():
            out[j + e] = _xs_add(out[j + e],
                                 {k: v * c for k, v in xs.items()})
    return out


def _u_antiderivative(upoly: list[dict]) -> list[dict]:
    out: list[dict] = [{}]
    for j, xs in enumerate(upoly):
        out.append({k: v / (j + 1) for k, v in xs.items()})
    return out


def _u_eval_int(upoly: list[dict], u0: int) -> dict:
    total: dict = {}
    for j, xs in enumerate(upoly):
        total = _xs_add(total, {k: v * u0 ** j for k, v in xs.items()})
    return total


def _u_eval_crossing(upoly: list[dict]) -> dict:
    # substitute u = y/s in the coordinate centered at the breakpoint:
    # each u^j just shifts workspace keys, no products appear
    total: dict = {}
    for j, xs in enumerate(upoly):
        if not xs:
            continue
        total = _xs_add(total, {(y + j, s - j): c for (y, s), c in xs.items()})
    return total


def _xs_scale_s(xs: dict, d: int) -> dict:
    return {(x, s + d): c for (x, s), c in xs.items()}


def _conv_full(p: Poly, kernel: Poly, a: int) -> dict:
    w = _u_antiderivative(_u_mul_poly(_shifted_upoly(p), kernel))
    xs = _xs_add(_u_eval_int(w, 1),
                 {k: -v for k, v in _u_eval_int(w, -1).items()})
    return _xs_scale_s(xs, -a)


def _cross_extra(d: Poly, kernel: Poly, a: int) -> dict:
    w = _u_antiderivative(_u_mul_poly(_shifted_upoly(d), kernel))
    xs = _xs_add(_u_eval_int(w, 1),
                 {k: -v for k, v in _u_eval_crossing(w).items()})
    return _xs_scale_s(xs, -a)


def _xs_to_gauge_poly(xs: dict, anchor=Fraction(0)) -> GaugePoly:
    by_x: dict[int, list] = {}
    for (x, s), c in xs.items():
        by_x.setdefault(x, []).append((Fraction(s), c))
    top = max(by_x, default=-1)
    coeffs = [GaugeExpr.make(by_x.get(k, [])) for k in range(top + 1)]
    return GaugePoly(tuple(coeffs), anchor)


# -- pairing and perturbation ------------------------------------------------

def pair_at_eps(f: GSFunction, phi: PiecewisePoly, eps: Fraction) -> Fraction:
    """Exact integral of the instantiated representative against a test
    function over the domain."""
    rep = piecewise_at_eps(f, eps)
    return (rep * phi).integral()


def negligible_perturbation(dim: int = 1, amplitude=1, phase=0) -> Node:
    """A nonzero net that is negligible with all derivatives: a flat
    exponential factor times a smooth oscillation."""
    angle: Node = Sum(tuple(Var(k) for k in range(dim)))
    if as_fraction(phase) != 0:
        angle = angle + Const(as_fraction(phase))
    flat = Exp(Prod((Const(Fraction(-1)), RhoPow(Fraction(-1)))))
    return simplify(Prod((Const(as_fraction(amplitude)), flat, Sin(angle))))
