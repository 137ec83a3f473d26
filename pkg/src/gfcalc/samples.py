"""Deterministic generators for desk-scale objects.

Randomized law checks and the enumeration the morphism builder walks both
come from here, so tests, the CLI, and the checker agree on what a "random
section" or "the enumerated sections" mean.  Everything is driven by an
explicit ``random.Random`` so seeds reproduce runs exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product

from .formal import FormalDistribution, fd_raise
from .gauge import GaugeExpr
from .piecewise import Interval, PiecewisePoly
from .poly import Poly

COEFF_POOL = [Fraction(n, d) for n in range(-4, 5) for d in (1, 2, 3)]


def random_fraction(rng: random.Random) -> Fraction:
    return rng.choice(COEFF_POOL)


def random_poly(rng: random.Random, nvars: int, max_degree: int,
                max_terms: int = 4) -> Poly:
    terms = {}
    for _ in range(rng.randrange(1, max_terms + 1)):
        expo = [0] * nvars
        budget = max_degree
        for k in range(nvars):
            expo[k] = rng.randrange(0, budget + 1)
            budget -= expo[k]
        terms[tuple(expo)] = random_fraction(rng)
    return Poly(nvars, terms)


def random_breaks(rng: random.Random, lo: Fraction, hi: Fraction,
                  max_breaks: int) -> list[Fraction]:
    n = rng.randrange(0, max_breaks + 1)
    denom = 8
    cand = sorted({lo + (hi - lo) * Fraction(rng.randrange(1, denom), denom)
                   for _ in range(n)})
    return [b for b in cand if lo < b < hi]


def random_pp_1d(rng: random.Random, domain: Interval, max_breaks: int = 3,
                 max_degree: int = 3) -> PiecewisePoly:
    """Continuous by construction: each cell adds a multiple of (x - b) on
    top of its left neighbor."""
    breaks = random_breaks(rng, domain.lo(0), domain.hi(0), max_breaks)
    poly = random_poly(rng, 1, max_degree)
    polys = [poly]
    for b in breaks:
        bump = random_poly(rng, 1, max_degree - 1) * \
            Poly(1, {(1,): Fraction(1), (0,): -Fraction(b)})
        poly = poly + bump
        polys.append(poly)
    return PiecewisePoly.from_cells_1d(domain, tuple(breaks), polys)


def random_c1_pp_1d(rng: random.Random, domain: Interval,
                    max_breaks: int = 3, max_degree: int = 3) -> PiecewisePoly:
    """A continuously differentiable sample: primitive of a continuous one."""
    return random_pp_1d(rng, domain, max_breaks, max_degree).primitive(0)


def lift_axis_poly(p: Poly, nvars: int, axis: int) -> Poly:
    terms = {}
    for (e,), c in p.terms.items():
        expo = [0] * nvars
        expo[axis] = e
        terms[tuple(expo)] = c
    return Poly(nvars, terms)


def tensor_pp(domain: Interval, factors: list[PiecewisePoly]) -> PiecewisePoly:
    """Product of one continuous 1-d function per axis, as an n-d function."""
    n = domain.dim
    breaks = tuple(f.breaks[0] for f in factors)
    edges = [(domain.lo(k),) + breaks[k] + (domain.hi(k),) for k in range(n)]
    cells = {}
    for idx in product(*(range(len(e) - 1) for e in edges)):
        p = Poly.const(n, 1)
        for k, i in enumerate(idx):
            p = p * lift_axis_poly(factors[k].cells[(i,)], n, k)
        cells[idx] = p
    return PiecewisePoly(domain, breaks, cells, validate=False)


def random_pp_nd(rng: random.Random, domain: Interval, max_breaks: int = 2,
                 max_degree: int = 2, summands: int = 2) -> PiecewisePoly:
    n = domain.dim
    if n == 1:
        return random_pp_1d(rng, domain, max_breaks, max_degree)
    total = None
    for _ in range(rng.randrange(1, summands + 1)):
        factors = [random_pp_1d(rng, Interval((domain.center[k],),
                                              (domain.radii[k],)),
                                max_breaks, max_degree)
                   for k in range(n)]
        term = tensor_pp(domain, factors)
        total = term if total is None else total + term
    return total


def random_distribution(rng: random.Random, domain: Interval,
                        max_order: int = 3, max_breaks: int = 2,
                        max_degree: int = 3) -> FormalDistribution:
    order = tuple(rng.randrange(0, max_order + 1) for _ in range(domain.dim))
    rep = random_pp_nd(rng, domain, max_breaks, max_degree)
    return FormalDistribution(order, rep)


def equivalent_variant(rng: random.Random, domain: Interval,
                       t: FormalDistribution) -> FormalDistribution:
    """Same distribution, different presentation: raised order."""
    bump = tuple(o + rng.randrange(0, 2) for o in t.order)
    target = bump if bump != t.order else tuple(o + 1 for o in t.order)
    return fd_raise(t, target)


def random_gauge_expr(rng: random.Random, max_terms: int = 3,
                      allow_truncation: bool = False) -> GaugeExpr:
    exps = sorted(rng.sample([Fraction(n, 2) for n in range(-6, 7)],
                             rng.randrange(1, max_terms + 1)))
    pairs = [(e, random_fraction(rng)) for e in exps]
    pairs = [(e, c if c != 0 else Fraction(1)) for e, c in pairs]
    trunc = None
    if allow_truncation and rng.random() < 0.3:
        trunc = pairs[-1][0] + Fraction(rng.randrange(1, 4), 2)
    return GaugeExpr.make(pairs, trunc)


# -- deterministic section catalog ------------------------------------------

def enumerate_sections(region: Interval, level: int, alpha_cap: int,
                       deg_cap: int) -> list[tuple[Interval, FormalDistribution]]:
    """The finite catalog of sections the morphism builder ranges over.

    Intervals: the region plus its dyadic halves and quarters (all 1-d).
    Representatives: monomials up to the degree cap, a centered kink, and a
    centered ramp; orders run to the cap.  Everything is deterministic.
    """
    if region.dim != 1:
        raise ValueError("the section catalog is one-dimensional")
    intervals = []
    n = 2**level
    for denom in (1, 2, 4):
        width = n // denom
        if width == 0:
            continue
        for start in range(0, n - width + 1, width):
            intervals.append((start, start + width))
    lo, step = region.lo(0), region.radii[0] * 2 / n
    out = []
    for start, stop in intervals:
        iv = Interval.of_1d(lo + step * start, lo + step * stop)
        c = iv.center[0]
        reps = []
        for d in range(0, deg_cap + 1):
            reps.append(PiecewisePoly.from_poly(iv, Poly(1, {(d,): Fraction(1)})))
        shifted = Poly(1, {(1,): Fraction(1), (0,): -c})
        reps.append(PiecewisePoly.from_cells_1d(
            iv, (c,), [Poly.zero(1), shifted]))        # ramp at the center
        reps.append(PiecewisePoly.from_cells_1d(
            iv, (c,), [-shifted, shifted]))            # kink at the center
        for alpha in range(0, alpha_cap + 1):
            for rep in reps:
                out.append((iv, FormalDistribution((alpha,), rep)))
    return out
