"""Gluing machinery over a finite base of dyadic intervals.

The base fixes a region and a resolution: base intervals are open boxes
whose endpoints sit on the dyadic grid of the region at the given level.
Nonempty intersections of base intervals are again base intervals, which is
all the topology the engine needs.

A presheaf instance supplies sections over base intervals together with
equality, restriction, and module operations.  A compatible family assigns
sections to a cover so that any two agree on overlaps.  Its completion is
computed lazily: for every base interval the engine either finds a section
locally equal to the family (restriction of a member when one contains it,
otherwise an instance-provided gluing attempt, always re-verified) or marks
the interval undecided.  Sums and restrictions of completed families work
on the cover of pairwise intersections; randomized law checks probe
locality, gluing, interaction with restriction, and with lifted operators.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Optional

from .formal import (DistributionError, FormalDistribution, fd_add, fd_derive,
                     fd_equal, fd_lambda, fd_raise, fd_restrict, fd_scale,
                     monomial_pm_member)
from .piecewise import Interval, PiecewiseError, PiecewisePoly, mi_max
from .poly import Poly
from .rationals import as_fraction


class SheafError(ValueError):
    pass


@dataclass(frozen=True)
class DyadicBase:
    """All open boxes with endpoints on the level-L dyadic grid of a region."""

    region: Interval
    level: int = 5

    def __post_init__(self):
        if not (0 <= self.level <= 12):
            raise SheafError("level out of range")

    @property
    def dim(self) -> int:
        return self.region.dim

    def grid(self, axis: int) -> list[Fraction]:
        lo, hi = self.region.lo(axis), self.region.hi(axis)
        step = (hi - lo) / 2**self.level
        return [lo + step * j for j in range(2**self.level + 1)]

    def step(self, axis: int) -> Fraction:
        return self.region.radii[axis] * 2 / 2**self.level

    def is_member(self, interval: Interval) -> bool:
        if interval.dim != self.dim:
            return False
        for k in range(self.dim):
            step = self.step(k)
            for v in (interval.lo(k), interval.hi(k)):
                offset = (v - self.region.lo(k)) / step
                if offset.denominator != 1 or not 0 <= offset <= 2**self.level:
                    return False
        return True

    def require_member(self, interval: Interval):
        if not self.is_member(interval):
            raise SheafError(f"not a base interval at level {self.level}: "
                             f"{interval}")

    def span_interval(self, spans) -> Interval:
        """Box from per-axis grid index pairs (i, j), i < j."""
        centers, radii = [], []
        for k, (i, j) in enumerate(spans):
            g = self.grid(k)
            lo, hi = g[i], g[j]
            centers.append((lo + hi) / 2)
            radii.append((hi - lo) / 2)
        return Interval(tuple(centers), tuple(radii))

    def spans_of(self, interval: Interval) -> tuple[tuple[int, int], ...]:
        self.require_member(interval)
        out = []
        for k in range(self.dim):
            step = self.step(k)
            i = int((interval.lo(k) - self.region.lo(k)) / step)
            j = int((interval.hi(k) - self.region.lo(k)) / step)
            out.append((i, j))
        return tuple(out)

    def iter_intervals_1d(self):
        if self.dim != 1:
            raise SheafError("full enumeration is one-dimensional only")
        n = 2**self.level
        for i in range(n):
            for j in range(i + 1, n + 1):
                yield self.span_interval(((i, j),))

    def covered_cells(self, intervals) -> frozenset:
        """Finest-grid cells inside a finite union of base intervals."""
        cells = set()
        for iv in intervals:
            spans = self.spans_of(iv)
            cells.update(product(*(range(i, j) for i, j in spans)))
        return frozenset(cells)


class PresheafInstance:
    """Sections over base intervals with equality as a congruence.

    Subclasses must make ``equal`` compatible with ``restrict``: sections
    equal on an interval stay equal on every subinterval.  The engine leans
    on this to test local equality on the largest base subinterval of each
    overlap instead of all of them.
    """

    name = "presheaf"

    def equal(self, interval: Interval, s, t) -> bool:
        raise NotImplementedError

    def restrict(self, src: Interval, dst: Interval, s):
        raise NotImplementedError

    def add(self, interval: Interval, s, t):
        raise NotImplementedError

    def scale(self, interval: Interval, mu, s):
        raise NotImplementedError

    def zero(self, interval: Interval):
        raise NotImplementedError

    def glue_on(self, target: Interval, family: "CompatibleFamily"):
        """Best-effort candidate section on ``target``; None when unknown.
        The engine verifies every candidate before accepting it."""
        return None

    def unit(self, interval: Interval):
        """A section distinguishable from zero on every subinterval; used as
        the perturbation in negative law-check controls."""
        raise NotImplementedError


@dataclass(frozen=True)
class CompatibleFamily:
    cover: tuple[Interval, ...]
    sections: tuple  # parallel to cover

    def __post_init__(self):
        if len(self.cover) != len(self.sections) or not self.cover:
            raise SheafError("cover and sections must align and be nonempty")

    def items(self):
        return zip(self.cover, self.sections)


def check_compatible(p: PresheafInstance, fam: CompatibleFamily) -> bool:
    for a in range(len(fam.cover)):
        for b in range(a + 1, len(fam.cover)):
            i, j = fam.cover[a], fam.cover[b]
            k = i.intersect(j)
            if k is None:
                continue
            if not p.equal(k, p.restrict(i, k, fam.sections[a]),
                           p.restrict(j, k, fam.sections[b])):
                return False
    return True


def locally_equal(p: PresheafInstance, section, target: Interval,
                  fam: CompatibleFamily) -> bool:
    """Agreement with the family on all base subintervals of each overlap.

    Equality being a restriction congruence, testing the overlap itself
    decides every smaller base interval at once.
    """
    for i, t in fam.items():
        k = i.intersect(target)
        if k is None:
            continue
        if not p.equal(k, p.restrict(target, k, section), p.restrict(i, k, t)):
            return False
    return True


class MaximalFamily:
    """Lazily completed family: the sections table grows as intervals are
    queried, guarded by a lock so concurrent readers see one answer."""

    def __init__(self, p: PresheafInstance, base: DyadicBase,
                 generators: CompatibleFamily):
        self.presheaf = p
        self.base = base
        self.generators = generators
        self._memo: dict = {}
        self._lock = threading.Lock()
        for iv in generators.cover:
            base.require_member(iv)

    @property
    def cover(self) -> tuple[Interval, ...]:
        return self.generators.cover

    def union_cells(self) -> frozenset:
        return self.base.covered_cells(self.generators.cover)

    def section_on(self, target: Interval):
        """The unique section locally equal to the family on ``target``,
        or None when no candidate can be built and verified."""
        self.base.require_member(target)
        with self._lock:
            if target in self._memo:
                return self._memo[target]
        candidate = self._build(target)
        if candidate is not None and not locally_equal(
                self.presheaf, candidate, target, self.generators):
            candidate = None
        with self._lock:
            self._memo.setdefault(target, candidate)
            return self._memo[target]

    def _build(self, target: Interval):
        for iv, sec in self.generators.items():
            if iv.contains(target):
                return self.presheaf.restrict(iv, target, sec)
        return self.presheaf.glue_on(target, self.generators)

    def decided(self, target: Interval) -> bool:
        return self.section_on(target) is not None


def maximalize(p: PresheafInstance, base: DyadicBase,
               fam: CompatibleFamily) -> MaximalFamily:
    if not check_compatible(p, fam):
        raise SheafError("family is not compatible on overlaps")
    return MaximalFamily(p, base, fam)


# -- module structure on completed families ---------------------------------

def section_add(x: MaximalFamily, y: MaximalFamily) -> MaximalFamily:
    """Sum over the cover of pairwise intersections."""
    p, base = x.presheaf, x.base
    if x.union_cells() != y.union_cells():
        raise SheafError("summands cover different unions")
    cover, secs = [], []
    for i, s in x.generators.items():
        for j, t in y.generators.items():
            k = i.intersect(j)
            if k is None:
                continue
            cover.append(k)
            secs.append(p.add(k, p.restrict(i, k, s), p.restrict(j, k, t)))
    return maximalize(p, base, CompatibleFamily(tuple(cover), tuple(secs)))


def section_scale(x: MaximalFamily, mu) -> MaximalFamily:
    p = x.presheaf
    secs = tuple(p.scale(i, mu, s) for i, s in x.generators.items())
    return maximalize(p, x.base, CompatibleFamily(x.cover, secs))


def section_map(x: MaximalFamily, op: Callable) -> MaximalFamily:
    """Lift a sectionwise operator (e.g. a derivative) over the family."""
    secs = tuple(op(i, s) for i, s in x.generators.items())
    return maximalize(x.presheaf, x.base, CompatibleFamily(x.cover, secs))


def section_restrict(x: MaximalFamily, pieces) -> MaximalFamily:
    """Restriction to a finite union of base intervals."""
    p = x.presheaf
    cover, secs = [], []
    for w in pieces:
        x.base.require_member(w)
        for i, s in x.generators.items():
            k = i.intersect(w)
            if k is None:
                continue
            cover.append(k)
            secs.append(p.restrict(i, k, s))
    if not cover:
        raise SheafError("restriction target misses the family's union")
    return maximalize(p, x.base, CompatibleFamily(tuple(cover), tuple(secs)))


def eta_embed(p: PresheafInstance, base: DyadicBase, section,
              interval: Interval) -> MaximalFamily:
    """A plain section becomes the completed family it generates."""
    return maximalize(p, base, CompatibleFamily((interval,), (section,)))


def sections_agree(x: MaximalFamily, y: MaximalFamily) -> bool:
    """Equality of completed families.

    Same union, and agreement on every pairwise intersection of the two
    generator covers; locality extends this to everything decided.
    """
    if x.union_cells() != y.union_cells():
        return False
    p = x.presheaf
    for i, s in x.generators.items():
        for j, t in y.generators.items():
            k = i.intersect(j)
            if k is None:
                continue
            if not p.equal(k, p.restrict(i, k, s), p.restrict(j, k, t)):
                return False
    return True


# -- the finite-order distribution instance ---------------------------------

class DistributionPresheaf(PresheafInstance):
    """Formal distributions with their intrinsic equality."""

    name = "formal-distributions"

    def equal(self, interval, s, t):
        return fd_equal(s, t)

    def restrict(self, src, dst, s):
        return fd_restrict(s, dst)

    def add(self, interval, s, t):
        return fd_add(s, t)

    def scale(self, interval, mu, s):
        return fd_scale(s, mu)

    def zero(self, interval):
        return fd_lambda(PiecewisePoly.zero(interval))

    def unit(self, interval):
        return fd_lambda(PiecewisePoly.constant(interval, 1))

    def glue_on(self, target, family):
        return glue_distributions(target, family)


def glue_distributions(target: Interval,
                       family: CompatibleFamily) -> Optional[FormalDistribution]:
    """Patch overlapping member restrictions into one section on ``target``.

    Strategy: raise all members meeting the target to a common order, then
    sweep along one axis whose overlaps form covering slabs, correcting each
    new piece by the polynomial its overlap difference must equal.  Fully
    general in one dimension; in higher dimensions the sweep succeeds only
    when corrections happen to be single polynomials, otherwise undecided.
    """
    pieces = []
    for i, t in family.items():
        k = i.intersect(target)
        if k is not None:
            pieces.append((k, fd_restrict(t, k)))
    if not pieces:
        return None
    dim = target.dim
    for axis in range(dim):
        result = _sweep_axis(target, pieces, axis)
        if result is not None:
            return result
    return None


def _sweep_axis(target: Interval, pieces, axis: int):
    # only slabs spanning the target in every other axis can be chained
    slabs = []
    for k, t in pieces:
        full = all(k.lo(a) == target.lo(a) and k.hi(a) == target.hi(a)
                   for a in range(target.dim) if a != axis)
        if full:
            slabs.append((k, t))
    if not slabs:
        return None
    slabs.sort(key=lambda item: item[0].lo(axis))
    # greedy chain covering the target extent along the sweep axis
    chain = []
    reach = target.lo(axis)
    idx = 0
    while reach < target.hi(axis):
        best = None
        while idx < len(slabs):
            lo = slabs[idx][0].lo(axis)
            # the target is open: a successor must properly overlap the
            # covered part, only the first piece may start at the edge
            if lo > reach or (chain and lo == reach):
                break
            if best is None or slabs[idx][0].hi(axis) > best[0].hi(axis):
                best = slabs[idx]
            idx += 1
        if best is None or best[0].hi(axis) <= reach:
            return None  # gap or touching seam
        chain.append(best)
        reach = best[0].hi(axis)

    m = chain[0][1].order
    for _, t in chain[1:]:
        m = mi_max(m, t.order)
    glued = fd_raise(chain[0][1], m).rep
    covered_hi = chain[0][0].hi(axis)
    for k, t in chain[1:]:
        if k.hi(axis) <= covered_hi:
            continue
        if k.lo(axis) >= covered_hi:
            return None  # pieces merely touch: the seam plane is uncovered
        piece = fd_raise(t, m).rep
        overlap = _axis_clip(k, axis, k.lo(axis), covered_hi)
        diff = glued.restrict(overlap) - piece.restrict(overlap)
        q = _single_poly(diff)
        if q is None or not monomial_pm_member(q, m):
            return None
        corrected = piece + PiecewisePoly.from_poly(piece.domain, q)
        seam = (k.lo(axis) + covered_hi) / 2
        glued = _concat(glued.restrict(_axis_clip(glued.domain, axis,
                                                  glued.domain.lo(axis), seam)),
                        corrected.restrict(_axis_clip(k, axis, seam, k.hi(axis))),
                        axis, seam)
        covered_hi = k.hi(axis)
    return FormalDistribution(m, glued)


def _axis_clip(box: Interval, axis: int, lo: Fraction, hi: Fraction) -> Interval:
    centers = list(box.center)
    radii = list(box.radii)
    centers[axis] = (lo + hi) / 2
    radii[axis] = (hi - lo) / 2
    return Interval(tuple(centers), tuple(radii))


def _single_poly(pp: PiecewisePoly) -> Optional[Poly]:
    polys = set(pp.cells.values())
    return polys.pop() if len(polys) == 1 else None


def _concat(left: PiecewisePoly, right: PiecewisePoly, axis: int,
            seam: Fraction) -> PiecewisePoly:
    """Join two functions meeting at a seam plane into one piecewise
    polynomial; the seam becomes a breakpoint and continuity is validated."""
    joint = tuple(tuple(sorted(set(a) | set(b))) if k != axis else None
                  for k, (a, b) in enumerate(zip(left.breaks, right.breaks)))
    lbreaks = tuple(joint[k] if k != axis else left.breaks[k]
                    for k in range(left.dim))
    rbreaks = tuple(joint[k] if k != axis else right.breaks[k]
                    for k in range(right.dim))
    lref = left.refine_to(lbreaks)
    rref = right.refine_to(rbreaks)
    domain = _axis_clip(left.domain, axis, left.domain.lo(axis),
                        right.domain.hi(axis))
    breaks = tuple(
        joint[k] if k != axis
        else lref.breaks[axis] + (seam,) + rref.breaks[axis]
        for k in range(left.dim))
    offset = lref.shape[axis]
    cells = {}
    for idx, p in lref.cells.items():
        cells[idx] = p
    for idx, p in rref.cells.items():
        jdx = list(idx)
        jdx[axis] += offset
        cells[tuple(jdx)] = p
    return PiecewisePoly(domain, breaks, cells)


# -- randomized law checks ---------------------------------------------------

def sheaf_laws_check(p: PresheafInstance, base: DyadicBase, cases: int,
                     seed: int, sampler: Callable,
                     variant: Optional[Callable] = None,
                     lift=None) -> dict:
    """Randomized audit of the sheaf conditions over the given base.

    ``sampler(rng, interval)`` draws a section; ``variant(rng, interval,
    section)`` draws an equal-but-differently-presented section when the
    instance has one.  ``lift`` is an optional sectionwise operator whose
    interaction with gluing is checked.  Returns a JSON-friendly report.
    """
    import random

    rng = random.Random(seed)
    laws = {name: {"law": name, "cases": 0, "failures": []}
            for name in ("locality", "glue_exists", "glue_restrict",
                         "glue_operator")}

    def record(name, ok, detail):
        laws[name]["cases"] += 1
        if not ok:
            laws[name]["failures"].append(detail)

    for case in range(cases):
        u = _random_interval(rng, base)
        t = sampler(rng, u)
        cover = _random_cover(rng, base, u)
        fam = CompatibleFamily(
            tuple(cover), tuple(p.restrict(u, c, t) for c in cover))
        glued = maximalize(p, base, fam)

        got = glued.section_on(u)
        record("glue_exists",
               got is not None and p.equal(u, got, t),
               {"case": case, "interval": _iv_str(u)})

        ref = eta_embed(p, base, t, u)
        same = sections_agree(glued, ref)
        bad = p.add(u, t, p.unit(u))
        differs = not sections_agree(glued, eta_embed(p, base, bad, u))
        if variant is not None:
            same = same and sections_agree(
                glued, eta_embed(p, base, variant(rng, u, t), u))
        record("locality", same and differs, {"case": case, "interval": _iv_str(u)})

        v = _random_subinterval(rng, base, u)
        lhs = section_restrict(glued, [v])
        clipped_cover, clipped_secs = [], []
        for c, s in fam.items():
            k = c.intersect(v)
            if k is not None:
                clipped_cover.append(k)
                clipped_secs.append(p.restrict(c, k, s))
        rhs = maximalize(p, base, CompatibleFamily(tuple(clipped_cover),
                                                   tuple(clipped_secs)))
        record("glue_restrict", sections_agree(lhs, rhs),
               {"case": case, "interval": _iv_str(v)})

        if lift is not None:
            lhs2 = section_map(glued, lift)
            rhs2 = maximalize(p, base, CompatibleFamily(
                fam.cover, tuple(lift(c, s) for c, s in fam.items())))
            record("glue_operator", sections_agree(lhs2, rhs2),
                   {"case": case, "interval": _iv_str(u)})

    report = {"instance": p.name, "level": base.level, "seed": seed,
              "laws": list(laws.values())}
    report["pass"] = all(not entry["failures"] for entry in laws.values())
    return report


def _iv_str(iv: Interval) -> str:
    bits = [f"({iv.lo(k)},{iv.hi(k)})" for k in range(iv.dim)]
    return "x".join(bits)


def _random_interval(rng, base: DyadicBase) -> Interval:
    n = 2**base.level
    spans = []
    for _ in range(base.dim):
        i = rng.randrange(0, n - 1)
        j = rng.randrange(i + 2, n + 1)
        spans.append((i, j))
    return base.span_interval(spans)

def _random_subinterval(rng, base: DyadicBase, u: Interval) -> Interval:
    spans = []
    for k, (i, j) in enumerate(base.spans_of(u)):
        a = rng.randrange(i, j)
        b = rng.randrange(a + 1, j + 1)
        spans.append((a, b))
    return base.span_interval(spans)


def _random_cover(rng, base: DyadicBase, u: Interval) -> list[Interval]:
    """Overlapping base intervals whose union is exactly u (1-d sweep per
    axis, product in higher dimensions)."""
    per_axis = []
    for k, (i, j) in enumerate(base.spans_of(u)):
        cuts = [i]
        while cuts[-1] < j:
            step = rng.randrange(1, max(2, (j - i) // 2 + 1))
            cuts.append(min(cuts[-1] + step, j))
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            # open boxes that merely touch miss the cut plane: extend each
            # interior piece one grid step so consecutive pieces overlap
            lo = max(i, a - (1 if a > i else 0) - rng.randrange(0, 2))
            hi = min(j, b + (1 if b < j else 0) + rng.randrange(0, 2))
            pieces.append((lo, hi))
        per_axis.append(pieces)
    return [base.span_interval(combo) for combo in product(*per_axis)]
