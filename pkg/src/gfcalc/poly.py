"""Sparse multivariate polynomials with rational coefficients.

Terms map exponent tuples to nonzero Fractions.  All operations are exact;
nothing here ever touches floats.  The class is deliberately small: the
piecewise layer supplies domains, continuity, and calculus across cells.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .rationals import as_fraction


class Poly:
    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[tuple, object] | None = None):
        self.nvars = nvars
        clean: dict[tuple[int, ...], Fraction] = {}
        for expo, coef in (terms or {}).items():
            coef = as_fraction(coef)
            if coef == 0:
                continue
            expo = tuple(int(e) for e in expo)
            if len(expo) != nvars or any(e < 0 for e in expo):
                raise ValueError(f"bad exponent tuple {expo} for {nvars} variables")
            clean[expo] = clean.get(expo, Fraction(0)) + coef
        self.terms = {e: c for e, c in clean.items() if c != 0}

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly(nvars)

    @staticmethod
    def const(nvars: int, c) -> "Poly":
        return Poly(nvars, {(0,) * nvars: as_fraction(c)})

    @staticmethod
    def var(nvars: int, k: int, power: int = 1) -> "Poly":
        expo = [0] * nvars
        expo[k] = power
        return Poly(nvars, {tuple(expo): Fraction(1)})

    # -- ring operations --------------------------------------------------

    def _check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError("mixed variable counts")

    def __add__(self, other: "Poly") -> "Poly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, Fraction(0)) + c
        return Poly(self.nvars, out)

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check(other)
        out: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, Fraction(0)) + c1 * c2
        return Poly(self.nvars, out)

    def scale(self, c) -> "Poly":
        c = as_fraction(c)
        return Poly(self.nvars, {e: c * k for e, k in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.nvars == other.nvars \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        bits = [f"{c}*x^{e}" for e, c in sorted(self.terms.items())]
        return "Poly(" + " + ".join(bits) + ")"

    @property
    def is_zero(self) -> bool:
        return not self.terms

    # -- queries ----------------------------------------------------------

    def degree(self, axis: int) -> int:
        """Largest exponent in the given axis; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(e[axis] for e in self.terms)

    def eval(self, point: Iterable) -> Fraction:
        pt = [as_fraction(v) for v in point]
        if len(pt) != self.nvars:
            raise ValueError("wrong point dimension")
        total = Fraction(0)
        powers: dict[tuple[int, int], Fraction] = {}

        def pw(axis: int, k: int) -> Fraction:
            key = (axis, k)
            if key not in powers:
                powers[key] = pt[axis] ** k
            return powers[key]

        for e, c in self.terms.items():
            term = c
            for axis, k in enumerate(e):
                if k:
                    term *= pw(axis, k)
            total += term
        return total

    # -- calculus ---------------------------------------------------------

    def partial(self, axis: int) -> "Poly":
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            if e[axis] == 0:
                continue
            ne = list(e)
            ne[axis] -= 1
            out[tuple(ne)] = c * e[axis]
        return Poly(self.nvars, out)

    def antiderivative(self, axis: int) -> "Poly":
        """Termwise primitive in one axis, constant of integration zero."""
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[axis] += 1
            out[tuple(ne)] = c / ne[axis]
        return Poly(self.nvars, out)

    def substitute_axis(self, axis: int, value) -> "Poly":
        """Pin one coordinate to a rational value; the result still has
        nvars variables with exponent 0 in the pinned axis."""
        value = as_fraction(value)
        out: dict[tuple[int, ...], Fraction] = {}
        for e, c in self.terms.items():
            coef = c * value ** e[axis]
            ne = list(e)
            ne[axis] = 0
            key = tuple(ne)
            out[key] = out.get(key, Fraction(0)) + coef
        return Poly(self.nvars, out)

    def compose_axis_affine(self, axis: int, a, b) -> "Poly":
        """Substitute x_axis -> a*x_axis + b with rational a, b."""
        a, b = as_fraction(a), as_fraction(b)
        lin = Poly(self.nvars, {
            tuple(1 if i == axis else 0 for i in range(self.nvars)): a,
            (0,) * self.nvars: b,
        })
        out = Poly.zero(self.nvars)
        # group by exponent in the target axis, reuse powers of the line
        by_k: dict[int, dict[tuple[int, ...], Fraction]] = {}
        for e, c in self.terms.items():
            rest = list(e)
            k = rest[axis]
            rest[axis] = 0
            by_k.setdefault(k, {})[tuple(rest)] = c
        lin_pow = Poly.const(self.nvars, 1)
        cur = 0
        for k in sorted(by_k):
            while cur < k:
                lin_pow = lin_pow * lin
                cur += 1
            out = out + Poly(self.nvars, by_k[k]) * lin_pow
        return out
