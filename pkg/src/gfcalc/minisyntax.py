"""Input language for one-dimensional piecewise polynomials.

Grammar, over a fixed open interval:

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := atom ("^" integer)?            power is a nonneg integer
    atom   := rational | "x" | "ramp" | "abs" | piecewise | "(" expr ")"
              | "-" atom
    piecewise := "pw" "{" expr ("|" rational "|" expr)* "}"

    dist   := "((" integer ")" "," expr ")"

Rationals accept "3", "-7/2", "0.25", "1e-2".  Implicit products are not
recognized; write 3*x.  "ramp" is max(x, 0), "abs" is |x|; both adapt to
domains that do not straddle zero.  In a piecewise literal the cell
expressions alternate with their interior breakpoints, left to right, and
each cell expression must restrict to a single polynomial on its cell.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .formal import FormalDistribution
from .piecewise import Interval, PiecewisePoly
from .poly import Poly


class MiniSyntaxError(ValueError):
    pass


_TOKEN = re.compile(r"""
    \s*(?:
      (?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_]+)
    | (?P<sym>[-+*/^(){}|,])
    )""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise MiniSyntaxError(f"bad character at {text[pos:]!r}")
        pos = m.end()
        for kind in ("num", "name", "sym"):
            if m.group(kind) is not None:
                out.append((kind, m.group(kind)))
                break
    out.append(("end", ""))
    return out


class _Parser:
    def __init__(self, text: str, domain: Interval):
        if domain.dim != 1:
            raise MiniSyntaxError("the input language is one-dimensional")
        self.tokens = _tokenize(text)
        self.pos = 0
        self.domain = domain

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.pos]

    def take(self, kind=None, value=None) -> str:
        k, v = self.tokens[self.pos]
        if (kind is not None and k != kind) or \
           (value is not None and v != value):
            want = value if value is not None else kind
            raise MiniSyntaxError(f"expected {want!r}, found {v or 'end'!r}")
        self.pos += 1
        return v

    # a standalone rational, slash form included: breaks and orders only,
    # expression-level "/" stays an operator
    def rational(self) -> Fraction:
        sign = 1
        if self.peek() == ("sym", "-"):
            self.take()
            sign = -1
        try:
            out = Fraction(self.take("num"))
        except ValueError as exc:
            raise MiniSyntaxError(str(exc)) from exc
        if self.peek() == ("sym", "/"):
            self.take()
            den = Fraction(self.take("num"))
            if den == 0:
                raise MiniSyntaxError("zero denominator")
            out /= den
        return sign * out

    def integer(self) -> int:
        v = self.take("num")
        try:
            q = Fraction(v)
        except ValueError as exc:
            raise MiniSyntaxError(str(exc)) from exc
        if q.denominator != 1 or q < 0:
            raise MiniSyntaxError(f"expected a nonnegative integer, got {v}")
        return int(q)

    def expr(self) -> PiecewisePoly:
        out = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "sym":
            op = self.take()
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> PiecewisePoly:
        out = self.factor()
        while self.peek() in (("sym", "*"), ("sym", "/")):
            op = self.take()
            rhs = self.factor()
            if op == "*":
                out = out * rhs
            else:
                c = _constant_of(rhs)
                if c is None or c == 0:
                    raise MiniSyntaxError(
                        "division needs a nonzero constant divisor")
                out = out.scale(1 / c)
        return out

    def factor(self) -> PiecewisePoly:
        base = self.atom()
        if self.peek() == ("sym", "^"):
            self.take()
            k = self.integer()
            out = PiecewisePoly.constant(self.domain, 1)
            for _ in range(k):
                out = out * base
            return out
        return base

    def atom(self) -> PiecewisePoly:
        kind, value = self.peek()
        if kind == "num":
            return PiecewisePoly.constant(self.domain, self.rational())
        if (kind, value) == ("sym", "-"):
            self.take()
            return self.atom().scale(-1)
        if (kind, value) == ("sym", "("):
            self.take()
            out = self.expr()
            self.take("sym", ")")
            return out
        if kind == "name":
            self.take()
            if value == "x":
                return PiecewisePoly.from_poly(self.domain, Poly.var(1, 0))
            if value == "ramp":
                return _ramp(self.domain)
            if value == "abs":
                return _kink(self.domain)
            if value == "pw":
                return self.piecewise()
            raise MiniSyntaxError(f"unknown name {value!r}")
        raise MiniSyntaxError(f"unexpected {value or 'end'!r}")

    def piecewise(self) -> PiecewisePoly:
        self.take("sym", "{")
        cells = [self.expr()]
        breaks: list[Fraction] = []
        while self.peek() == ("sym", "|"):
            self.take()
            breaks.append(self.rational())
            self.take("sym", "|")
            cells.append(self.expr())
        self.take("sym", "}")
        if any(b >= c for b, c in zip(breaks, breaks[1:])):
            raise MiniSyntaxError("breakpoints must strictly increase")
        lo, hi = self.domain.lo(0), self.domain.hi(0)
        if breaks and not (lo < breaks[0] and breaks[-1] < hi):
            raise MiniSyntaxError("breakpoints must be interior")
        polys = []
        edges = [lo] + breaks + [hi]
        for i, cell in enumerate(cells):
            piece = cell.restrict(Interval.of_1d(edges[i], edges[i + 1]))
            poly = _single_cell(piece)
            if poly is None:
                raise MiniSyntaxError(
                    "cell expressions must be single polynomials over "
                    "their cell")
            polys.append(poly)
        return PiecewisePoly.from_cells_1d(self.domain, tuple(breaks), polys)


def _constant_of(f: PiecewisePoly):
    vals = set()
    for p in f.cells.values():
        if any(sum(e) > 0 for e in p.terms):
            return None
        vals.add(p.terms.get((0,) * f.dim, Fraction(0)))
    return vals.pop() if len(vals) == 1 else None


def _single_cell(f: PiecewisePoly):
    polys = {p for p in f.cells.values()}
    return polys.pop() if len(polys) == 1 else None


def _ramp(domain: Interval) -> PiecewisePoly:
    x = Poly.var(1, 0)
    lo, hi = domain.lo(0), domain.hi(0)
    if hi <= 0:
        return PiecewisePoly.zero(domain)
    if lo >= 0:
        return PiecewisePoly.from_poly(domain, x)
    return PiecewisePoly.from_cells_1d(domain, (Fraction(0),),
                                       [Poly.zero(1), x])


def _kink(domain: Interval) -> PiecewisePoly:
    x = Poly.var(1, 0)
    lo, hi = domain.lo(0), domain.hi(0)
    if hi <= 0:
        return PiecewisePoly.from_poly(domain, -x)
    if lo >= 0:
        return PiecewisePoly.from_poly(domain, x)
    return PiecewisePoly.from_cells_1d(domain, (Fraction(0),), [-x, x])


def parse_pp(text: str, domain: Interval) -> PiecewisePoly:
    """Parse an expression into a piecewise polynomial on the domain."""
    p = _Parser(text, domain)
    out = p.expr()
    p.take("end")
    return out


def parse_dist(text: str, domain: Interval) -> FormalDistribution:
    """Parse a distribution literal ((order), expression)."""
    p = _Parser(text, domain)
    p.take("sym", "(")
    p.take("sym", "(")
    order = p.integer()
    p.take("sym", ")")
    p.take("sym", ",")
    rep = p.expr()
    p.take("sym", ")")
    p.take("end")
    return FormalDistribution((order,), rep)
