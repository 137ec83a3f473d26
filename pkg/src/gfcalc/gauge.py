"""Asymptotic numbers over a gauge.

A gauge is a family of positive scales rho_eps -> 0 as eps -> 0.  Numbers are
nets of reals indexed by eps, identified when their difference shrinks faster
than every power of the gauge.  Two representations live side by side:

* ``GaugeExpr``: a finite generalized power series  sum_i c_i * rho^(a_i)
  with rational coefficients and strictly increasing rational exponents,
  optionally truncated at a known order.  Arithmetic, order, classification
  and inversion are exact on this tier.

* ``OpaqueNet``: a black-box evaluator eps -> value probed on a fixed
  schedule of sample epsilons.  Growth is estimated by least-squares slope
  fitting on the log-log cloud; every verdict derived this way is tagged
  heuristic.

Classification splits numbers into zero, infinitesimal (to 0 but not 0),
finite_invertible (bounded away from 0 and infinity), infinite, or
undetermined.  A net is moderate when it is eventually bounded by some
rho^(-N); the negligible nets are those below every positive power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import linear_regression
from typing import Callable, Optional

from .rationals import as_fraction

# Sample schedule for opaque nets: eps = 2^-k, k = 4..20.
DEFAULT_SCHEDULE = tuple(Fraction(1, 2**k) for k in range(4, 21))

# Residual gate for log-log fits, in decimal decades.
SLOPE_RESIDUAL_TOL = 0.1

# Largest moderateness exponent the heuristics will search for.
MODERATE_EXPONENT_CAP = 64


class GaugeError(ValueError):
    pass


class UndeterminedError(GaugeError):
    """Raised when a truncated or opaque body does not determine the answer."""


@dataclass(frozen=True)
class Gauge:
    """Scale family rho_eps.  Either a power of eps or a sampled table.

    power(p) means rho_eps = eps**p with p a positive rational.  A sampled
    gauge carries explicit (eps, rho) pairs, positive and decreasing.
    """

    power: Optional[Fraction] = None
    samples: Optional[tuple[tuple[Fraction, float], ...]] = None

    def __post_init__(self):
        if (self.power is None) == (self.samples is None):
            raise GaugeError("gauge needs exactly one of power or samples")
        if self.power is not None and self.power <= 0:
            raise GaugeError("gauge power must be positive")
        if self.samples is not None:
            vals = [v for _, v in self.samples]
            if any(v <= 0 for v in vals):
                raise GaugeError("gauge samples must be positive")
            if any(b >= a for a, b in zip(vals, vals[1:])):
                raise GaugeError("gauge samples must decrease")

    def rho_float(self, eps: float) -> float:
        if self.power is not None:
            return float(eps) ** float(self.power)
        # nearest sampled eps; the table is the whole definition
        best = min(self.samples, key=lambda s: abs(float(s[0]) - float(eps)))
        return best[1]

    def rho_exact(self, eps: Fraction) -> Fraction:
        """Exact rho_eps; only possible for integer powers of a rational eps."""
        if self.power is None or self.power.denominator != 1:
            raise UndeterminedError("gauge value is not exactly rational here")
        return Fraction(eps) ** int(self.power)

    def describe(self) -> str:
        if self.power is not None:
            return f"power({self.power})"
        return f"samples({len(self.samples)})"


CANONICAL_GAUGE = Gauge(power=Fraction(1))


def _merge_terms(pairs) -> tuple[tuple[Fraction, Fraction], ...]:
    acc: dict[Fraction, Fraction] = {}
    for a, c in pairs:
        acc[a] = acc.get(a, Fraction(0)) + c
    return tuple(sorted((a, c) for a, c in acc.items() if c != 0))


@dataclass(frozen=True)
class GaugeExpr:
    """Finite series sum c*rho^a, exponents strictly increasing.

    ``trunc`` is the knowledge horizon: terms at or beyond it are unknown.
    None means the series is exact.  The canonical zero is the empty exact
    series.
    """

    terms: tuple[tuple[Fraction, Fraction], ...] = ()
    trunc: Optional[Fraction] = None

    def __post_init__(self):
        for (a, c), (b, _) in zip(self.terms, self.terms[1:]):
            if a >= b:
                raise GaugeError("exponents must strictly increase")
        if any(c == 0 for _, c in self.terms):
            raise GaugeError("zero coefficients are not stored")
        if self.trunc is not None and self.terms and self.terms[-1][0] >= self.trunc:
            raise GaugeError("terms at or past the truncation order")

    @staticmethod
    def make(pairs, trunc=None) -> "GaugeExpr":
        trunc = None if trunc is None else as_fraction(trunc)
        terms = _merge_terms((as_fraction(a), as_fraction(c)) for a, c in pairs)
        if trunc is not None:
            terms = tuple(t for t in terms if t[0] < trunc)
        return GaugeExpr(terms, trunc)

    @staticmethod
    def const(c) -> "GaugeExpr":
        c = as_fraction(c)
        return GaugeExpr(((Fraction(0), c),) if c else ())

    @staticmethod
    def rho(exponent=1) -> "GaugeExpr":
        return GaugeExpr(((as_fraction(exponent), Fraction(1)),))

    @property
    def is_exact(self) -> bool:
        return self.trunc is None

    @property
    def leading(self) -> Optional[tuple[Fraction, Fraction]]:
        return self.terms[0] if self.terms else None

    def __add__(self, other: "GaugeExpr") -> "GaugeExpr":
        trunc = _min_opt(self.trunc, other.trunc)
        return GaugeExpr.make(self.terms + other.terms, trunc)

    def __neg__(self) -> "GaugeExpr":
        return GaugeExpr(tuple((a, -c) for a, c in self.terms), self.trunc)

    def __sub__(self, other: "GaugeExpr") -> "GaugeExpr":
        return self + (-other)

    def __mul__(self, other: "GaugeExpr") -> "GaugeExpr":
        trunc = _product_trunc(self, other)
        pairs = [
            (a + b, c * d)
            for a, c in self.terms
            for b, d in other.terms
        ]
        return GaugeExpr.make(pairs, trunc)

    def scale(self, c) -> "GaugeExpr":
        c = as_fraction(c)
        if c == 0:
            # the truncation survives: 0*x is exactly 0 only for exact x
            return GaugeExpr((), self.trunc)
        return GaugeExpr(tuple((a, c * k) for a, k in self.terms), self.trunc)

    def shift(self, exponent) -> "GaugeExpr":
        """Multiply by rho^exponent."""
        q = as_fraction(exponent)
        trunc = None if self.trunc is None else self.trunc + q
        return GaugeExpr(tuple((a + q, c) for a, c in self.terms), trunc)

    def power(self, k: int) -> "GaugeExpr":
        if k < 0:
            raise GaugeError("negative powers go through invert")
        out = GaugeExpr.const(1)
        for _ in range(k):
            out = out * self
        return out

    def classify(self) -> str:
        if not self.terms:
            if self.trunc is None:
                return "zero"
            if self.trunc > 0:
                return "infinitesimal"
            return "undetermined"
        a = self.terms[0][0]
        if a > 0:
            return "infinitesimal"
        if a == 0:
            return "finite_invertible"
        return "infinite"

    def sign(self) -> int:
        """Eventual sign: -1, 0, or +1.  Undetermined truncations raise."""
        if not self.terms:
            if self.trunc is None:
                return 0
            raise UndeterminedError("sign unknown within truncation order")
        return 1 if self.terms[0][1] > 0 else -1

    def abs(self) -> "GaugeExpr":
        return self if self.sign() >= 0 else -self

    def invert(self, order=None) -> "GaugeExpr":
        """Reciprocal, truncated at the requested absolute order.

        A single-term series inverts exactly.  Otherwise the result is the
        geometric expansion carried far enough that all exponents below
        ``order`` are present.
        """
        if not self.terms:
            raise GaugeError("cannot invert a series with no known terms")
        a0, c0 = self.terms[0]
        head = GaugeExpr(((-a0, 1 / c0),))
        tail = GaugeExpr(self.terms[1:], self.trunc)
        if not tail.terms and tail.trunc is None:
            return head  # exact monomial reciprocal
        if order is None:
            raise GaugeError("inverting a multi-term series needs an order")
        order = as_fraction(order)
        # x = c0 rho^a0 (1 + w); 1/x = head * sum (-w)^k
        w = tail.shift(-a0).scale(1 / c0)
        gap = (w.terms[0][0] if w.terms else w.trunc)
        if gap is None or gap <= 0:
            raise GaugeError("series is not in decreasing-significance form")
        out = GaugeExpr.const(1)
        wk = GaugeExpr.const(1)
        k = 0
        while -a0 + (k + 1) * gap < order:
            k += 1
            wk = wk * (-w)
            out = out + wk
        result = head * out
        keep = tuple(t for t in result.terms if t[0] < order)
        return GaugeExpr(keep, _min_opt(result.trunc, order))

    def eval_exact(self, eps: Fraction, gauge: Gauge = CANONICAL_GAUGE) -> Fraction:
        """Value of the known part at a rational eps.  Integer exponents only."""
        rho = gauge.rho_exact(as_fraction(eps))
        total = Fraction(0)
        for a, c in self.terms:
            if a.denominator != 1:
                raise UndeterminedError("fractional exponent has no exact value")
            total += c * rho ** int(a)
        return total

    def eval_float(self, eps: float, gauge: Gauge = CANONICAL_GAUGE) -> float:
        rho = gauge.rho_float(eps)
        return sum(float(c) * rho ** float(a) for a, c in self.terms)


def _min_opt(a: Optional[Fraction], b: Optional[Fraction]) -> Optional[Fraction]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _product_trunc(x: GaugeExpr, y: GaugeExpr) -> Optional[Fraction]:
    """Knowledge horizon of x*y.

    The unknown tail of x multiplies the leading term of y and vice versa;
    both unknown tails multiply each other.
    """
    cands = []
    if x.trunc is not None:
        if y.terms:
            cands.append(x.trunc + y.terms[0][0])
        if y.trunc is not None:
            cands.append(x.trunc + y.trunc)
        if not y.terms and y.trunc is None:
            return None  # y is exactly zero
    if y.trunc is not None:
        if x.terms:
            cands.append(y.trunc + x.terms[0][0])
        if not x.terms and x.trunc is None:
            return None
    return min(cands) if cands else None


@dataclass(frozen=True)
class OpaqueNet:
    """Black-box net eps -> value with its probing schedule."""

    evaluator: Callable[[float], float]
    schedule: tuple[Fraction, ...] = DEFAULT_SCHEDULE

    def values(self) -> list[float]:
        out = []
        for e in self.schedule:
            try:
                out.append(float(self.evaluator(float(e))))
            except OverflowError:
                out.append(math.inf)
        return out


@dataclass(frozen=True)
class Verdict:
    """Outcome of an asymptotic test.

    ``kind`` is "yes", "no" or "undetermined"; ``bound`` the certified
    exponent when meaningful; ``exact`` distinguishes symbolic certainty from
    schedule-based estimates, which carry their evidence in ``note``.
    """

    kind: str
    bound: Optional[int] = None
    exact: bool = True
    note: str = ""

    def __bool__(self) -> bool:
        return self.kind == "yes"


@dataclass(frozen=True)
class GeneralizedNumber:
    body: object  # GaugeExpr | OpaqueNet
    gauge: Gauge = CANONICAL_GAUGE

    def __post_init__(self):
        if not isinstance(self.body, (GaugeExpr, OpaqueNet)):
            raise GaugeError(f"unsupported body: {type(self.body).__name__}")

    @property
    def is_symbolic(self) -> bool:
        return isinstance(self.body, GaugeExpr)

    @staticmethod
    def const(c, gauge: Gauge = CANONICAL_GAUGE) -> "GeneralizedNumber":
        return GeneralizedNumber(GaugeExpr.const(c), gauge)

    @staticmethod
    def rho(exponent=1, gauge: Gauge = CANONICAL_GAUGE) -> "GeneralizedNumber":
        return GeneralizedNumber(GaugeExpr.rho(exponent), gauge)

    @staticmethod
    def from_net(evaluator, gauge: Gauge = CANONICAL_GAUGE,
                 schedule=DEFAULT_SCHEDULE) -> "GeneralizedNumber":
        return GeneralizedNumber(OpaqueNet(evaluator, tuple(schedule)), gauge)

    def _binary(self, other: "GeneralizedNumber", sym, num) -> "GeneralizedNumber":
        if self.gauge != other.gauge:
            raise GaugeError("operands use different gauges")
        if self.is_symbolic and other.is_symbolic:
            return GeneralizedNumber(sym(self.body, other.body), self.gauge)
        xe, ye = _evaluator(self), _evaluator(other)
        sched = _common_schedule(self, other)
        return GeneralizedNumber(
            OpaqueNet(lambda e, xe=xe, ye=ye: num(xe(e), ye(e)), sched), self.gauge)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b, lambda a, b: a + b)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b, lambda a, b: a - b)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b, lambda a, b: a * b)

    def __neg__(self):
        if self.is_symbolic:
            return GeneralizedNumber(-self.body, self.gauge)
        ev = _evaluator(self)
        return GeneralizedNumber(OpaqueNet(lambda e: -ev(e), self.body.schedule),
                                 self.gauge)

    def eval_float(self, eps: float) -> float:
        return _evaluator(self)(eps)

    def eval_exact(self, eps) -> Fraction:
        if not self.is_symbolic:
            raise UndeterminedError("opaque nets have no exact values")
        return self.body.eval_exact(as_fraction(eps), self.gauge)


def _evaluator(x: GeneralizedNumber) -> Callable[[float], float]:
    if x.is_symbolic:
        body, gauge = x.body, x.gauge
        return lambda e: body.eval_float(e, gauge)
    return lambda e: float(x.body.evaluator(e))


def _common_schedule(x: GeneralizedNumber, y: GeneralizedNumber):
    xs = x.body.schedule if not x.is_symbolic else None
    ys = y.body.schedule if not y.is_symbolic else None
    if xs and ys:
        common = tuple(e for e in xs if e in set(ys))
        return common if common else xs
    return xs or ys or DEFAULT_SCHEDULE


# ---------------------------------------------------------------------------
# classification and moderateness


def classify(x: GeneralizedNumber) -> Verdict:
    """Sort a number into zero / infinitesimal / finite_invertible / infinite.

    Symbolic bodies classify exactly from the leading exponent.  Opaque
    bodies go through the log-log slope fit and come back heuristic.
    """
    if x.is_symbolic:
        kind = x.body.classify()
        exact = kind != "undetermined"
        return Verdict(kind, exact=exact,
                       note="" if exact else "empty series below truncation order")
    return _classify_samples(x.body.values(), _log_rhos(x))


def is_moderate(x: GeneralizedNumber) -> Verdict:
    """Moderateness: |x_eps| = O(rho^-N) for some N >= 0.

    Symbolic: read N off the leading exponent.  Opaque: search for the
    smallest exponent whose rescaled samples stay bounded without an upward
    trend; refuse when every candidate keeps growing.
    """
    if x.is_symbolic:
        lead = x.body.leading
        if lead is None:
            return Verdict("yes", bound=0)
        n = max(0, math.ceil(-lead[0]))
        return Verdict("yes", bound=n)
    return _moderate_samples(x.body.values(), _rhos(x))


def leq(x: GeneralizedNumber, y: GeneralizedNumber) -> bool:
    """Eventual order: x <= y iff y - x is zero or eventually positive."""
    d = y - x
    if not d.is_symbolic:
        raise GaugeError("order is only decided on symbolic bodies")
    return d.body.sign() >= 0


def lt(x: GeneralizedNumber, y: GeneralizedNumber) -> bool:
    d = y - x
    if not d.is_symbolic:
        raise GaugeError("order is only decided on symbolic bodies")
    return d.body.sign() > 0


def invert(x: GeneralizedNumber, order=None) -> GeneralizedNumber:
    """Reciprocal of an invertible number (finite_invertible or infinite,
    or an infinitesimal with known leading term)."""
    if not x.is_symbolic:
        raise GaugeError("inversion needs a symbolic body")
    if not x.body.terms:
        raise GaugeError("cannot invert zero")
    return GeneralizedNumber(x.body.invert(order), x.gauge)


def gauge_abs(x: GeneralizedNumber) -> GeneralizedNumber:
    if not x.is_symbolic:
        ev = _evaluator(x)
        return GeneralizedNumber(OpaqueNet(lambda e: abs(ev(e)), x.body.schedule),
                                 x.gauge)
    return GeneralizedNumber(x.body.abs(), x.gauge)


def _rhos(x: GeneralizedNumber) -> list[float]:
    return [x.gauge.rho_float(float(e)) for e in x.body.schedule]


def _log_rhos(x: GeneralizedNumber) -> list[float]:
    return [math.log10(r) for r in _rhos(x)]


def slope_fit(log_rhos: list[float], values: list[float]):
    """Least-squares slope of log10|v| against log10(rho).

    Returns (slope, rms_residual, n_usable).  Zero samples are skipped; a
    cloud with fewer than three usable points yields (None, inf, n).
    """
    xs, ys = [], []
    for lr, v in zip(log_rhos, values):
        if v != 0 and math.isfinite(v):
            xs.append(lr)
            ys.append(math.log10(abs(v)))
    if len(xs) < 3:
        return None, math.inf, len(xs)
    slope, intercept = linear_regression(xs, ys)
    resid = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    rms = math.sqrt(sum(r * r for r in resid) / len(resid))
    return slope, rms, len(xs)


def _classify_samples(values: list[float], log_rhos: list[float]) -> Verdict:
    if all(v == 0 for v in values):
        return Verdict("zero", exact=False, note="all samples exactly zero")
    slope, rms, n = slope_fit(log_rhos, values)
    if slope is not None and rms <= SLOPE_RESIDUAL_TOL:
        note = f"slope {slope:.3f}, rms {rms:.3f} over {n} samples"
        if slope > 0.05:
            return Verdict("infinitesimal", exact=False, note=note)
        if slope < -0.05:
            return Verdict("infinite", exact=False, note=note)
        return Verdict("finite_invertible", exact=False, note=note)
    # no linear fit: check for monotone super-polynomial growth or decay
    mags = [abs(v) for v in values if math.isfinite(v)]
    if len(mags) >= 4:
        grow = all(b > a for a, b in zip(mags[-5:], mags[-4:]))
        if grow and mags[-1] > mags[0] * 1e6:
            return Verdict("infinite", exact=False,
                           note="monotone growth beyond any fitted power")
        decay = all(b < a for a, b in zip(mags[-5:], mags[-4:]))
        if decay and mags[-1] < mags[0] * 1e-6:
            return Verdict("infinitesimal", exact=False,
                           note="monotone decay beyond any fitted power")
    return Verdict("undetermined", exact=False,
                   note=f"fit residual {rms:.3f} exceeds {SLOPE_RESIDUAL_TOL}")


def _moderate_samples(values: list[float], rhos: list[float]) -> Verdict:
    mags = [abs(v) for v in values]
    if any(not math.isfinite(m) for m in mags):
        return Verdict("no", exact=False, note="non-finite samples")
    half = len(mags) // 2
    for n in range(MODERATE_EXPONENT_CAP + 1):
        scaled = [m * r**n for m, r in zip(mags, rhos)]
        headroom = max(scaled[:half] or scaled) * 8 + 1e-12
        if max(scaled) <= 10.0 and max(scaled[half:]) <= headroom:
            return Verdict("yes", bound=n, exact=False,
                           note=f"bounded by {max(scaled):.3g} * rho^-{n} on schedule")
    scaled = [m * r**MODERATE_EXPONENT_CAP for m, r in zip(mags, rhos)]
    if all(b > a for a, b in zip(scaled[-5:], scaled[-4:])):
        return Verdict("no", exact=False,
                       note=f"grows past rho^-{MODERATE_EXPONENT_CAP}")
    return Verdict("undetermined", exact=False,
                   note="no bounding exponent found and growth not monotone")
