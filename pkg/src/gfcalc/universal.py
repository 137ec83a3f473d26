"""Morphism checks: does a theory receive the distribution layer through
derivatives of an embedding, and does it do so in only one way?

A target bundles three callables: embed a continuous function, take a
derivative, decide equality.  The canonical candidate morphism sends a
pair (order, rep) to the order-th derivative of the embedded rep.  The
checks here audit that this is well defined (presentations of the same
distribution land on equal values), that it interacts correctly with
derivatives and with plain embeddings, and that an independently built
witness agrees with it everywhere.  Reports are JSON-friendly dicts; the
``require`` helper turns a failing report into an exception for callers
that want a hard stop.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .formal import (FormalDistribution, fd_add, fd_derive, fd_equal,
                     fd_lambda, fd_pair, fd_raise, fd_restrict)
from .gauge import GaugeExpr, GeneralizedNumber, classify, invert
from .gsf import (CLASS_EQUAL_EPS, GSFunction, class_equal,
                  embed_distribution, gsf_derive, pair_at_eps)
from .piecewise import Interval, PiecewisePoly, abs_1d, ramp_1d
from .poly import Poly
from .samples import (enumerate_sections, random_distribution,
                      random_gauge_expr, random_pp_1d)
from .sheaf import DyadicBase


class UniversalError(RuntimeError):
    pass


@dataclass(frozen=True)
class Target:
    """A receiving theory, described operationally."""

    name: str
    embed: Callable[[PiecewisePoly], object]
    derive: Callable[[object], object]
    equal: Callable[[object, object], bool]


def identity_target() -> Target:
    return Target("identity",
                  embed=fd_lambda,
                  derive=lambda t: fd_derive(t, 0),
                  equal=fd_equal)


def shifted_target(shift: int = 1) -> Target:
    """Same theory presented at a higher order; a relabeling, not a new
    home."""
    if shift < 1:
        raise ValueError("shift must be positive")

    def embed(f: PiecewisePoly) -> FormalDistribution:
        return fd_raise(fd_lambda(f), (shift,))

    return Target(f"order-shifted({shift})",
                  embed=embed,
                  derive=lambda t: fd_derive(t, 0),
                  equal=fd_equal)


def colombeau_target(kernel_degree: int = 8,
                     eps_list: Sequence[Fraction] = CLASS_EQUAL_EPS) -> Target:
    def embed(f: PiecewisePoly) -> GSFunction:
        return embed_distribution(fd_lambda(f), kernel_degree)

    def equal(a: GSFunction, b: GSFunction) -> bool:
        return class_equal(a, b, eps_list).kind == "yes"

    return Target(f"colombeau(p={kernel_degree})",
                  embed=embed,
                  derive=gsf_derive,
                  equal=equal)


def psi(target: Target, t: FormalDistribution):
    """The canonical morphism: derivative-of-embedding of the rep."""
    out = target.embed(t.rep)
    for _ in range(t.order[0]):
        out = target.derive(out)
    return out


def psi_raised(target: Target, t: FormalDistribution):
    """Independently built witness: raise the presentation first, then
    apply the same recipe.  Any factorization through the canonical form
    must agree with this one."""
    lifted = fd_raise(t, (t.order[0] + 1,))
    return psi(target, lifted)


def _report(name: str, laws: dict, extra: Optional[dict] = None) -> dict:
    out = {"instance": name, "laws": list(laws.values())}
    if extra:
        out.update(extra)
    out["pass"] = all(not law["failures"] for law in laws.values())
    return out


def _law_table(names) -> dict:
    return {n: {"law": n, "cases": 0, "failures": []} for n in names}


def _record(laws: dict, name: str, ok: bool, detail) -> None:
    laws[name]["cases"] += 1
    if not ok:
        laws[name]["failures"].append(detail)


def check_morphism(target: Target,
                   sections: Sequence[tuple[Interval, FormalDistribution]],
                   seed: int = 0) -> dict:
    """Audit the canonical morphism over an explicit catalog of sections.

    Laws: equal inputs give equal outputs (checked against a randomly
    raised presentation), derivatives pass through, order-zero sections
    land on their plain embedding, and distinct inputs stay distinct.
    """
    rng = random.Random(seed)
    laws = _law_table(("well_defined", "derivative_compat",
                       "embeds_plainly", "separates"))
    for idx, (iv, t) in enumerate(sections):
        detail = {"case": idx, "order": t.order[0]}
        image = psi(target, t)

        bump = t.order[0] + rng.randrange(1, 3)
        variant = fd_raise(t, (bump,))
        _record(laws, "well_defined",
                target.equal(image, psi(target, variant)), detail)

        _record(laws, "derivative_compat",
                target.equal(psi(target, fd_derive(t, 0)),
                             target.derive(image)), detail)

        if t.order[0] == 0:
            _record(laws, "embeds_plainly",
                    target.equal(image, target.embed(t.rep)), detail)

        shifted = fd_add(t, fd_lambda(_unit_rep(iv)))
        _record(laws, "separates",
                not target.equal(image, psi(target, shifted)), detail)
    return _report(target.name, laws, {"sections": len(sections),
                                       "seed": seed})


def _unit_rep(iv: Interval) -> PiecewisePoly:
    return PiecewisePoly.from_poly(iv, Poly.const(iv.dim, Fraction(1)))


def check_uniqueness(target: Target,
                     sections: Sequence[tuple[Interval, FormalDistribution]]
                     ) -> dict:
    """Two independently constructed witnesses must agree everywhere."""
    laws = _law_table(("witnesses_agree",))
    for idx, (iv, t) in enumerate(sections):
        _record(laws, "witnesses_agree",
                target.equal(psi(target, t), psi_raised(target, t)),
                {"case": idx, "order": t.order[0]})
    return _report(target.name, laws, {"sections": len(sections)})


def check_factorization(sections: Sequence[tuple[Interval,
                                                 FormalDistribution]]
                        ) -> dict:
    """The identity carrier factors the inclusion: the canonical morphism
    into the distribution layer itself reproduces its input."""
    laws = _law_table(("reproduces_input",))
    target = identity_target()
    for idx, (iv, t) in enumerate(sections):
        _record(laws, "reproduces_input", fd_equal(psi(target, t), t),
                {"case": idx, "order": t.order[0]})
    return _report("identity-carrier", laws, {"sections": len(sections)})


def check_colombeau_tau(interval: Optional[Interval] = None,
                        kernel_degree: int = 8,
                        eps_list: Sequence[Fraction] = CLASS_EQUAL_EPS,
                        tol: float = 1e-3) -> dict:
    """Pairing consistency of the mollified embedding.

    For sample distributions T and a flat-at-the-edges test function, the
    exact pairing of the instantiated embedding against the test function
    must approach the formal pairing as the parameter shrinks, and land
    within tolerance at the smallest sampled value.
    """
    iv = interval if interval is not None else Interval.of_1d(-2, 2)
    r = iv.radii[0]
    flat = Poly.const(1, r ** -8)
    edge = Poly(1, {(0,): r * r, (2,): Fraction(-1)})
    for _ in range(4):
        flat = flat * edge
    phi = PiecewisePoly.from_poly(iv, flat)
    subjects = [
        ("point mass", FormalDistribution((2,), ramp_1d(iv))),
        ("kink", fd_lambda(abs_1d(iv))),
        ("square", fd_lambda(PiecewisePoly.from_poly(
            iv, Poly(1, {(2,): Fraction(1)})))),
    ]
    laws = _law_table(("pairing_converges",))
    rows = []
    for name, t in subjects:
        formal = fd_pair(t, phi)
        emb = embed_distribution(t, kernel_degree)
        errs = [abs(float(pair_at_eps(emb, phi, e) - formal))
                for e in sorted(eps_list, reverse=True)]
        ok = all(a >= b for a, b in zip(errs, errs[1:])) and errs[-1] <= tol
        rows.append({"subject": name, "errors": errs})
        _record(laws, "pairing_converges", ok, {"subject": name,
                                                "errors": errs})
    return _report("colombeau-tau", laws, {"subjects": rows})


def check_quotient_ring_conditions(seed: int = 0, cases: int = 1000) -> dict:
    """Ring laws and the quotient-specific conditions on gauge numbers.

    Random exact series exercise commutativity, associativity, and
    distributivity; each sample is also classified, dominated by the
    standard witness (one plus the leading size, one order below the
    leading exponent), and inverted when its class permits.
    """
    rng = random.Random(seed)
    laws = _law_table(("ring_laws", "classification", "domination",
                       "inversion"))
    for case in range(cases):
        x = random_gauge_expr(rng)
        y = random_gauge_expr(rng)
        z = random_gauge_expr(rng)
        detail = {"case": case}
        ok = (x + y == y + x and x * y == y * x
              and (x + y) + z == x + (y + z)
              and (x * y) * z == x * (y * z)
              and x * (y + z) == x * y + x * z
              and x + GaugeExpr.const(0) == x
              and x * GaugeExpr.const(1) == x)
        _record(laws, "ring_laws", ok, detail)

        n = GeneralizedNumber(x)
        kind = classify(n).kind
        lead = x.leading
        if lead is None:
            expected = "zero"
        elif lead[0] > 0:
            expected = "infinitesimal"
        elif lead[0] == 0:
            expected = "finite_invertible"
        else:
            expected = "infinite"
        _record(laws, "classification", kind == expected,
                {**detail, "kind": kind, "expected": expected})

        if lead is not None:
            a0, c0 = lead
            witness = GaugeExpr.rho(min(a0, Fraction(0)) - 1) \
                .scale(abs(c0) + 1)
            gap = witness - x.abs()
            _record(laws, "domination", gap.sign() > 0,
                    {**detail, "witness": str(witness.terms)})

        if lead is not None:
            inv = x.invert(order=6)
            residue = x * inv - GaugeExpr.const(1)
            _record(laws, "inversion",
                    residue.classify() in ("zero", "infinitesimal"),
                    {**detail, "residue": residue.classify()})
    return _report("gauge-number ring", laws, {"seed": seed, "cases": cases})


def check_functor_laws(region: Optional[Interval] = None, level: int = 5,
                       seed: int = 0, cases: int = 200,
                       sampler=None) -> dict:
    """Restriction is functorial and natural over a dyadic base.

    Checks identity and composition of restriction, compatibility with
    addition and derivative, and naturality of the continuous-function
    embedding under restriction.
    """
    base = DyadicBase(region if region is not None else Interval.of_1d(-2, 2),
                      level)
    rng = random.Random(seed)
    draw = sampler if sampler is not None else random_distribution
    laws = _law_table(("restrict_id", "restrict_compose", "restrict_add",
                       "restrict_derive", "embed_natural"))
    n = 2 ** base.level
    for case in range(cases):
        i = rng.randrange(0, n - 2)
        j = rng.randrange(i + 3, n + 1)
        u = base.span_interval([(i, j)])
        a = rng.randrange(i, j - 1)
        b = rng.randrange(a + 2, j + 1)
        v = base.span_interval([(a, b)])
        c = rng.randrange(a, b)
        d = rng.randrange(c + 1, b + 1)
        w = base.span_interval([(c, d)])
        t = draw(rng, u)
        s = draw(rng, u)
        detail = {"case": case}
        _record(laws, "restrict_id", fd_equal(fd_restrict(t, u), t), detail)
        _record(laws, "restrict_compose",
                fd_equal(fd_restrict(fd_restrict(t, v), w),
                         fd_restrict(t, w)), detail)
        _record(laws, "restrict_add",
                fd_equal(fd_restrict(fd_add(t, s), v),
                         fd_add(fd_restrict(t, v), fd_restrict(s, v))),
                detail)
        _record(laws, "restrict_derive",
                fd_equal(fd_restrict(fd_derive(t, 0), v),
                         fd_derive(fd_restrict(t, v), 0)), detail)
        f = random_pp_1d(rng, u)
        _record(laws, "embed_natural",
                fd_equal(fd_restrict(fd_lambda(f), v),
                         fd_lambda(f.restrict(v))), detail)
    return _report("restriction functor", laws,
                   {"level": level, "seed": seed})


def standard_catalog(level: int = 4, alpha_cap: int = 4,
                     deg_cap: int = 5,
                     region: Optional[Interval] = None
                     ) -> list[tuple[Interval, FormalDistribution]]:
    iv = region if region is not None else Interval.of_1d(-2, 2)
    return enumerate_sections(iv, level, alpha_cap, deg_cap)


def require(report: dict) -> dict:
    if not report.get("pass", False):
        failing = [law["law"] for law in report.get("laws", [])
                   if law["failures"]]
        raise UniversalError(
            f"{report.get('instance', 'check')} failed: {', '.join(failing)}")
    return report
