"""JSON wire formats for the domain objects.

Rationals travel as strings ("3", "-7/2"); composite objects are plain
dicts and lists, expression trees are prefix-form lists.  Parsing a
printed document returns an equal object for every supported type.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .formal import FormalDistribution
from .gauge import (CANONICAL_GAUGE, Gauge, GaugeExpr, GeneralizedNumber,
                    Verdict)
from .gsf import GSFunction, SharpBall
from .nets import (Bump, Const, Cos, Exp, GaugePoly, Node, PiecewiseGauge,
                   Prod, RhoPow, Sin, Sum, Var)
from .piecewise import Interval, PiecewisePoly
from .poly import Poly
from .rationals import as_fraction
from .sheaf import CompatibleFamily

Json = Union[dict, list, str, int, float, bool, None]


class WireError(ValueError):
    pass


def frac_to_str(q) -> str:
    q = as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def frac_from_str(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise WireError(f"not a rational: {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise WireError(f"not a rational: {s!r}") from exc


# -- numbers -----------------------------------------------------------------

def gauge_to_json(g: Gauge) -> dict:
    return {"power": frac_to_str(g.power)}


def gauge_from_json(doc) -> Gauge:
    _want_keys(doc, {"power"}, "gauge")
    return Gauge(power=frac_from_str(doc["power"]))


def _body_to_json(x: GaugeExpr) -> dict:
    # wire pairs are coefficient-first
    return {"terms": [[frac_to_str(c), frac_to_str(a)] for a, c in x.terms],
            "trunc": "inf" if x.trunc is None else frac_to_str(x.trunc)}


def _body_from_json(doc) -> GaugeExpr:
    _want_keys(doc, {"terms", "trunc"}, "series")
    pairs = [(frac_from_str(a), frac_from_str(c)) for c, a in doc["terms"]]
    trunc = None if doc["trunc"] == "inf" else frac_from_str(doc["trunc"])
    return GaugeExpr.make(pairs, trunc)


def gn_to_json(x: GeneralizedNumber) -> dict:
    if not x.is_symbolic:
        raise WireError("opaque nets have no exact wire form")
    out = _body_to_json(x.body)
    out["gauge"] = gauge_to_json(x.gauge)
    return out


def gn_from_json(doc) -> GeneralizedNumber:
    _want_keys(doc, {"terms", "trunc", "gauge"}, "number")
    body = _body_from_json({"terms": doc["terms"], "trunc": doc["trunc"]})
    return GeneralizedNumber(body, gauge_from_json(doc["gauge"]))


# -- intervals and piecewise polynomials -------------------------------------

def interval_to_json(iv: Interval) -> dict:
    return {"c": [frac_to_str(v) for v in iv.center],
            "r": [frac_to_str(v) for v in iv.radii]}


def interval_from_json(doc) -> Interval:
    _want_keys(doc, {"c", "r"}, "interval")
    return Interval.make(tuple(frac_from_str(v) for v in doc["c"]),
                         tuple(frac_from_str(v) for v in doc["r"]))


def poly_terms_to_json(p: Poly) -> list:
    return [[frac_to_str(c), list(e)] for e, c in sorted(p.terms.items())]


def poly_terms_from_json(rows, nvars: int) -> Poly:
    terms = {}
    for c, e in rows:
        if len(e) != nvars:
            raise WireError("exponent arity mismatch")
        terms[tuple(int(k) for k in e)] = frac_from_str(c)
    return Poly(nvars, terms)


def pp_to_json(f: PiecewisePoly) -> dict:
    cells = {",".join(str(i) for i in idx): poly_terms_to_json(p)
             for idx, p in sorted(f.cells.items())}
    return {"domain": interval_to_json(f.domain),
            "breaks": [[frac_to_str(b) for b in axis] for axis in f.breaks],
            "cells": cells}


def pp_from_json(doc) -> PiecewisePoly:
    _want_keys(doc, {"domain", "breaks", "cells"}, "piecewise polynomial")
    domain = interval_from_json(doc["domain"])
    breaks = tuple(tuple(frac_from_str(b) for b in axis)
                   for axis in doc["breaks"])
    cells = {}
    for key, rows in doc["cells"].items():
        idx = tuple(int(p) for p in key.split(","))
        cells[idx] = poly_terms_from_json(rows, domain.dim)
    return PiecewisePoly(domain, breaks, cells)


def dist_to_json(t: FormalDistribution) -> dict:
    return {"order": list(t.order), "rep": pp_to_json(t.rep)}


def dist_from_json(doc) -> FormalDistribution:
    _want_keys(doc, {"order", "rep"}, "distribution")
    return FormalDistribution(tuple(int(k) for k in doc["order"]),
                              pp_from_json(doc["rep"]))


def family_to_json(fam: CompatibleFamily) -> dict:
    return {"cover": [interval_to_json(iv) for iv in fam.cover],
            "sections": [dist_to_json(t) for t in fam.sections]}


def family_from_json(doc) -> CompatibleFamily:
    _want_keys(doc, {"cover", "sections"}, "family")
    return CompatibleFamily(
        tuple(interval_from_json(d) for d in doc["cover"]),
        tuple(dist_from_json(d) for d in doc["sections"]))


# -- expression trees --------------------------------------------------------

def net_to_json(node: Node) -> list:
    if isinstance(node, Const):
        return ["const", frac_to_str(node.value)]
    if isinstance(node, Var):
        return ["var", node.axis]
    if isinstance(node, RhoPow):
        return ["rho", frac_to_str(node.exponent)]
    if isinstance(node, Sum):
        return ["sum"] + [net_to_json(c) for c in node.children]
    if isinstance(node, Prod):
        return ["prod"] + [net_to_json(c) for c in node.children]
    if isinstance(node, Sin):
        return ["sin", net_to_json(node.child)]
    if isinstance(node, Cos):
        return ["cos", net_to_json(node.child)]
    if isinstance(node, Exp):
        return ["exp", net_to_json(node.child)]
    if isinstance(node, Bump):
        return ["bump", node.p, net_to_json(node.child)]
    if isinstance(node, PiecewiseGauge):
        return ["pw", interval_to_json(node.domain),
                [[frac_to_str(b), frac_to_str(s)] for b, s in node.breaks],
                [_cell_to_json(c) for c in node.cells]]
    raise WireError(f"unknown node {type(node).__name__}")


def _cell_to_json(cell: GaugePoly) -> dict:
    return {"anchor": frac_to_str(cell.anchor),
            "coeffs": [_body_to_json(c) for c in cell.coeffs]}


def _cell_from_json(doc) -> GaugePoly:
    _want_keys(doc, {"anchor", "coeffs"}, "cell")
    return GaugePoly(tuple(_body_from_json(c) for c in doc["coeffs"]),
                     frac_from_str(doc["anchor"]))


def net_from_json(doc) -> Node:
    if not isinstance(doc, list) or not doc:
        raise WireError("a tree node is a nonempty list")
    tag, args = doc[0], doc[1:]
    if tag == "const" and len(args) == 1:
        return Const(frac_from_str(args[0]))
    if tag == "var" and len(args) == 1:
        return Var(int(args[0]))
    if tag == "rho" and len(args) == 1:
        return RhoPow(frac_from_str(args[0]))
    if tag == "sum" and args:
        return Sum(tuple(net_from_json(c) for c in args))
    if tag == "prod" and args:
        return Prod(tuple(net_from_json(c) for c in args))
    if tag in ("sin", "cos", "exp") and len(args) == 1:
        kind = {"sin": Sin, "cos": Cos, "exp": Exp}[tag]
        return kind(net_from_json(args[0]))
    if tag == "bump" and len(args) == 2:
        return Bump(int(args[0]), net_from_json(args[1]))
    if tag == "pw" and len(args) == 3:
        return PiecewiseGauge(
            interval_from_json(args[0]),
            tuple((frac_from_str(b), frac_from_str(s)) for b, s in args[1]),
            tuple(_cell_from_json(c) for c in args[2]))
    raise WireError(f"malformed tree node {doc!r}")


def gsf_to_json(f: GSFunction) -> dict:
    doc = {"net": net_to_json(f.net), "domain": interval_to_json(f.domain.box)}
    if f.gauge != CANONICAL_GAUGE:
        doc["gauge"] = gauge_to_json(f.gauge)
    return doc


def gsf_from_json(doc) -> GSFunction:
    _want_keys(doc, {"net", "domain"}, "function", optional={"gauge"})
    gauge = (gauge_from_json(doc["gauge"]) if "gauge" in doc
             else CANONICAL_GAUGE)
    return GSFunction(net_from_json(doc["net"]),
                      SharpBall(interval_from_json(doc["domain"])), gauge)


# -- verdicts and tagged envelopes -------------------------------------------

def verdict_to_json(v: Verdict) -> dict:
    return {"kind": v.kind, "bound": v.bound, "exact": v.exact,
            "note": v.note}


_TAGGED = {
    "number": (GeneralizedNumber, gn_to_json, gn_from_json),
    "interval": (Interval, interval_to_json, interval_from_json),
    "pp": (PiecewisePoly, pp_to_json, pp_from_json),
    "dist": (FormalDistribution, dist_to_json, dist_from_json),
    "family": (CompatibleFamily, family_to_json, family_from_json),
    "gsf": (GSFunction, gsf_to_json, gsf_from_json),
}


def to_tagged(obj) -> dict:
    """Wrap a domain object as {"type": tag, "value": doc} for storage."""
    for tag, (cls, enc, _) in _TAGGED.items():
        if isinstance(obj, cls):
            return {"type": tag, "value": enc(obj)}
    raise WireError(f"no wire form for {type(obj).__name__}")


def from_tagged(doc):
    _want_keys(doc, {"type", "value"}, "binding")
    if doc["type"] not in _TAGGED:
        raise WireError(f"unknown binding type {doc['type']!r}")
    return _TAGGED[doc["type"]][2](doc["value"])


def _want_keys(doc, required: set, what: str, optional: set = frozenset()):
    if not isinstance(doc, dict):
        raise WireError(f"a {what} document must be an object")
    missing = required - doc.keys()
    if missing:
        raise WireError(f"{what} document lacks {sorted(missing)}")
    extra = doc.keys() - required - optional
    if extra:
        raise WireError(f"{what} document has stray keys {sorted(extra)}")
