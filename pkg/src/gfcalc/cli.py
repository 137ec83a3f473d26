"""Command-line front end.

Verbs: gn (numbers), dist (formal distributions), sheaf (gluing and
laws), gsf (the algebra), verify (structural law suites), plot
(regularization curves).  Objects travel as JSON documents, the
one-dimensional mini-syntax, or @name references into a workspace file.
Exit codes: 0 success or pass, 1 a false query or failed verification,
2 usage or malformed input, with an error document on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from .formal import (DistributionError, FormalDistribution, fd_add, fd_derive,
                     fd_equal, fd_pair, fd_restrict)
from .gauge import (CANONICAL_GAUGE, Gauge, GaugeError, GeneralizedNumber,
                    classify)
from .gsf import (GSFError, GSFunction, GeneralizedPoint, class_equal,
                  embed_distribution, gsf_derive, gsf_eval)
from .minisyntax import MiniSyntaxError, parse_dist, parse_pp
from .piecewise import Interval, PiecewiseError, PiecewisePoly
from .serialization import (WireError, dist_from_json, dist_to_json,
                            family_from_json, frac_to_str, from_tagged,
                            gn_from_json, gsf_from_json, gsf_to_json,
                            to_tagged, verdict_to_json)
from .sheaf import (DistributionPresheaf, DyadicBase, SheafError,
                    glue_distributions, sheaf_laws_check)

USAGE_ERRORS = (WireError, MiniSyntaxError, PiecewiseError,
                DistributionError, SheafError, GSFError, GaugeError,
                json.JSONDecodeError, ValueError, OSError)


class _Parser(argparse.ArgumentParser):
    # argparse prints usage text; the contract wants an error document
    def error(self, message):
        _fail(message)


def _fail(message: str):
    json.dump({"error": "usage", "message": message}, sys.stderr)
    sys.stderr.write("\n")
    raise SystemExit(2)


class Workspace:
    """Named bindings plus configuration, stored as one JSON file."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self.bindings: dict = {}
        self.config: dict = {}
        if path is not None:
            try:
                with open(path) as fh:
                    doc = json.load(fh)
                self.bindings = dict(doc.get("bindings", {}))
                self.config = dict(doc.get("config", {}))
            except FileNotFoundError:
                pass

    def resolve(self, name: str):
        if name not in self.bindings:
            raise WireError(f"no binding named {name!r}")
        return from_tagged(self.bindings[name])

    def store(self, name: str, obj) -> None:
        self.bindings[name] = to_tagged(obj)
        if self.path is None:
            raise WireError("--save needs --workspace")
        with open(self.path, "w") as fh:
            json.dump({"config": self.config, "bindings": self.bindings},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")


# -- argument decoding -------------------------------------------------------

def _domain(args) -> Interval:
    lo, _, hi = args.on.partition(":")
    try:
        lo, hi = Fraction(lo), Fraction(hi)
    except (ValueError, ZeroDivisionError):
        _fail(f"bad interval {args.on!r}, want LO:HI")
    if lo >= hi:
        _fail("empty interval")
    return Interval.of_1d(lo, hi)


def _gauge(args) -> Gauge:
    return Gauge(power=Fraction(args.gauge)) if args.gauge else CANONICAL_GAUGE


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        _fail(f"bad rational {text!r}")


def _eps_list(text: str) -> list[Fraction]:
    out = [_frac(part) for part in text.split(",") if part]
    if not out or any(e <= 0 for e in out):
        _fail("--eps wants positive comma-separated values")
    return out


def _load_dist(text: str, ws: Workspace, args) -> FormalDistribution:
    if text.startswith("@"):
        obj = ws.resolve(text[1:])
        if not isinstance(obj, FormalDistribution):
            raise WireError(f"{text} is not a distribution")
        return obj
    if text.lstrip().startswith("{"):
        return dist_from_json(json.loads(text))
    return parse_dist(text, _domain(args))


def _load_pp(text: str, ws: Workspace, args) -> PiecewisePoly:
    if text.startswith("@"):
        obj = ws.resolve(text[1:])
        if not isinstance(obj, PiecewisePoly):
            raise WireError(f"{text} is not a piecewise polynomial")
        return obj
    if text.lstrip().startswith("{"):
        from .serialization import pp_from_json
        return pp_from_json(json.loads(text))
    return parse_pp(text, _domain(args))


def _load_gsf(text: str, ws: Workspace, args) -> GSFunction:
    if text.startswith("@"):
        obj = ws.resolve(text[1:])
        if not isinstance(obj, GSFunction):
            raise WireError(f"{text} is not a generalized function")
        return obj
    if text.lstrip().startswith("{"):
        return gsf_from_json(json.loads(text))
    # anything else embeds: a distribution literal or a plain expression
    if text.lstrip().startswith("(("):
        t = parse_dist(text, _domain(args))
    else:
        from .formal import fd_lambda
        t = fd_lambda(parse_pp(text, _domain(args)))
    return embed_distribution(t, kernel_degree=args.kernel)


def _emit(doc, args, save=None, ws=None) -> None:
    if save is not None and args.save:
        ws.store(args.save, save)
    json.dump(doc, sys.stdout, indent=None if args.compact else 2,
              sort_keys=True)
    sys.stdout.write("\n")


def _scalar(q: Fraction, args) -> None:
    print(repr(float(q)) if args.float else frac_to_str(q))


def _bool(flag: bool) -> int:
    print("true" if flag else "false")
    return 0 if flag else 1


def _report_out(report: dict, args) -> int:
    if args.json:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        for law in report["laws"]:
            state = "pass" if not law["failures"] else "FAIL"
            print(f"{law['law']}: {state} ({law['cases']} cases,"
                  f" {len(law['failures'])} failures)")
    return 0 if report["pass"] else 1


# -- command handlers --------------------------------------------------------

def cmd_gn(args, ws: Workspace) -> int:
    if args.number.startswith("@"):
        x = ws.resolve(args.number[1:])
        if not isinstance(x, GeneralizedNumber):
            raise WireError(f"{args.number} is not a number")
    else:
        x = gn_from_json(json.loads(args.number))
    if args.gauge:
        x = GeneralizedNumber(x.body, _gauge(args))
    if args.action == "eval":
        if args.eps is None:
            _fail("gn eval needs --eps")
        _scalar(x.eval_exact(_frac(args.eps)), args)
        return 0
    v = classify(x)
    if args.json:
        _emit(verdict_to_json(v), args)
    else:
        tag = "exact" if v.exact else "sampled"
        print(f"{v.kind} ({tag})" + (f": {v.note}" if v.note else ""))
    return 0


def cmd_dist(args, ws: Workspace) -> int:
    t = _load_dist(args.first, ws, args)
    if args.action == "new":
        _emit(dist_to_json(t), args, save=t, ws=ws)
        return 0
    if args.action == "derive":
        out = fd_derive(t, args.axis)
        _emit(dist_to_json(out), args, save=out, ws=ws)
        return 0
    if args.action == "add":
        out = fd_add(t, _load_dist(args.second, ws, args))
        _emit(dist_to_json(out), args, save=out, ws=ws)
        return 0
    if args.action == "eq":
        return _bool(fd_equal(t, _load_dist(args.second, ws, args)))
    if args.action == "pair":
        _scalar(fd_pair(t, _load_pp(args.second, ws, args)), args)
        return 0
    lo, _, hi = args.to.partition(":")
    sub = Interval.of_1d(_frac(lo), _frac(hi))
    out = fd_restrict(t, sub)
    _emit(dist_to_json(out), args, save=out, ws=ws)
    return 0


def cmd_sheaf(args, ws: Workspace) -> int:
    if args.action == "glue":
        fam = family_from_json(json.loads(args.family))
        if args.to:
            lo, _, hi = args.to.partition(":")
            target = Interval.of_1d(_frac(lo), _frac(hi))
        else:
            lo = min(iv.lo(0) for iv in fam.cover)
            hi = max(iv.hi(0) for iv in fam.cover)
            target = Interval.of_1d(lo, hi)
        glued = glue_distributions(target, fam)
        if glued is None:
            _emit({"glued": None, "reason": "cover does not chain across "
                   "the target"}, args)
            return 1
        _emit(dist_to_json(glued), args, save=glued, ws=ws)
        return 0
    from .formal import fd_derive as lift_derive
    from .samples import equivalent_variant, random_distribution
    base = DyadicBase(_domain(args), args.level)
    report = sheaf_laws_check(DistributionPresheaf(), base, args.cases,
                              args.seed, random_distribution,
                              variant=equivalent_variant,
                              lift=lambda iv, t: lift_derive(t, 0))
    return _report_out(report, args)


def cmd_gsf(args, ws: Workspace) -> int:
    if args.action == "embed":
        t = _load_dist(args.first, ws, args)
        f = embed_distribution(t, kernel_degree=args.kernel)
        _emit(gsf_to_json(f), args, save=f, ws=ws)
        return 0
    f = _load_gsf(args.first, ws, args)
    if args.action == "eval":
        pt = GeneralizedPoint.make((_frac(args.at),))
        value = gsf_eval(f, pt)
        if args.eps is not None:
            _scalar(value.eval_exact(_frac(args.eps)), args)
        else:
            from .serialization import gn_to_json
            _emit(gn_to_json(value), args)
        return 0
    if args.action == "derive":
        out = gsf_derive(f, 0)
        _emit(gsf_to_json(out), args, save=out, ws=ws)
        return 0
    g = _load_gsf(args.second, ws, args)
    v = class_equal(f, g)
    if args.json:
        _emit(verdict_to_json(v), args)
    else:
        tag = "exact" if v.exact else "sampled"
        print(f"{v.kind} ({tag})" + (f": {v.note}" if v.note else ""))
    return 0 if v.kind == "yes" else 1


def cmd_verify(args, ws: Workspace) -> int:
    from . import universal as uv
    if args.action == "psi":
        catalog = uv.standard_catalog(level=args.level,
                                      alpha_cap=args.alpha_cap,
                                      deg_cap=args.deg_cap,
                                      region=_domain(args))
        targets = {"identity": uv.identity_target,
                   "shifted": uv.shifted_target,
                   "colombeau": uv.colombeau_target}
        names = list(targets) if args.target == "all" else [args.target]
        code = 0
        for name in names:
            report = uv.check_morphism(targets[name](), catalog,
                                       seed=args.seed)
            if not args.json:
                print(f"[{name}]")
            code = max(code, _report_out(report, args))
        return code
    if args.action == "tau":
        return _report_out(uv.check_colombeau_tau(), args)
    if args.action == "ring":
        return _report_out(
            uv.check_quotient_ring_conditions(seed=args.seed,
                                              cases=args.cases), args)
    return _report_out(
        uv.check_functor_laws(region=_domain(args), level=args.level,
                              seed=args.seed, cases=args.cases), args)


def cmd_plot(args, ws: Workspace) -> int:
    from .plotting import regularization_rows, render_png, write_csv
    f = _load_gsf(args.subject, ws, args)
    rows = regularization_rows(f, _eps_list(args.eps), args.grid)
    if args.out:
        base = args.out[:-4] if args.out.endswith(".csv") else args.out
        with open(base + ".csv", "w") as fh:
            write_csv(rows, fh, float_mode=args.float)
        png = base + ".png"
    else:
        write_csv(rows, sys.stdout, float_mode=args.float)
        png = "regularization.png"
    render_png(rows, png)
    return 0


# -- wiring ------------------------------------------------------------------

def _common(sub):
    sub.add_argument("--workspace", help="JSON file of named bindings")
    sub.add_argument("--save", metavar="NAME",
                     help="store the result under NAME in the workspace")
    sub.add_argument("--on", default="-1:1", metavar="LO:HI",
                     help="domain for parsed expressions (default -1:1)")
    sub.add_argument("--gauge", metavar="P",
                     help="gauge power, rho = eps^P (default 1)")
    sub.add_argument("--kernel", type=int, default=8, metavar="P",
                     help="bump kernel degree for embeddings (default 8)")
    sub.add_argument("--json", action="store_true",
                     help="structured output for reports and verdicts")
    sub.add_argument("--float", action="store_true",
                     help="emit floats instead of exact rationals")
    sub.add_argument("--compact", action="store_true",
                     help="one-line JSON documents")


def build_parser() -> _Parser:
    top = _Parser(prog="gfcalc", description=__doc__.splitlines()[0])
    verbs = top.add_subparsers(dest="verb", required=True)

    gn = verbs.add_parser("gn", help="generalized numbers")
    gn.add_argument("action", choices=("eval", "classify"))
    gn.add_argument("number", help="number document (JSON)")
    gn.add_argument("--eps", help="evaluation parameter")
    _common(gn)

    dist = verbs.add_parser("dist", help="formal distributions")
    dist.add_argument("action", choices=("new", "derive", "add", "eq",
                                         "pair", "restrict"))
    dist.add_argument("first", help="distribution (literal, JSON, or @name)")
    dist.add_argument("second", nargs="?",
                      help="second operand where the action takes one")
    dist.add_argument("--axis", type=int, default=0)
    dist.add_argument("--to", metavar="LO:HI", help="restriction target")
    _common(dist)

    sheaf = verbs.add_parser("sheaf", help="gluing and sheaf laws")
    sheaf.add_argument("action", choices=("glue", "laws"))
    sheaf.add_argument("family", nargs="?",
                       help="family document (JSON), for glue")
    sheaf.add_argument("--to", metavar="LO:HI", help="gluing target")
    sheaf.add_argument("--level", type=int, default=5)
    sheaf.add_argument("--seed", type=int, default=0)
    sheaf.add_argument("--cases", type=int, default=200)
    _common(sheaf)

    gsf = verbs.add_parser("gsf", help="generalized smooth functions")
    gsf.add_argument("action", choices=("embed", "eval", "derive",
                                        "class-eq"))
    gsf.add_argument("first", help="function or distribution input")
    gsf.add_argument("second", nargs="?", help="second function, class-eq")
    gsf.add_argument("--at", default="0", help="evaluation point")
    gsf.add_argument("--eps", help="collapse the value at this parameter")
    _common(gsf)

    verify = verbs.add_parser("verify", help="structural law suites")
    verify.add_argument("action", choices=("psi", "tau", "ring", "q-laws"))
    verify.add_argument("--target", default="all",
                        choices=("all", "identity", "shifted", "colombeau"))
    verify.add_argument("--level", type=int, default=4)
    verify.add_argument("--alpha-cap", type=int, default=4)
    verify.add_argument("--deg-cap", type=int, default=5)
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--cases", type=int, default=200)
    _common(verify)
    verify.set_defaults(on="-2:2")

    plot = verbs.add_parser("plot", help="regularization curves")
    plot.add_argument("mode", choices=("reg",))
    plot.add_argument("subject", help="function or distribution input")
    plot.add_argument("--eps", default="1e-2,1e-3",
                      help="comma-separated parameter values")
    plot.add_argument("--grid", type=int, default=201)
    plot.add_argument("--out", metavar="BASE",
                      help="write BASE.csv and BASE.png instead of stdout")
    _common(plot)

    return top


_HANDLERS = {"gn": cmd_gn, "dist": cmd_dist, "sheaf": cmd_sheaf,
             "gsf": cmd_gsf, "verify": cmd_verify, "plot": cmd_plot}


def _check_operands(args) -> None:
    if args.verb == "dist":
        needs_second = args.action in ("add", "eq", "pair")
        if needs_second and args.second is None:
            _fail(f"dist {args.action} takes two operands")
        if args.action == "restrict" and not args.to:
            _fail("dist restrict needs --to LO:HI")
    if args.verb == "sheaf" and args.action == "glue" and not args.family:
        _fail("sheaf glue needs a family document")
    if args.verb == "gsf" and args.action == "class-eq" \
            and args.second is None:
        _fail("gsf class-eq takes two operands")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _check_operands(args)
    ws = Workspace(args.workspace)
    try:
        return _HANDLERS[args.verb](args, ws)
    except SystemExit:
        raise
    except USAGE_ERRORS as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
