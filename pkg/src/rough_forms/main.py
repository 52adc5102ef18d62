"""
Rough forms command-line interface.

Every subcommand prints one report on stdout (JSON by default, CSV tables
with --format csv); diagnostics go to stderr. Exit codes: 0 success,
2 usage or validation errors, 3 non-convergence (or a failed certification
under --strict), 4 level budget exceeded.
"""
import argparse
import csv
import io
import json
import logging
import os
import sys

# Add the parent directory to the Python path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from src.rough_forms.config import load_config, section
from src.rough_forms.errors import (
    BudgetError,
    DegreeError,
    DimensionError,
    DivergentGaugeError,
    ExpressionError,
    InsufficientDataError,
    NonConvergentError,
    OracleError,
    ParameterError,
)
from src.rough_forms.expr import eval_batch, parse_expr
from src.rough_forms.funcs import from_expression
from src.rough_forms.germ import Gauge, SamplerConfig, abs_increment, coboundary, cup, seminorm_estimate, signed_area
from src.rough_forms.integrals import ZustOptions, pullback_curve, pullback_surface, stokes_check, young, zust
from src.rough_forms.rough import (
    pure_area_2d_integral,
    pure_area_antiderivative,
    pure_area_young,
    pure_area_zust,
)
from src.rough_forms.sew import CertifyConfig, SewOptions, certify_sewn, sew_eval
from src.rough_forms.simplex import Simplex

logger = logging.getLogger("rough_forms")

SCHEMA = "roughforms/1"
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENT = 3
EXIT_BUDGET = 4
TABLE_COLUMNS = ("level", "n_leaves", "partial_sum", "increment", "rate_estimate")


class CertificationFailed(Exception):
    """Raised under --strict when a sewn germ fails certification."""

    def __init__(self, payload):
        super().__init__("certification failed")
        self.payload = payload


def setup_logging(config, debug=False):
    """Configure stderr logging once; --debug wins over [logging].level."""
    level = "DEBUG" if debug else str(section(config, "logging").get("level", "WARNING")).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def sew_options(config, args):
    return SewOptions.from_config(
        config,
        max_level=args.max_level,
        abs_tol=args.abs_tol,
        rel_tol=args.rel_tol,
        variant=args.variant,
        extrapolate=True if args.extrapolate else None,
        threads=args.threads,
    )


def _scalar(text, dim, alpha=None):
    return from_expression(text, dim, holder_alpha=alpha)


def _simplex(text, degree=None):
    s = Simplex.parse(text)
    if degree is not None and s.degree != degree:
        raise DegreeError(f"expected a simplex with {degree + 1} vertices, got {text!r}")
    return s


def _numbers(text, kind, flag):
    try:
        return [kind(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"{flag} expects comma-separated numbers, got {text!r}") from None


def _point_map(text):
    """``"e1; e2; ..."`` as a vectorized map (N, m) -> (N, d)."""
    exprs = [parse_expr(part) for part in text.split(";") if part.strip()]
    if not exprs:
        raise ParameterError("--phi needs at least one component expression")

    def phi(points):
        return np.stack([eval_batch(e, points) for e in exprs], axis=1)

    return phi


def _table(report):
    return [dict(zip(TABLE_COLUMNS, row)) for row in report.table_rows()]


def _certify(germ, args, config, opts, dim):
    overrides = {"seed": args.seed} if args.seed is not None else {}
    cert = certify_sewn(germ, config=CertifyConfig.from_config(config, **overrides), dim=dim, opts=opts)
    if args.strict and not cert.passed:
        raise CertificationFailed(cert.to_dict())
    return cert.to_dict()


def cmd_young(args, config):
    """Young integral f dg over a segment, or a named germ sewn on it."""
    seg = _simplex(args.simplex, 1)
    opts = sew_options(config, args)
    if args.germ:
        germ = abs_increment()
        report = sew_eval(germ, seg, opts)
        out = {"germ": args.germ, "value": report.value, "report": report.to_dict()}
    else:
        if args.f is None or args.g is None:
            raise ParameterError("young needs --f and --g (or --germ)")
        f, g = _scalar(args.f, seg.dim, args.alpha_f), _scalar(args.g, seg.dim, args.alpha_g)
        germ = cup(f.as_germ(), coboundary(g.as_germ()))
        result = young(f, g, seg, opts)
        report = result.report
        out = result.to_dict()
    if args.table:
        out["table"] = _table(report)
    if args.strict:
        out["certification"] = _certify(germ, args, config, opts, seg.dim)
    return out, report


def cmd_zust(args, config):
    """Züst integral f dg1 ^ dg2 over a triangle."""
    tri = _simplex(args.simplex, 2)
    opts = sew_options(config, args)
    zust_opts = ZustOptions.from_config(config)
    f = _scalar(args.f, tri.dim, args.alpha_f)
    g1 = _scalar(args.g1, tri.dim, args.alpha_g1)
    g2 = _scalar(args.g2, tri.dim, args.alpha_g2)
    result = zust(f, g1, g2, tri, opts, zust_opts)
    out = result.to_dict()
    if args.table:
        out["table"] = _table(result.report)
    return out, result.report


def cmd_stokes(args, config):
    """Boundary Young integral against the sewn coboundary on a triangle."""
    tri = _simplex(args.simplex, 2)
    opts = sew_options(config, args)
    f, g = _scalar(args.f, tri.dim, args.alpha_f), _scalar(args.g, tri.dim, args.alpha_g)
    cmp = stokes_check(f, g, tri, opts)
    if args.strict and not cmp.ok:
        raise CertificationFailed(cmp.to_dict())
    return cmp.to_dict(), None


def cmd_pullback(args, config):
    """Curve or surface change of variables under --phi."""
    s = Simplex.parse(args.simplex)
    opts = sew_options(config, args)
    phi = _point_map(args.phi)
    target = np.asarray(phi(s.vertices)).shape[1]
    if s.degree == 1:
        if args.g is None:
            raise ParameterError("curve pullback needs --g")
        f, g = _scalar(args.f, target), _scalar(args.g, target)
        cmp = pullback_curve(f, g, phi, s, opts)
        out = cmp.to_dict()
        ok = cmp.ok
    elif s.degree == 2:
        if args.g1 is None or args.g2 is None:
            raise ParameterError("surface pullback needs --g1 and --g2")
        f, g1, g2 = _scalar(args.f, target), _scalar(args.g1, target), _scalar(args.g2, target)
        res = pullback_surface(f, g1, g2, phi, s, opts, ZustOptions.from_config(config))
        out = res.to_dict()
        ok = res.ok or not res.top_dimension
    else:
        raise DegreeError("pullback needs a segment or a triangle")
    if args.strict and not ok:
        raise CertificationFailed(out)
    return out, None


def cmd_pure_area(args, config):
    """Error against the area limit for the pure-area families, one row per n."""
    opts = sew_options(config, args)
    n_list = _numbers(args.n_list, int, "--n-list")
    rows = []
    if args.dim == 1:
        xi = _numbers(args.xi, float, "--xi")
        seg = _simplex(args.simplex or ",".join("0" for _ in xi) + ";" + ",".join("1" for _ in xi), 1)
        p, q = seg.vertices
        limit = 0.5 * float(np.dot(xi, (q - p)[: len(xi)]))
        for n in n_list:
            result = pure_area_young(n, seg, xi, opts)
            anti = pure_area_antiderivative(n, xi)
            exact = anti(q) - anti(p)
            rows.append({"n": n, "value": result.value, "limit": limit, "error": abs(result.value - limit),
                         "exact": exact, "status": result.status.value})
    else:
        tri = _simplex(args.simplex or "0,0;1,0;0,1", 2)
        e1, e2 = tri.vertices[1] - tri.vertices[0], tri.vertices[2] - tri.vertices[0]
        limit = 0.25 * 0.5 * float(e1[0] * e2[1] - e1[1] * e2[0])
        for n in n_list:
            result = pure_area_zust(n, tri, args.eps, opts)
            exact = float(pure_area_2d_integral(n, tri.vertices[None])[0])
            rows.append({"n": n, "value": result.value, "limit": limit, "error": abs(result.value - limit),
                         "exact": exact, "status": result.status.value})
    return {"dim": args.dim, "rows": rows}, None


def cmd_gauge(args, config):
    """Sampled seminorm of a named germ, or of delta f, against diam^g1 vol2^g2."""
    overrides = {"seed": args.seed} if args.seed is not None else {}
    sampler = SamplerConfig.from_config(config, **overrides)
    if args.f is not None:
        germ = coboundary(_scalar(args.f, args.dim).as_germ())
    elif args.germ == "signed-area":
        germ = signed_area()
    else:
        germ = abs_increment()
    dim = max(args.dim, 2) if germ.degree == 2 else args.dim
    est = seminorm_estimate(germ, Gauge.power(germ.degree, args.gamma1, args.gamma2), sampler, dim=dim)
    return {"germ": germ.label, "gamma1": args.gamma1, "gamma2": args.gamma2, **est.to_dict()}, None


def _csv(payload, report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "rows" in payload:
        keys = list(payload["rows"][0]) if payload["rows"] else []
        writer.writerow(keys)
        for row in payload["rows"]:
            writer.writerow([row[k] for k in keys])
    elif report is not None:
        writer.writerow(TABLE_COLUMNS)
        for row in report.table_rows():
            writer.writerow(["" if x is None else x for x in row])
    else:
        flat = {k: v for k, v in payload.items() if not isinstance(v, (dict, list))}
        writer.writerow(list(flat))
        writer.writerow(list(flat.values()))
    return buf.getvalue()


def emit(command, payload, report, fmt):
    if fmt == "csv":
        sys.stdout.write(_csv(payload, report))
    else:
        print(json.dumps({"schema": SCHEMA, "command": command, "result": payload}, sort_keys=True, indent=2))


def _common(parser):
    parser.add_argument("--config", type=str, default=None, help="Path to a TOML configuration file")
    parser.add_argument("--debug", action="store_true", help="Log per-level progress to stderr")
    parser.add_argument("--max-level", type=int, default=None, help="Dyadic level cap")
    parser.add_argument("--abs-tol", type=float, default=None, help="Absolute convergence tolerance")
    parser.add_argument("--rel-tol", type=float, default=None, help="Relative convergence tolerance")
    parser.add_argument("--variant", choices=("dya", "dya_dagger"), default=None, help="Refinement variant")
    parser.add_argument("--extrapolate", action="store_true", help="Accelerate the partial sums")
    parser.add_argument("--format", choices=("json", "csv"), default="json", help="Output format")
    parser.add_argument("--table", action="store_true", help="Include the per-level convergence table")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads for level sums")
    parser.add_argument("--seed", type=int, default=None, help="Seed for samplers and probes")
    parser.add_argument("--strict", action="store_true", help="Exit 3 when certification fails")


def build_parser():
    parser = argparse.ArgumentParser(prog="rough-forms", description="Geometric integration of rough differential forms")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("young", help="Young integral f dg on a segment")
    _common(p)
    p.add_argument("--f", type=str, help="Integrand expression")
    p.add_argument("--g", type=str, help="Integrator expression")
    p.add_argument("--germ", choices=("abs-increment",), help="Sew a named germ instead of f dg")
    p.add_argument("--alpha-f", type=float, default=None, help="Hölder exponent of f")
    p.add_argument("--alpha-g", type=float, default=None, help="Hölder exponent of g")
    p.add_argument("--simplex", type=str, required=True, help='Segment, e.g. "0;1"')
    p.set_defaults(handler=cmd_young)

    p = sub.add_parser("zust", help="Züst integral f dg1 ^ dg2 on a triangle")
    _common(p)
    for name in ("f", "g1", "g2"):
        p.add_argument(f"--{name}", type=str, required=True, help=f"Expression for {name}")
        p.add_argument(f"--alpha-{name}", type=float, default=None, help=f"Hölder exponent of {name}")
    p.add_argument("--simplex", type=str, required=True, help='Triangle, e.g. "0,0;1,0;0,1"')
    p.set_defaults(handler=cmd_zust)

    p = sub.add_parser("stokes", help="Stokes-Cartan check on a triangle")
    _common(p)
    p.add_argument("--f", type=str, required=True)
    p.add_argument("--g", type=str, required=True)
    p.add_argument("--alpha-f", type=float, default=None)
    p.add_argument("--alpha-g", type=float, default=None)
    p.add_argument("--simplex", type=str, required=True)
    p.set_defaults(handler=cmd_stokes)

    p = sub.add_parser("pullback", help="Change of variables along a curve or surface")
    _common(p)
    p.add_argument("--f", type=str, required=True)
    p.add_argument("--g", type=str, default=None, help="Integrator for the curve variant")
    p.add_argument("--g1", type=str, default=None, help="First integrator for the surface variant")
    p.add_argument("--g2", type=str, default=None, help="Second integrator for the surface variant")
    p.add_argument("--phi", type=str, required=True, help='Map components, e.g. "x; y + x*(1 - x)"')
    p.add_argument("--simplex", type=str, required=True)
    p.set_defaults(handler=cmd_pullback)

    p = sub.add_parser("pure-area", help="Error-vs-n table for the pure-area families")
    _common(p)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--n-list", type=str, default="4,8,16,32")
    p.add_argument("--xi", type=str, default="1", help="Comma-separated frequency direction (dim 1)")
    p.add_argument("--eps", type=float, default=0.25, help="Exponent split (dim 2)")
    p.add_argument("--simplex", type=str, default=None)
    p.set_defaults(handler=cmd_pure_area)

    p = sub.add_parser("gauge", help="Sampled seminorm estimate")
    _common(p)
    p.add_argument("--germ", choices=("abs-increment", "signed-area"), default="abs-increment")
    p.add_argument("--f", type=str, default=None, help="Estimate the seminorm of delta f instead")
    p.add_argument("--gamma1", type=float, default=1.0)
    p.add_argument("--gamma2", type=float, default=0.0)
    p.add_argument("--dim", type=int, default=1)
    p.set_defaults(handler=cmd_gauge)
    return parser


def main(argv=None):
    """Main entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    config = load_config(args.config) if args.config else load_config(None)
    setup_logging(config, args.debug)
    if config is None:
        logger.error("failed to load configuration from %s", args.config)
        return EXIT_USAGE

    try:
        payload, report = args.handler(args, config)
    except (ExpressionError, ParameterError, DimensionError, DegreeError, DivergentGaugeError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except BudgetError as e:
        logger.error("%s", e)
        return EXIT_BUDGET
    except NonConvergentError as e:
        logger.error("%s (stage %s)", e, e.stage)
        if e.report is not None:
            emit(args.command, {"error": str(e), "stage": e.stage, "report": e.report.to_dict()}, None, "json")
        return EXIT_NONCONVERGENT
    except (OracleError, InsufficientDataError) as e:
        logger.error("%s", e)
        return EXIT_NONCONVERGENT
    except CertificationFailed as e:
        logger.error("certification failed under --strict")
        emit(args.command, e.payload, None, "json")
        return EXIT_NONCONVERGENT

    emit(args.command, payload, report, args.format)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
