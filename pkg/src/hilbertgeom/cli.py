"""Command-line front end.

Every subcommand writes one JSON object (or a CSV table) to stdout.  Exit
codes: 0 ok, 1 usage, 2 invalid body file, 3 numeric failure, 4 failed check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import metric, verify
from .bodies import Product, load_body
from .errors import HilbertGeometryError, InvalidBodySpec, NumericFailure
from .measure import EXACT, PRODUCT_APPROX, SamplerSpec, entropy_estimate, metric_ball_volume
from .metric import ANGLE_GRID, MC_DIRECTIONS, QuadratureSpec
from .spectral import LAMBDA1, SOBOLEV, Tent, product_amenability_check, rayleigh_quotient

EXIT_OK, EXIT_USAGE, EXIT_BODY, EXIT_NUMERIC, EXIT_CHECK = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- output -------------------------------------------------------------------------------


def _encode(x) -> str:
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in x.items()) + "}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return format(x, ".17g")
        return json.dumps("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    return json.dumps(str(x))


def dumps(obj) -> str:
    """JSON with insertion key order and 17 significant digits (``inf`` as a string)."""
    return _encode(obj)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _flat_csv(obj: dict) -> str:
    scalars = {k: v for k, v in obj.items() if not isinstance(v, (dict, list, tuple))}
    return _csv(list(scalars), [list(scalars.values())])


# -- argument helpers -------------------------------------------------------------------------


def _vec(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _quad(args, dim):
    if args.directions is None and args.quad_mode is None:
        return None
    mode = args.quad_mode or (ANGLE_GRID if dim == 2 else MC_DIRECTIONS)
    count = args.directions or QuadratureSpec.default(dim).count
    return QuadratureSpec(mode, count, args.seed)


def _sampler(args):
    return SamplerSpec(args.samples, args.seed, args.density_mode)


def _bodies(args):
    return [load_body(p) for p in args.bodies.split(",") if p]


def _one(bodies):
    return bodies[0] if len(bodies) == 1 else Product(bodies)


# -- commands ---------------------------------------------------------------------------------


def cmd_distance(args):
    body = load_body(args.body)
    return {"distance": metric.cross_ratio_distance(body, args.p, args.q)}


def cmd_fnorm(args):
    body = load_body(args.body)
    return {"fnorm": metric.finsler_norm(body, args.p, args.v)}


def cmd_dualnorm(args):
    body = load_body(args.body)
    return {"dual_norm": metric.dual_norm(body, args.p, args.xi, _quad(args, body.dim))}


def cmd_tangent_ball(args):
    body = load_body(args.body)
    quad = _quad(args, body.dim) or QuadratureSpec.default(body.dim)
    leb = metric.tangent_ball_volume(body, args.p, quad)
    omega = metric.unit_ball_volume(body.dim)
    return {"leb": leb, "density": omega / leb, "omega_n": omega}


def cmd_density(args):
    body = load_body(args.body)
    d = metric.density(body, args.p, _quad(args, body.dim))
    return {"density": d.density, "leb_tangent_ball": d.leb_tangent_ball, "omega_n": d.omega_n}


def cmd_ballvol(args):
    body = load_body(args.body)
    est = metric_ball_volume(body, args.p, args.R, _sampler(args), _quad(args, body.dim))
    return {"R": args.R, **est.as_dict()}


def cmd_entropy(args):
    body = load_body(args.body)
    est = entropy_estimate(body, args.p, args.r_min, args.r_max, args.steps, _sampler(args), _quad(args, body.dim))
    if args.format == "csv":
        return _csv(["R", "log_volume", "stderr", "n_accepted"], est.csv_rows())
    return est.as_dict()


def cmd_rayleigh(args):
    body = load_body(args.body)
    tf = Tent(args.center, args.radius, args.scale)
    res = rayleigh_quotient(body, tf, args.form, _sampler(args), _quad(args, body.dim), args.fd_step)
    return res.as_dict()


def cmd_amenability(args):
    bodies = _bodies(args)
    if len(bodies) != 2:
        raise UsageError("amenability-check needs exactly two bodies")
    f = Tent(args.f_center, args.f_radius)
    g = Tent(args.g_center, args.g_radius)
    prod_dim = bodies[0].dim + bodies[1].dim
    rep = product_amenability_check(bodies[0], bodies[1], f, g, _sampler(args), _quad(args, prod_dim), args.fd_step)
    out = {"ok": rep.ok, **rep.as_dict()}
    return out, (EXIT_OK if rep.ok else EXIT_CHECK)


def cmd_verify(args):
    bodies = _bodies(args) if args.bodies else []
    names = list(verify.SUITES) if args.suite == "all" else [args.suite]
    reports = []
    for name in names:
        if name == "closed-forms":
            q = QuadratureSpec(ANGLE_GRID, args.directions) if args.directions else None
            rep = verify.suite_closed_forms(q, args.trials, args.seed)
        else:
            if not bodies:
                raise UsageError(f"suite {name!r} needs --bodies")
            if name == "axioms":
                rep = verify.suite_metric_axioms(_one(bodies), args.trials, args.seed)
            elif name == "inclusions":
                rep = verify.suite_ball_inclusions(bodies, args.R, args.trials, args.seed)
            elif name == "density":
                prod = _one(bodies)
                rep = verify.suite_density_sandwich(bodies, args.trials, args.seed, _quad(args, prod.dim))
            else:
                rep = verify.SUITES[name](bodies, args.trials, args.seed)
        reports.append(rep)
    ok = all(r.passed for r in reports)
    out = reports[0].as_dict() if len(reports) == 1 else {"passed": ok, "suites": [r.as_dict() for r in reports]}
    return out, (EXIT_OK if ok else EXIT_CHECK)


# -- parser -------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hilbertgeom", description="Hilbert geometry of convex bodies and their products.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, body=True):
        if body:
            p.add_argument("--body", required=True, help="body JSON file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--directions", type=_positive_int, help="quadrature direction count")
        p.add_argument("--quad-mode", choices=(ANGLE_GRID, MC_DIRECTIONS))

    def sampling(p):
        p.add_argument("--samples", type=_positive_int, default=20000)
        p.add_argument("--density-mode", choices=(EXACT, PRODUCT_APPROX), default=EXACT)

    p = sub.add_parser("distance", help="Hilbert distance d(p, q)")
    common(p)
    p.add_argument("--p", type=_vec, required=True)
    p.add_argument("--q", type=_vec, required=True)
    p.set_defaults(fn=cmd_distance)

    p = sub.add_parser("fnorm", help="Finsler norm F(p, v)")
    common(p)
    p.add_argument("--p", type=_vec, required=True)
    p.add_argument("--v", type=_vec, required=True)
    p.set_defaults(fn=cmd_fnorm)

    p = sub.add_parser("dualnorm", help="dual norm of a covector at p")
    common(p)
    p.add_argument("--p", type=_vec, required=True)
    p.add_argument("--xi", type=_vec, required=True)
    p.set_defaults(fn=cmd_dualnorm)

    p = sub.add_parser("tangent-ball", help="Lebesgue volume of the tangent unit ball")
    common(p)
    p.add_argument("--p", type=_vec, required=True)
    p.set_defaults(fn=cmd_tangent_ball)

    p = sub.add_parser("density", help="Busemann density at p")
    common(p)
    p.add_argument("--p", type=_vec, required=True)
    p.set_defaults(fn=cmd_density)

    p = sub.add_parser("ballvol", help="Hilbert measure of the metric ball B(p, R)")
    common(p)
    sampling(p)
    p.add_argument("--p", type=_vec, required=True)
    p.add_argument("--R", type=_positive_float, required=True)
    p.set_defaults(fn=cmd_ballvol)

    p = sub.add_parser("entropy", help="volume-growth slope over a radius window")
    common(p)
    sampling(p)
    p.add_argument("--p", type=_vec, required=True)
    p.add_argument("--r-min", type=_positive_float, default=3.0)
    p.add_argument("--r-max", type=_positive_float, default=6.0)
    p.add_argument("--steps", type=_positive_int, default=7)
    p.set_defaults(fn=cmd_entropy)

    p = sub.add_parser("rayleigh", help="Rayleigh quotient of a distance tent")
    common(p)
    sampling(p)
    p.add_argument("--center", type=_vec, required=True)
    p.add_argument("--radius", type=_positive_float, required=True)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--form", choices=(LAMBDA1, SOBOLEV), default=LAMBDA1)
    p.add_argument("--fd-step", type=_positive_float, default=1e-4)
    p.set_defaults(fn=cmd_rayleigh)

    p = sub.add_parser("amenability-check", help="product inequalities for tent quotients")
    common(p, body=False)
    sampling(p)
    p.add_argument("--bodies", required=True, help="two comma-separated body JSON files")
    p.add_argument("--f-center", type=_vec, required=True)
    p.add_argument("--f-radius", type=_positive_float, required=True)
    p.add_argument("--g-center", type=_vec, required=True)
    p.add_argument("--g-radius", type=_positive_float, required=True)
    p.add_argument("--fd-step", type=_positive_float, default=1e-4)
    p.set_defaults(fn=cmd_amenability)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p, body=False)
    p.add_argument("suite", choices=[*verify.SUITES, "all"])
    p.add_argument("--bodies", help="comma-separated body JSON files")
    p.add_argument("--trials", type=_positive_int, default=1000)
    p.add_argument("--R", type=_positive_float, default=2.0)
    p.set_defaults(fn=cmd_verify)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        result = args.fn(args)
        code = EXIT_OK
        if isinstance(result, tuple):
            result, code = result
        if isinstance(result, str):
            stdout.write(result)
        else:
            stdout.write((_flat_csv(result) if args.format == "csv" else dumps(result)) + ("" if args.format == "csv" else "\n"))
        return code
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except InvalidBodySpec as exc:
        stderr.write(f"invalid body: {exc}\n")
        return EXIT_BODY
    except NumericFailure as exc:
        stderr.write(f"numeric failure ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERIC
    except HilbertGeometryError as exc:
        stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
