"""
Subcommands of the `caisson` command line tool
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
import typing
from fractions import Fraction

import numpy as np

from .. import config
from ..circuit_certificates import (
    certify_component,
    detect_circuit,
    equilibrium_preimage,
    safe_argument_intervals,
)
from ..exceptions import CaissonException, NotACircuitLift, NotALift, ProblemFileError
from ..expsum import (
    DeformationFamily,
    ExpSum,
    dehomogenize,
    dehomogenize_point,
    deform,
    native_point,
    phi_transport,
)
from ..membership import (
    Window,
    caisson_slice_member,
    components,
    dominance_threshold,
    hausdorff,
    lopsided_flags,
    raster,
)
from ..orders import omega_caisson, omega_set, order_at, roots_univariate, vertex_orders
from ..problem import ProblemFile
from ..scalars import ExtScalar
from ..support_lattice import (
    LiftRelation,
    minimal_rational_lift,
    pseudo_homogeneity_form,
    rank_r,
    rank_rho,
    rhat,
)
from ..utils import format_pi, parse_complex, parse_float_list, parse_mod_arg

logger = logging.getLogger(__name__)

DEFAULT_HALF_WIDTH = 4.0


def limit_sweep(
    family: DeformationFamily,
    lambdas: typing.Sequence[float],
    window: Window,
    resolution: int,
    threads: int = 1,
) -> typing.List[typing.Tuple[float, float]]:
    """
    Hausdorff distance between the lopsided raster of f_λ on the (z, t) plane and the lopsided
    caisson of the limit lift [A; κ] extended constantly along t, for every λ
    """
    f = family.base
    dim = (f.dim if f.affine else f.dim - 1) + family.k
    if dim != 2:
        raise ProblemFileError(f"A limit sweep rasters a plane, got {dim} variables")

    rows = [
        tuple(
            ExtScalar.from_rational(
                Fraction(k[i]).limit_denominator(config.RATIONALIZE_DENOMINATOR), f.support.basis
            )
            for k in family.kappas
        )
        for i in range(family.k)
    ]
    limit = LiftRelation.from_pair(f.support, f.support.with_rows(f.support.entries + tuple(rows)))
    g = phi_transport(f, limit)
    base_dim = dim - family.k

    def reference(points):
        return lopsided_flags(g, limit.embed(native_point(f, points[..., :base_dim])))

    expected = raster(reference, window, resolution, threads=threads, vectorized=True)
    result = []
    for lam in lambdas:
        deformed = deform(family, lam)
        if not deformed.affine:
            deformed = dehomogenize(deformed)
        grid = raster(
            lambda points: lopsided_flags(deformed, points),
            window,
            resolution,
            threads=threads,
            vectorized=True,
        )
        distance = hausdorff(grid, expected)
        logger.debug("λ = %g: Hausdorff distance %g", lam, distance)
        result.append((lam, distance))
    return result


def _print(data: typing.Any):
    sys.stdout.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")


def _write_json(data: typing.Any, path: str):
    with open(path, "w") as fd:
        json.dump(data, fd, indent=2, ensure_ascii=False)
        fd.write("\n")


def _window(value: typing.Optional[str]) -> typing.Optional[Window]:
    return Window.from_string(value) if value else None


def _expsum(problem: ProblemFile, args) -> ExpSum:
    f = problem.expsum
    c = getattr(args, "c", None)
    if c is None:
        return f
    index = args.index if args.index is not None else problem.parameter
    if index is None:
        raise ProblemFileError("Give --index or declare 'parameter' in the problem file")
    coefficients = list(f.coefficients)
    coefficients[index] = parse_mod_arg(c)
    return f.with_coefficients(coefficients)


def default_window(
    problem: ProblemFile, f: ExpSum, lift: typing.Optional[LiftRelation] = None
) -> Window:
    """
    The window of the problem file; otherwise centred at the equilibrium point of a circuit
    lift, or at the origin
    """
    if problem.window is not None:
        return problem.window
    center = [0.0, 0.0]
    if lift is not None:
        circuit = detect_circuit(phi_transport(f, lift))
        if circuit is not None:
            x, _ = equilibrium_preimage(f, circuit)
            center = list(x if f.affine else dehomogenize_point(f, x))
    return Window.centered(center, DEFAULT_HALF_WIDTH)


def _components_summary(grid) -> typing.List[typing.Dict[str, typing.Any]]:
    return [
        {
            "label": component.label,
            "size": component.size,
            "representative": list(component.representative),
            "touches_boundary": component.touches_boundary,
        }
        for component in components(grid)
    ]


def cmd_rank(problem: ProblemFile, args, threads: int, seed: int):
    support = problem.support
    result = {"r": rank_r(support), "rhat": rhat(support), "rho": rank_rho(support)}
    if not support.affine:
        result["xi"] = [e.to_json() for e in pseudo_homogeneity_form(support)]
    _print(result)


def cmd_lift(problem: ProblemFile, args, threads: int, seed: int):
    if args.check:
        try:
            relation = problem.resolve_lift(args.check)
        except NotALift as e:
            _print({"is_lift": False, "message": e.text})
            return
        _print({"is_lift": True, **relation.to_json()})
        return
    relation = minimal_rational_lift(problem.support)
    _print({"rows": relation.lift.rows, "rho": rank_rho(problem.support), **relation.to_json()})


def cmd_factorize(problem: ProblemFile, args, threads: int, seed: int):
    relation = problem.resolve_lift(args.lift)
    _print({"factor": [[e.to_json() for e in row] for row in relation.factor]})


def cmd_raster(problem: ProblemFile, args, threads: int, seed: int):
    from ..figures import write_raster_csv, write_raster_svg

    f = problem.expsum
    lift = None
    if args.level == "B":
        lift = problem.resolve_lift(args.lift)
    elif args.level == "A":
        lift = minimal_rational_lift(f.support)
    window = _window(args.window) or default_window(problem, f, lift)
    resolution = args.res or problem.resolution
    tolerance = args.tolerance
    if tolerance is None:
        tolerance = max((window.x1 - window.x0), (window.y1 - window.y0)) / resolution / 2

    if args.level == "I":
        grid = raster(
            lambda points: lopsided_flags(f, native_point(f, points)),
            window,
            resolution,
            threads=threads,
            vectorized=True,
        )
    else:

        def predicate(point):
            return caisson_slice_member(
                f, lift, native_point(f, point), tolerance, samples=args.samples, seed=seed
            )

        grid = raster(predicate, window, resolution, threads=threads)

    if args.out:
        with open(f"{args.out}.csv", "w", newline="") as fd:
            write_raster_csv(grid, fd)
        write_raster_svg(grid, f"{args.out}.svg", title=f"level {args.level}")
    _print(
        {
            "level": args.level,
            "window": window.as_list(),
            "resolution": resolution,
            "members": int(grid.flags.sum()),
            "components": _components_summary(grid),
        }
    )


def cmd_order(problem: ProblemFile, args, threads: int, seed: int):
    f = problem.expsum
    lift = problem.resolve_lift(args.lift) if args.lift else None
    x = parse_float_list(args.at)
    order = order_at(f, x, lift, samples=args.samples, seed=seed)
    _print({"at": x, **order.to_json(), "approximation": list(order.approximate())})


def cmd_omega(problem: ProblemFile, args, threads: int, seed: int):
    f = problem.expsum
    lift = problem.resolve_lift(args.lift) if args.lift else None
    window = _window(args.window) or default_window(problem, f, lift)
    resolution = args.res or problem.resolution
    if lift is None:
        orders = omega_set(f, window, resolution, args.samples, seed, threads)
    else:
        orders = omega_caisson(f, lift, window, resolution, args.samples, seed, threads)
    _print(
        {
            "window": window.as_list(),
            "orders": [order.to_json() for order in orders],
            "vertices": [[e.to_json() for e in vertex] for vertex in vertex_orders(f)],
        }
    )


def cmd_roots(args, threads: int, seed: int):
    try:
        with open(args.coeffs) as fd:
            data = json.load(fd)
    except (OSError, json.JSONDecodeError) as e:
        raise ProblemFileError(f"Unable to read coefficients {args.coeffs}: {e}")
    if isinstance(data, dict):
        data = data.get("coefficients")
    if not isinstance(data, list):
        raise ProblemFileError("Coefficients must be a list in ascending powers")
    roots = roots_univariate([parse_complex(e) for e in data])
    _print(
        {
            "degree": roots.degree,
            "roots": [
                {
                    "re": float(root.real),
                    "im": float(root.imag),
                    "mod": float(abs(root)),
                    "arg_pi": float(np.angle(root) / math.pi),
                }
                for root in roots
            ],
            "max_backward_error": float(roots.backward_errors.max()) if roots.degree else 0.0,
        }
    )


def cmd_threshold(problem: ProblemFile, args, threads: int, seed: int):
    index = args.index if args.index is not None else problem.parameter
    if index is None:
        raise ProblemFileError("Give --index or declare 'parameter' in the problem file")
    result = dominance_threshold(problem.expsum, index)
    _print(
        {
            "index": index,
            "value": result.value,
            "recession": result.recession,
            "dropped": list(result.dropped),
            "minimizer": list(result.minimizer) if result.minimizer is not None else None,
        }
    )


def cmd_certify(problem: ProblemFile, args, threads: int, seed: int):
    f = _expsum(problem, args)
    lift = problem.resolve_lift(args.lift)
    report = certify_component(f, lift, grid=args.grid, strict=args.strict)
    if args.out:
        _write_json(report.as_dict(with_timings=False), args.out)
    if args.svg:
        from ..figures import write_region_svg

        circuit = detect_circuit(phi_transport(f, lift))
        if circuit is not None:
            write_region_svg(circuit, args.svg, c=circuit.barycenter_coeff, example=args.example)
    _print(report.as_dict())


def cmd_intervals(problem: ProblemFile, args, threads: int, seed: int):
    f = problem.expsum
    lift = problem.resolve_lift(args.lift)
    circuit = detect_circuit(phi_transport(f, lift))
    if circuit is None:
        raise NotACircuitLift("The lifted support is not a barycentric circuit")
    intervals = safe_argument_intervals(
        circuit, args.radius, samples=args.samples, grid=args.grid, threads=threads
    )
    endpoints = sorted({abs(e) for interval in intervals for e in interval})
    _print(
        {
            "radius": args.radius,
            "intervals": [list(e) for e in intervals],
            "labels": [f"[{format_pi(a)}, {format_pi(b)}]" for a, b in intervals],
            "endpoints": endpoints,
        }
    )


def cmd_limit_sweep(problem: ProblemFile, args, threads: int, seed: int):
    family = problem.family()
    lambdas = parse_float_list(args.lambdas) if args.lambdas else list(problem.lambdas)
    if not lambdas:
        raise ProblemFileError("No λ values given")
    if any(lam == 0 for lam in lambdas):
        raise ProblemFileError("λ values must be nonzero")
    window = _window(args.window) or problem.window
    if window is None:
        window = Window.centered([0.0, 0.0], DEFAULT_HALF_WIDTH)
    rows = limit_sweep(family, lambdas, window, args.res or problem.resolution, threads)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["lambda", "distance"])
    for lam, distance in rows:
        writer.writerow([f"{lam:.12g}", f"{distance:.12g}"])
    if args.out:
        with open(args.out, "w", newline="") as fd:
            fd.write(out.getvalue())
    else:
        sys.stdout.write(out.getvalue())


COMMANDS = {
    "rank": cmd_rank,
    "lift": cmd_lift,
    "factorize": cmd_factorize,
    "raster": cmd_raster,
    "order": cmd_order,
    "omega": cmd_omega,
    "threshold": cmd_threshold,
    "certify": cmd_certify,
    "intervals": cmd_intervals,
    "limit-sweep": cmd_limit_sweep,
}


def _common_flags(suppress: bool) -> argparse.ArgumentParser:
    # subcommands must not reset flags given before the subcommand name
    common = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    common.add_argument(
        "--debug", "-d", action="store_true", default=argparse.SUPPRESS if suppress else False
    )
    common.add_argument("--threads", type=int, default=default, metavar="N")
    common.add_argument("--seed", type=int, default=default)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags(suppress=True)
    parser = argparse.ArgumentParser(
        description="Caisson approximations of amoebas of exponential sums",
        parents=[_common_flags(suppress=False)],
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def problem_parser(name: str, help: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help, parents=[common])
        sub.add_argument("problem", metavar="PROBLEM", help="problem JSON file")
        return sub

    problem_parser("rank", "ranks r, rhat and rho of the support")

    sub = problem_parser("lift", "minimal rational lift or a lift check")
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--minimal", action="store_true", default=True)
    group.add_argument("--check", metavar="LIFT", default=None)

    sub = problem_parser("factorize", "factor T with A = T B")
    sub.add_argument("--lift", metavar="LIFT", default=None)

    sub = problem_parser("raster", "membership raster as CSV and SVG")
    sub.add_argument("--level", choices=["A", "B", "I"], default="I")
    sub.add_argument("--lift", metavar="LIFT", default=None)
    sub.add_argument("--window", metavar="x0,x1,y0,y1", default=None)
    sub.add_argument("--res", type=int, default=None)
    sub.add_argument("--tolerance", type=float, default=None)
    sub.add_argument("--samples", type=int, default=8)
    sub.add_argument("--out", metavar="PREFIX", default=None)

    sub = problem_parser("order", "order of the component containing a point")
    sub.add_argument("--at", metavar="x,y", required=True)
    sub.add_argument("--lift", metavar="LIFT", default=None)
    sub.add_argument("--samples", type=int, default=None)

    sub = problem_parser("omega", "orders of the components found in a window")
    sub.add_argument("--lift", metavar="LIFT", default=None)
    sub.add_argument("--window", metavar="x0,x1,y0,y1", default=None)
    sub.add_argument("--res", type=int, default=None)
    sub.add_argument("--samples", type=int, default=None)

    sub = subparsers.add_parser("roots", help="roots of a univariate polynomial", parents=[common])
    sub.add_argument("--coeffs", metavar="FILE", required=True)

    sub = problem_parser("threshold", "smallest modulus at which a term can dominate")
    sub.add_argument("--index", type=int, default=None)

    sub = problem_parser("certify", "barycentric circuit certificate through a lift")
    sub.add_argument("--lift", metavar="LIFT", default=None)
    sub.add_argument("--c", metavar="mod,arg_pi", default=None)
    sub.add_argument("--index", type=int, default=None)
    sub.add_argument("--grid", type=int, default=None)
    sub.add_argument("--strict", action="store_true", default=False)
    sub.add_argument("--out", metavar="REPORT", default=None)
    sub.add_argument("--svg", metavar="FILE", default=None)
    sub.add_argument("--example", choices=["ex1", "ex2"], default=None)

    sub = problem_parser("intervals", "arguments of c certified beyond a radius")
    sub.add_argument("--lift", metavar="LIFT", default=None)
    sub.add_argument("--radius", type=float, required=True)
    sub.add_argument("--samples", type=int, default=400)
    sub.add_argument("--grid", type=int, default=None)

    sub = problem_parser("limit-sweep", "Hausdorff distances along a deformation")
    sub.add_argument("--lambdas", metavar="l1,l2,...", default=None)
    sub.add_argument("--window", metavar="x0,x1,y0,y1", default=None)
    sub.add_argument("--res", type=int, default=None)
    sub.add_argument("--out", metavar="CSV", default=None)

    return parser


def run(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.debug:
        logging.basicConfig(level=logging.DEBUG)
    else:
        logging.basicConfig()

    try:
        threads = config.env_override("CAISSON_THREADS", args.threads, config.THREADS)
        if args.command == "roots":
            seed = config.env_override("CAISSON_SEED", args.seed, config.SEED)
            cmd_roots(args, threads, seed)
            return 0
        problem = ProblemFile.load(args.problem)
        default_seed = problem.seed if problem.seed is not None else config.SEED
        seed = config.env_override("CAISSON_SEED", args.seed, default_seed)
        COMMANDS[args.command](problem, args, threads, seed)
    except CaissonException as e:
        logger.debug("Command %s failed: %s", args.command, e)
        sys.stderr.write(json.dumps(e.to_dict(), ensure_ascii=False) + "\n")
        return 2
    return 0
