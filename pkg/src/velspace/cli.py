"""Command-line front end: ``velspace <command> [options]``.

Exit codes: 0 success, 1 invalid input or usage, 2 a verification check
failed.  Results go to stdout as JSON (default) or CSV; diagnostics go to
stderr.  Vectors starting with a minus sign need the ``--point=-0.6,0,0``
spelling.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .core import CartesianVelocity, PolarVelocity, is_precision_degraded
from .errors import VelspaceError
from .geometry import (
    MetricTensor,
    ball_volume,
    classical_ball_volume,
    classical_distance,
    geodesic_distance,
    metric_classical_polar,
    metric_relativistic_cartesian,
    metric_relativistic_polar,
    volume_element,
)
from .kinematics import Boost, galilean_boost_1d, galilean_boost_3d, lorentz_boost_1d, lorentz_boost_3d, polar_lorentz_boost
from .measures import (
    EnergyPoint,
    prior_classical,
    prior_relativistic_1d,
    prior_relativistic_cartesian,
    prior_relativistic_energy,
    prior_relativistic_polar,
    prior_relativistic_rapidity,
)
from .sampler import SampleBatch, sample_classical_ball, sample_invariant_ball
from .verify import SUITES, CheckConfig, VerificationReport, run_checks

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2
SEED_ENV = "VELSPACE_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _floats(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty vector")
    return values


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--model", choices=("classical", "relativistic"), default="relativistic")
    common.add_argument("--scale", type=float, default=1.0, help="scale constant a (default 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = _Parser(prog="velspace", description="Invariant priors and geometry on velocity space.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prior", parents=[common], help="evaluate a least-informative prior density")
    p.add_argument("--coords", choices=("cartesian", "polar", "rapidity", "energy"), default="cartesian")
    p.add_argument("--point", type=_floats, required=True)

    p = sub.add_parser("boost", parents=[common], help="change inertial frame along x")
    p.add_argument("--frame", choices=("galilean", "lorentz"))
    p.add_argument("--coords", choices=("cartesian", "polar"), default="cartesian")
    p.add_argument("--alpha", type=_floats, required=True, help="relative velocity of the new frame")
    p.add_argument("--velocity", "--point", dest="velocity", type=_floats, required=True)

    p = sub.add_parser("distance", parents=[common], help="invariant distance between two velocities")
    p.add_argument("--point", type=_floats, action="append", required=True, help="give exactly twice")

    p = sub.add_parser("metric", parents=[common], help="metric tensor and volume element at a point")
    p.add_argument("--coords", choices=("cartesian", "polar"), default="cartesian")
    p.add_argument("--point", type=_floats, required=True)

    p = sub.add_parser("volume", parents=[common], help="invariant volume of a ball centred at rest")
    p.add_argument("--beta-max", type=float, required=True)

    p = sub.add_parser("sample", parents=[common], help="sample the invariant measure on a ball")
    p.add_argument("--beta-max", type=float, required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("verify", parents=[common], help="run the invariance checks")
    p.add_argument("--suite", default="all", help=f"comma-separated subset of {','.join(SUITES)}, or all")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=None, help="override the per-check tolerances")
    p.add_argument("--seed", type=int, default=None)
    return parser


# --------------------------------------------------------------------------
# commands; each returns (record, exit code)


def _cmd_prior(args):
    pt, a = args.point, args.scale
    if args.model == "classical":
        if args.coords != "cartesian":
            raise UsageError("the classical prior is available in cartesian coordinates only")
        d = prior_classical(CartesianVelocity(pt, mode="classical"), a)
        degraded = False
    elif args.coords == "cartesian":
        if len(pt) == 1:
            d = prior_relativistic_1d(pt[0], a)
        else:
            d = prior_relativistic_cartesian(CartesianVelocity(pt), a)
        degraded = is_precision_degraded(np.linalg.norm(pt))
    elif args.coords == "polar":
        d = prior_relativistic_polar(_polar(pt), a)
        degraded = is_precision_degraded(pt[0])
    elif args.coords == "rapidity":
        _expect_len(pt, 1, "rapidity")
        d = prior_relativistic_rapidity(pt[0], a)
        degraded = False
    else:
        if len(pt) not in (1, 2):
            raise UsageError("energy point is E or E,E0")
        d = prior_relativistic_energy(EnergyPoint(*pt), a)
        degraded = False
    return {
        "density": d.value,
        "parametrization": d.parametrization,
        "model": args.model,
        "coords": args.coords,
        "scale": a,
        "point": pt,
        "precision_degraded": degraded,
    }


def _polar(values, mode="relativistic") -> PolarVelocity:
    if not 1 <= len(values) <= 3:
        raise UsageError(f"a polar point is beta[,cos_theta[,phi]], got {len(values)} numbers")
    return PolarVelocity(*values, mode=mode)


def _expect_len(values, n, what):
    if len(values) != n:
        raise UsageError(f"{what} needs {n} component(s), got {len(values)}")


def _cmd_boost(args):
    frame = args.frame or ("galilean" if args.model == "classical" else "lorentz")
    v, alpha = args.velocity, args.alpha
    out = {"frame": frame, "coords": args.coords}
    if frame == "galilean":
        if args.coords != "cartesian":
            raise UsageError("galilean boosts are available in cartesian coordinates only")
        if len(v) == 1 and len(alpha) == 1:
            out["velocity"] = [galilean_boost_1d(v[0], alpha[0])]
        else:
            a = alpha[0] if len(alpha) == 1 else tuple(alpha)
            res = galilean_boost_3d(CartesianVelocity(v, mode="classical"), Boost(a, mode="classical"))
            out["velocity"] = list(res.components[: max(res.ndim, len(alpha))])
        return out
    _expect_len(alpha, 1, "a Lorentz boost (along x)")
    a = alpha[0]
    if args.coords == "polar":
        res = polar_lorentz_boost(_polar(v), a)
        out["velocity"] = [res.beta, res.cos_theta, res.phi]
        out["precision_degraded"] = is_precision_degraded([v[0], a, res.beta])
    elif len(v) == 1:
        res = lorentz_boost_1d(v[0], a)
        out["velocity"] = [res]
        out["precision_degraded"] = is_precision_degraded([v[0], a, res])
    else:
        res = lorentz_boost_3d(CartesianVelocity(v), a)
        out["velocity"] = list(res.components[: res.ndim])
        out["precision_degraded"] = is_precision_degraded([np.linalg.norm(v), a, res.speed])
    return out


def _cmd_distance(args):
    if len(args.point) != 2:
        raise UsageError("distance needs exactly two --point arguments")
    u, v = args.point
    if args.model == "classical":
        d = classical_distance(CartesianVelocity(u, mode="classical"), CartesianVelocity(v, mode="classical"), args.scale)
        return {"distance": d, "model": args.model, "scale": args.scale}
    d = geodesic_distance(CartesianVelocity(u), CartesianVelocity(v), args.scale)
    return {
        "distance": d,
        "model": args.model,
        "scale": args.scale,
        "precision_degraded": is_precision_degraded([np.linalg.norm(u), np.linalg.norm(v)]),
    }


def _cmd_metric(args):
    pt, a = args.point, args.scale
    if args.coords == "polar":
        p = _polar(pt, args.model)
        fn = metric_classical_polar if args.model == "classical" else metric_relativistic_polar
        g = fn(p.beta, p.theta, a)
    elif args.model == "classical":
        CartesianVelocity(pt, mode="classical")
        g = MetricTensor(a * a * np.eye(3), "cartesian", a)
    else:
        g = metric_relativistic_cartesian(CartesianVelocity(pt), a)
    return {
        "metric": g.components.tolist(),
        "volume_element": volume_element(g),
        "coords": g.coords,
        "degenerate": g.degenerate,
        "scale": a,
    }


def _cmd_volume(args):
    if args.model == "classical":
        vol = classical_ball_volume(args.beta_max, args.scale)
    else:
        vol = ball_volume(args.beta_max, args.scale)
    return {"volume": vol, "model": args.model, "beta_max": args.beta_max, "scale": args.scale}


def _cmd_sample(args):
    seed = _default_seed() if args.seed is None else args.seed
    if args.model == "classical":
        batch = sample_classical_ball(args.beta_max, args.n, seed)
    else:
        batch = sample_invariant_ball(args.beta_max, args.n, seed)
    return batch


def _cmd_verify(args):
    seed = _default_seed() if args.seed is None else args.seed
    suite = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(",") if s.strip())
    return run_checks(CheckConfig(suite=suite, trials=args.trials, tol=args.tol, seed=seed))


# --------------------------------------------------------------------------
# output


def _flatten(record: dict) -> dict:
    flat = {}
    for key, value in record.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            arr = np.asarray(value)
            for idx in np.ndindex(arr.shape):
                flat[key + "_" + "".join(str(i) for i in idx)] = arr[idx].item()
        else:
            flat[key] = value
    return flat


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def _write_csv(rows: list[dict], out) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_cell(v) for v in row.values()])
    out.write(buf.getvalue())


def _emit(result, fmt: str, out) -> None:
    if isinstance(result, SampleBatch):
        cols = ("bx", "by", "bz") if result.mode == "relativistic" else ("vx", "vy", "vz")
        if fmt == "csv":
            _write_csv([dict(zip(cols, map(float, p))) for p in result.points], out)
        else:
            record = {"model": result.mode, "seed": result.seed, "n": result.n, "beta_max": result.beta_max, "points": result.points.tolist()}
            out.write(json.dumps(record) + "\n")
    elif isinstance(result, VerificationReport):
        if fmt == "csv":
            _write_csv([_flatten({k: v for k, v in c.to_dict().items() if k != "details"}) for c in result.checks], out)
        else:
            out.write(result.to_json() + "\n")
    elif fmt == "csv":
        _write_csv([_flatten(result)], out)
    else:
        out.write(json.dumps(result) + "\n")


COMMANDS = {
    "prior": _cmd_prior,
    "boost": _cmd_boost,
    "distance": _cmd_distance,
    "metric": _cmd_metric,
    "volume": _cmd_volume,
    "sample": _cmd_sample,
    "verify": _cmd_verify,
}


def dispatch(argv=None, out=None, err=None) -> int:
    """Run one command; returns the process exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        result = COMMANDS[args.command](args)
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_INPUT
    except VelspaceError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INPUT
    _emit(result, args.format, out)
    if args.command == "verify" and not result.passed:
        failed = ", ".join(c.check for c in result.checks if not c.passed)
        err.write(f"verification failed: {failed}\n")
        return EXIT_VERIFY
    return EXIT_OK


def main(argv=None) -> None:
    try:
        code = dispatch(argv)
    except SystemExit as exc:
        # --help / --version
        code = exc.code if isinstance(exc.code, int) else EXIT_OK
    sys.exit(code)
