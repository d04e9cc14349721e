"""Command line interface.

Exit codes: 0 success, 1 an inequality check failed, 2 bad input or
configuration, 3 a solver did not converge.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import NoConvergence, SpdMeansError
from .matio import format_matrix, read_matrix
from .means import (alm_mean, arithmetic_mean, geo_mean, harmonic_mean, karcher_mean,
                    power_mean)
from .posmaps import apply, load_map

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NOCONV = 0, 1, 2, 3
MEAN_KINDS = ("geo", "arith", "harm", "power", "karcher", "alm")


class InputError(Exception):
    pass


def _floats(text, what):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}")


def _ints(text, what):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputError(f"{what}: expected comma-separated integers, got {text!r}")


def _names(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _read(path):
    try:
        return read_matrix(path, spd=True)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}")
    except SpdMeansError as exc:
        msg = str(exc)
        raise InputError(msg if msg.startswith(str(path)) else f"{path}: {msg}")


def _emit(X, out, diagnostics):
    text = format_matrix(X)
    for line in diagnostics:
        print(f"# {line}")
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# mean


def cmd_mean(args):
    mats = [_read(p) for p in args.inputs]
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise InputError("input matrices have different dimensions: "
                         + ", ".join(f"{p} ({m.shape[0]})" for p, m in zip(args.inputs, mats)))
    weights = None
    if args.weights is not None:
        weights = np.array(_floats(args.weights, "--weights"))
    kind = args.kind
    iterations, residual = 0, 0.0
    if kind == "geo":
        if len(mats) != 2:
            raise InputError("geo needs exactly two input matrices")
        X = geo_mean(mats[0], mats[1], args.nu)
    elif kind == "arith":
        X = arithmetic_mean(mats, weights)
    elif kind == "harm":
        X = harmonic_mean(mats, weights)
    elif kind == "power":
        if args.t is None:
            raise InputError("power needs --t")
        res = power_mean(mats, args.t, weights)
        X, iterations, residual = res.value, res.iterations, res.residual
    elif kind == "karcher":
        res = karcher_mean(mats, weights)
        X, iterations, residual = res.value, res.iterations, res.residual
    else:
        if weights is not None:
            raise InputError("alm does not take weights")
        res = alm_mean(mats)
        X, iterations, residual = res.value, res.iterations, res.residual
    _emit(X, args.output, [f"kind {kind}", f"iterations {iterations}",
                           f"residual {residual:.6g}"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _spec_from_args(args):
    from .verify import TrialSpec

    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise InputError(f"{args.config}: {exc.strerror or exc}")
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.config}: invalid JSON ({exc})")
        if not isinstance(data, dict):
            raise InputError(f"{args.config}: config must be a JSON object")
    flags = {
        "dims": args.dim and _ints(args.dim, "--dim"),
        "count": args.count,
        "master_seed": args.seed,
        "cond_cap": args.cond_cap,
        "nu_grid": args.nu_grid and _floats(args.nu_grid, "--nu-grid"),
        "t_grid": args.t_grid and _floats(args.t_grid, "--t-grid"),
        "n_grid": args.n_grid and _ints(args.n_grid, "--n-grid"),
        "f_grid": args.functions and _names(args.functions),
        "map_kinds": args.maps and _names(args.maps),
        "theorems": args.theorems and _names(args.theorems),
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    try:
        return TrialSpec.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid trial configuration: {exc}")


def cmd_verify(args):
    from .verify import run_examples, run_suite

    if args.examples:
        checks = run_examples()
        for c in checks:
            print(f"example {c.example}: {c.name}: {'PASS' if c.passed else 'FAIL'}")
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "examples.jsonl").write_text(
                "".join(json.dumps(c.as_json()) + "\n" for c in checks))
        return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
    spec = _spec_from_args(args)
    result = run_suite(spec, workers=args.workers)
    jpath, cpath = result.write(args.out_dir or "reports")
    sys.stdout.write(result.csv())
    print(f"# records {len(result.records)} failures {len(result.failures)}")
    print(f"# wrote {jpath} and {cpath}")
    return EXIT_OK if result.passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# map


def cmd_map(args):
    try:
        phi = load_map(args.mapfile)
    except OSError as exc:
        raise InputError(f"{args.mapfile}: {exc.strerror or exc}")
    except SpdMeansError as exc:
        raise InputError(str(exc))
    X = _read(args.input)
    if X.shape[0] != phi.in_dim:
        raise InputError(f"{args.input}: dimension {X.shape[0]} does not match the map "
                         f"input dimension {phi.in_dim}")
    _emit(apply(phi, X), args.output, [f"map {phi.kind}"])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="spdmeans", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("mean", help="compute a mean of matrix files")
    m.add_argument("kind", choices=MEAN_KINDS)
    m.add_argument("inputs", nargs="+", help="matrix files")
    m.add_argument("--nu", type=float, default=0.5, help="weight for geo (default 0.5)")
    m.add_argument("--t", type=float, help="exponent for power, in [-1, 0) U (0, 1]")
    m.add_argument("--weights", help="comma-separated probability vector")
    m.add_argument("-o", "--output", help="write the mean here instead of stdout")
    m.set_defaults(func=cmd_mean)

    v = sub.add_parser("verify", help="run seeded inequality suites or the worked examples")
    v.add_argument("--config", help="JSON file with TrialSpec fields")
    v.add_argument("--examples", action="store_true", help="check the worked examples only")
    v.add_argument("--dim", help="comma-separated dimensions")
    v.add_argument("--count", type=int, help="trials per theorem and dimension")
    v.add_argument("--seed", type=int, help="master seed")
    v.add_argument("--theorems", help="comma-separated theorem labels")
    v.add_argument("--maps", help="comma-separated map kinds")
    v.add_argument("--cond-cap", type=float, help="condition number cap")
    v.add_argument("--nu-grid", help="comma-separated nu values")
    v.add_argument("--t-grid", help="comma-separated t values")
    v.add_argument("--n-grid", help="comma-separated tuple sizes")
    v.add_argument("--functions", help="comma-separated convex functions, e.g. square,power:1.5")
    v.add_argument("--out-dir", help="report directory (default ./reports)")
    v.add_argument("--workers", type=int, help="worker processes (default: SPDMEANS_WORKERS "
                                               "or the available cores)")
    v.set_defaults(func=cmd_verify)

    mp = sub.add_parser("map", help="apply a positive map description to a matrix file")
    mp.add_argument("mapfile")
    mp.add_argument("input")
    mp.add_argument("-o", "--output")
    mp.set_defaults(func=cmd_map)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except SpdMeansError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
