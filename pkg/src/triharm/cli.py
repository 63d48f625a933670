"""Command-line entry point: region classification, interpolation planning,
frame decomposition, atom tooling, multiplier application, Sobolev norms,
and the batch ratio/moment experiments.

Exit codes: 0 success, 2 domain error, 3 regularity-threshold error,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

EX_OK = 0
EX_DOMAIN = 2
EX_THRESHOLD = 3
EX_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_triple(text: str):
    parts = text.split(",")
    if len(parts) != 3:
        raise _UsageError(f"need three comma-separated rationals, got {text!r}")
    try:
        return tuple(Fraction(p.strip()) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise _UsageError(f"malformed rational in {text!r}: {exc}")


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise _UsageError(f"malformed rational {text!r}: {exc}")


def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


def _load_config(args) -> "ExperimentConfig":
    from .config import ExperimentConfig, config_from_text

    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = config_from_text(fh.read())
    else:
        cfg = ExperimentConfig()
    overrides = {
        "n": "n",
        "length": "length",
        "p1": "p1",
        "p2": "p2",
        "p3": "p3",
        "s": "s",
        "symbol": "symbol",
        "seed": "input_seed",
        "count": "input_count",
        "threads": "threads",
        "output": "output",
        "delta": "delta",
    }
    for flag, field in overrides.items():
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, field, val)
    if getattr(args, "dilations", None):
        cfg.dilations = tuple(int(t) for t in args.dilations.split(","))
    if getattr(args, "no_timestamp", False):
        cfg.timestamp = False
    if getattr(args, "no_vanishing", False):
        cfg.vanishing = False
    return cfg


def _grid_spec(args):
    from .grid import GridSpec

    return GridSpec(dim=args.dim, n=args.n, length=args.length)


# -- subcommand handlers ---------------------------------------------------


def cmd_classify(args) -> int:
    from .regions import ExponentPoint, classify, required_regularity

    t = _parse_triple(args.t)
    pt = ExponentPoint(t=t, n=args.n_dim)
    label = classify(pt)
    if label == "none":
        print(f"point ({args.t}) lies in no region")
        return EX_DOMAIN
    thr = required_regularity(pt)
    print(f"{label}, threshold s > {_fraction_str(thr)}*n")
    print(
        json.dumps(
            {
                "t": [_fraction_str(x) for x in pt.t],
                "region": label,
                "threshold_over_n": _fraction_str(thr),
            }
        )
    )
    return EX_OK


def cmd_plan(args) -> int:
    from .regions import (
        BaseRegion,
        ExponentPoint,
        plan_interpolation,
        plan_to_json,
        verify_plan,
    )

    t = _parse_triple(args.t)
    s = _parse_fraction(args.s)
    pt = ExponentPoint(t=t, n=args.n_dim)
    result = plan_interpolation(pt, s)
    if isinstance(result, BaseRegion):
        print(f"base region {result.label}: no interpolation needed")
        return EX_OK
    ok, diags = verify_plan(result)
    print(f"plan for {args.t} in {result.region} at s = {args.s}:")
    for ep, label, w in result.endpoints:
        tstr = ",".join(_fraction_str(x) for x in ep.t)
        print(f"  {label}: ({tstr})  weight {_fraction_str(w)}")
    print(f"verified: {ok}" + ("" if ok else f" ({'; '.join(diags)})"))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(plan_to_json(result))
    else:
        print(plan_to_json(result))
    return EX_OK if ok else EX_DOMAIN


def cmd_lp_decompose(args) -> int:
    from .dyadic_frame import analyze, analyzable_levels, coeffs_to_json
    from .grid import lp_norm, read_grid_binary
    from .lp_frame import build_lp_family, lambda_j

    f = read_grid_binary(args.input)
    fam = build_lp_family(f.spec, min_shells=args.min_shells)
    if args.energies:
        print("j,l2_energy")
        for j in fam.j_range:
            print(f"{j},{lp_norm(lambda_j(fam, f, j), 2):.10g}")
        return EX_OK
    levels = analyzable_levels(fam)
    j = args.j if args.j is not None else levels[-1]
    coeffs = analyze(fam, f, j, args.kind)
    text = coeffs_to_json(coeffs)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return EX_OK


def cmd_atom_make(args) -> int:
    from .atoms import make_atom, validate_atom
    from .grid import write_grid_binary
    from .maximal import DyadicCube

    spec = _grid_spec(args)
    cube = DyadicCube(level=args.cube_level, pos=tuple(int(p) for p in args.cube_pos.split(",")))
    atom = make_atom(spec, cube, p=args.p, moment_order=args.moments, seed=args.seed)
    cert = validate_atom(atom)
    write_grid_binary(atom.f, args.output)
    sidecar = {
        "cube_level": atom.cube.level,
        "cube_pos": list(atom.cube.pos),
        "p": atom.p,
        "moment_order": atom.moment_order,
        "seed": atom.seed,
        "certification": {
            "support": cert["support"],
            "size": cert["size"],
            "moments": cert["moments"],
            "passed": cert["passed"],
        },
    }
    with open(args.output + ".json", "w") as fh:
        json.dump(sidecar, fh, indent=2)
    print(f"atom written to {args.output} (certified: {cert['passed']})")
    return EX_OK if cert["passed"] else EX_DOMAIN


def cmd_atom_check(args) -> int:
    from .atoms import Atom, decay_profile_check, validate_atom
    from .grid import read_grid_binary
    from .lp_frame import build_lp_family
    from .maximal import DyadicCube

    f = read_grid_binary(args.input)
    with open(args.input + ".json") as fh:
        side = json.load(fh)
    atom = Atom(
        f=f,
        cube=DyadicCube(side["cube_level"], tuple(side["cube_pos"])),
        p=side["p"],
        moment_order=side["moment_order"],
        seed=side["seed"],
    )
    cert = validate_atom(atom)
    print(f"certification: {cert['passed']} (support={cert['support']}, "
          f"size={cert['size']}, moments={cert['moments']})")
    fam = build_lp_family(f.spec, min_shells=args.min_shells)
    report = decay_profile_check(fam, atom, l0=args.decay_exponent)
    print("j,lambda_ratio,gamma_ratio")
    for j in sorted(report.pointwise_lambda):
        print(f"{j},{report.pointwise_lambda[j]:.6g},{report.pointwise_gamma[j]:.6g}")
    print(f"# spread_lambda={report.spread('pointwise_lambda'):.6g}")
    return EX_OK if cert["passed"] else EX_DOMAIN


def cmd_multiplier_apply(args) -> int:
    from .experiments import build_symbol
    from .grid import read_grid_binary, write_grid_binary
    from .multiplier import apply_direct, apply_fast

    cfg = _load_config(args)
    inputs = [read_grid_binary(p) for p in args.inputs]
    spec = inputs[0].spec
    cfg.n, cfg.length, cfg.dim = spec.n, spec.length, spec.dim
    sigma = build_symbol(cfg, spec, m=len(inputs))
    out = apply_direct(sigma, inputs) if args.direct else apply_fast(sigma, inputs)
    write_grid_binary(out, args.output)
    print(f"wrote {args.output}")
    return EX_OK


def cmd_ls2_norm(args) -> int:
    from .experiments import build_symbol
    from .grid import GridSpec
    from .lp_frame import build_annular_partition
    from .multiplier import ls2_norm

    cfg = _load_config(args)
    if args.n is None and not args.config:
        cfg.n = 32
    if args.length is None and not args.config:
        cfg.length = 8.0
    spec = GridSpec(dim=args.dim, n=cfg.n, length=cfg.length)
    sigma = build_symbol(cfg, spec, m=args.m)
    part = build_annular_partition(spec, args.m)
    value, table = ls2_norm(sigma, part, float(_parse_fraction(cfg.s)), return_table=True)
    print("k,norm")
    for k, v in table:
        print(f"{k},{v:.10g}")
    print(f"# sup={value:.10g}")
    return EX_OK


def cmd_ratio_experiment(args) -> int:
    from .experiments import ratio_experiment

    cfg = _load_config(args)
    result = ratio_experiment(cfg)
    sys.stdout.write(result.csv)
    return EX_OK


def cmd_moment_experiment(args) -> int:
    from .experiments import moment_experiment

    cfg = _load_config(args)
    result = moment_experiment(cfg, pieces=not args.no_pieces, tol=args.tol)
    sys.stdout.write(result.csv)
    return EX_OK


# -- parser wiring -----------------------------------------------------------


def _add_grid_args(p, n=256, length=32.0):
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--length", type=float, default=length)


def _add_config_args(p):
    p.add_argument("--config", help="experiment config file (key/value tables)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--length", type=float, default=None)
    p.add_argument("--p1", default=None)
    p.add_argument("--p2", default=None)
    p.add_argument("--p3", default=None)
    p.add_argument("--s", default=None)
    p.add_argument("--symbol", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--dilations", default=None, help="comma list of log2 dilations")
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--no-vanishing", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="triharm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify an exponent triple")
    p.add_argument("--t", required=True, help="comma triple of rationals 1/p_i")
    p.add_argument("--n-dim", type=int, default=1)
    p.set_defaults(fn=cmd_classify)

    p = sub.add_parser("plan", help="construct an interpolation plan")
    p.add_argument("--t", required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--n-dim", type=int, default=1)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("lp-decompose", help="frame coefficients of a grid binary")
    p.add_argument("--input", required=True)
    p.add_argument("--j", type=int, default=None)
    p.add_argument("--kind", choices=("psi", "theta"), default="psi")
    p.add_argument("--energies", action="store_true", help="print per-level L2 energies")
    p.add_argument("--min-shells", type=int, default=4)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_lp_decompose)

    p = sub.add_parser("atom-make", help="generate and certify a Hardy atom")
    _add_grid_args(p)
    p.add_argument("--cube-level", type=int, default=-1)
    p.add_argument("--cube-pos", default="0")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--moments", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_atom_make)

    p = sub.add_parser("atom-check", help="re-certify an atom and run decay checks")
    p.add_argument("--input", required=True)
    p.add_argument("--decay-exponent", type=float, default=4.0)
    p.add_argument("--min-shells", type=int, default=4)
    p.set_defaults(fn=cmd_atom_check)

    p = sub.add_parser("multiplier-apply", help="apply a symbol to grid binaries")
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--direct", action="store_true", help="force the oracle path")
    _add_config_args(p)
    p.set_defaults(fn=cmd_multiplier_apply)

    p = sub.add_parser("ls2-norm", help="scale-invariant Sobolev norm of a symbol")
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--dim", type=int, default=1)
    _add_config_args(p)
    p.set_defaults(fn=cmd_ls2_norm)

    p = sub.add_parser("ratio-experiment", help="randomized boundedness-ratio study")
    _add_config_args(p)
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_ratio_experiment)

    p = sub.add_parser("moment-experiment", help="vanishing-moment residual sweep")
    _add_config_args(p)
    p.add_argument("--output", default=None)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--no-pieces", action="store_true")
    p.set_defaults(fn=cmd_moment_experiment)

    return parser


def main(argv=None) -> int:
    from .grid import DomainError
    from .regions import RegionError, ThresholdError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EX_USAGE
    except ThresholdError as exc:
        print(f"threshold error: {exc}", file=sys.stderr)
        return EX_THRESHOLD
    except (DomainError, RegionError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EX_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EX_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
