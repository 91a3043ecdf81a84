"""Command-line interface: ``mbens <subcommand> ...``.

Data goes to stdout as JSON (schema "mb/1") or CSV; diagnostics go to
stderr.  Exit codes: 0 success, 2 invalid parameters, 3 failed verification,
1 for a numerical failure (quadrature or sampler tuning) outside ``verify``.
Every JSON number is a decimal string with at least 17 significant digits,
except integer counts and the sign of a log-domain value.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from typing import Sequence

import numpy as np

from .biortho import ConditioningError, ConsistencyError, biortho_poly, h_k, h_k_check
from .kernel import ConvergenceError, build_kernel, kernel_eval, write_grid_csv
from .norms import norm_lambda, selberg, z_ensemble, z_oracle_fullline, z_oracle_moments
from .sampler import TuningError, linear_statistic, run_chain, write_samples_csv
from .specfun import DomainError, SignedLogReal, precision
from .verify import SUITES, run_suites
from .weights import FAMILIES, EnsembleSpec, Weight

SCHEMA = "mb/1"
EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 2, 3

# weight parameter flags; each family uses the subset named by its fields
_PARAM_FLAGS = ("a", "b", "alpha", "beta", "c")


def num(x) -> str:
    """Float as a decimal string with 17 significant digits (lossless round trip)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".16e")


def _slr_json(v: SignedLogReal) -> dict:
    return {"log_value": num(v.logmag) if v.sign else "-inf", "sign": v.sign, "value": num(v.to_real())}


def _stringify(obj):
    """Turn every float (e.g. weight parameters) into a 17-digit string; ints and bools stay."""
    if isinstance(obj, dict):
        return {k: _stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify(v) for v in obj]
    if isinstance(obj, float):
        return num(obj)
    return obj


def _emit(payload: dict) -> None:
    out = {"schema": SCHEMA}
    out.update(payload)
    json.dump(_stringify(out), sys.stdout, indent=2)
    sys.stdout.write("\n")


class _Parser(argparse.ArgumentParser):
    """argparse with exit status 2 and usage on stderr (its default) for every error."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- weights


def _add_weight_args(p: argparse.ArgumentParser, with_n: bool = True) -> None:
    p.add_argument("--weight", required=True, choices=sorted(FAMILIES), help="weight family")
    for flag in _PARAM_FLAGS:
        p.add_argument(f"--{flag}", type=float, default=None, help=f"weight parameter {flag}")
    p.add_argument("--theta", type=float, required=True)
    if with_n:
        p.add_argument("--n", type=int, required=True, help="number of particles N")


def _weight_from_args(args) -> Weight:
    cls = FAMILIES[args.weight]
    names = [f.name for f in dataclasses.fields(cls)]
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise DomainError(f"{args.weight} needs --{' --'.join(missing)}")
    extra = [f for f in _PARAM_FLAGS if f not in names and getattr(args, f) is not None]
    if extra:
        raise DomainError(f"{args.weight} does not take --{' --'.join(extra)}")
    return cls(**{n: getattr(args, n) for n in names})


def _spec_from_args(args) -> EnsembleSpec:
    return EnsembleSpec(_weight_from_args(args), args.n, args.theta)


# ---------------------------------------------------------------- commands


def cmd_selberg(args) -> int:
    _emit(_slr_json(selberg(args.n, args.a1, args.a2, args.tau)) | {"command": "selberg"})
    return EXIT_OK


def cmd_norm(args) -> int:
    if args.partition is not None:
        params = {k: v for k, v in (("alpha1", args.alpha1), ("alpha2", args.alpha2), ("a", args.a), ("b", args.b))
                  if v is not None}
        lam = [int(v) for v in args.partition.split(",") if v.strip()]
        val = norm_lambda(args.weight, lam, args.n, **params)
        _emit({"command": "norm", "family": args.weight, "partition": lam, "N": args.n} | _slr_json(val))
        return EXIT_OK
    spec = _spec_from_args(args)
    val = z_ensemble(spec)
    payload = {"command": "norm", "spec": spec.to_json()} | _slr_json(val)
    if args.oracle:
        oracle = z_oracle_fullline(spec) if spec.fullline else z_oracle_moments(spec)
        payload["oracle"] = _slr_json(oracle)
        payload["rel_error"] = num(val.rel_diff(oracle))
    _emit(payload)
    return EXIT_OK


def cmd_hk(args) -> int:
    w = _weight_from_args(args)
    rows = []
    for k in range(args.k + 1) if args.all else [args.k]:
        row = {"k": k} | _slr_json(h_k(w, args.theta, k))
        if not w.fullline:
            chk = h_k_check(w, args.theta, k)
            row["printed"] = _slr_json(chk.printed)
            row["truth_over_printed"] = num(chk.ratio)
            row["expected_ratio"] = num(chk.expected_ratio)
        rows.append(row)
    _emit({"command": "hk", "weight": w.to_json(), "theta": num(args.theta), "precision": precision(), "norms": rows})
    return EXIT_OK


def cmd_poly(args) -> int:
    w = _weight_from_args(args)
    poly = biortho_poly(args.side, w, args.k, args.theta)
    _emit({"weight": w.to_json(), "theta": num(args.theta), "k": args.k, "side": args.side,
           "coeffs": poly.to_json()})
    return EXIT_OK


def _grid(text: str) -> np.ndarray:
    """'lo:hi:count' or a comma-separated list."""
    if ":" in text:
        lo, hi, cnt = text.split(":")
        return np.linspace(float(lo), float(hi), int(cnt))
    return np.array([float(v) for v in text.split(",") if v.strip()])


def cmd_kernel(args) -> int:
    K = build_kernel(_spec_from_args(args))
    xs, ys = _grid(args.x), _grid(args.y if args.y is not None else args.x)
    lo, hi = K.weight.support
    for v in np.concatenate([xs, ys]):
        if not lo < v < hi:
            raise DomainError(f"grid point {v:g} outside the open support ({lo:g}, {hi:g})")
    if args.output == "csv":
        write_grid_csv(K, xs, ys, sys.stdout)
        return EXIT_OK
    rows = []
    for x in xs:
        for y in ys:
            bare = kernel_eval(K, x, y)
            rows.append({"x": num(x), "y": num(y), "K_bare": num(bare),
                         "K_weighted": num(bare * K.weight.density(float(y)))})
    _emit({"command": "kernel", "spec": K.spec.to_json(),
           "convention": "K_weighted(x, y) = K_bare(x, y) * w(y)", "values": rows})
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.suite
    for name in names:
        if name != "all" and name not in SUITES:
            raise DomainError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    results, errata = run_suites(names, args.n_max)
    ok = all(r.passed for r in results) and all(e.reproduced for e in errata)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.identity:<48} cases={r.cases:<4} "
              f"max_err={r.max_error:.2e}  tol={r.tol:.0e}  {r.seconds:.2f}s", file=sys.stderr)
        if r.note:
            print(f"      {r.note}", file=sys.stderr)
    for e in errata:
        print(f"{'PASS' if e.reproduced else 'FAIL'}  erratum:{e.name:<40} "
              f"min_discrepancy={e.min_discrepancy:.2e} factor_err={e.factor_error:.2e}", file=sys.stderr)
    _emit({
        "command": "verify",
        "n_max": args.n_max,
        "precision": precision(),
        "passed": ok,
        "checks": [{"identity": r.identity, "cases": r.cases, "max_error": num(r.max_error),
                    "tol": num(r.tol), "passed": r.passed, "note": r.note} for r in results],
        "erratum_checks": [{"name": e.name, "cases": e.cases, "min_discrepancy": num(e.min_discrepancy),
                            "factor_error": num(e.factor_error), "tol": num(e.tol),
                            "still_discrepant": e.reproduced} for e in errata],
    })
    if not ok:
        worst = max((r for r in results if not r.passed), key=lambda r: r.max_error / r.tol, default=None)
        if worst is not None:
            print(f"verification failed: {worst.identity} max error {worst.max_error:.3e} > {worst.tol:.0e}",
                  file=sys.stderr)
        else:
            print("verification failed: an erratum check no longer reproduces", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sample(args) -> int:
    spec = _spec_from_args(args)
    res = run_chain(spec, args.steps, args.seed, burn_in=args.burn_in)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            write_samples_csv(res, fh, every=args.every)
    mean, se = linear_statistic(res.samples, args.stat, args.threshold)
    _emit({"command": "sample", "spec": spec.to_json(), "seed": args.seed, "steps": args.steps,
           "burn_in": res.burn_in, "acceptance_rate": num(res.acceptance_rate),
           "statistic": args.stat, "mean": num(mean), "stderr": num(se)})
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mbens", description="Muttalib-Borodin ensembles with classical weights.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("selberg", help="Selberg integral S_N(a1, a2, tau)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a1", type=float, required=True)
    p.add_argument("--a2", type=float, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.set_defaults(func=cmd_selberg)

    p = sub.add_parser("norm", help="normalisation Z_N (or a partition-indexed norm with --partition)")
    p.add_argument("--weight", required=True)
    for flag in _PARAM_FLAGS + ("alpha1", "alpha2"):
        p.add_argument(f"--{flag}", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--oracle", action="store_true", help="also evaluate the moment-determinant oracle")
    p.add_argument("--partition", default=None, help="comma-separated parts; selects the partition norm")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("hk", help="biorthogonal norms h_k")
    _add_weight_args(p, with_n=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--all", action="store_true", help="report h_0..h_k")
    p.set_defaults(func=cmd_hk)

    p = sub.add_parser("poly", help="monic biorthogonal polynomial p_k or q_k")
    _add_weight_args(p, with_n=False)
    p.add_argument("--side", choices=("p", "q"), required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_poly)

    p = sub.add_parser("kernel", help="correlation kernel on a grid")
    _add_weight_args(p)
    p.add_argument("--x", required=True, help="lo:hi:count or comma list")
    p.add_argument("--y", default=None, help="defaults to --x")
    p.add_argument("--output", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("verify", help="run identity checks")
    p.add_argument("--suite", nargs="+", default=["all"], help=f"all or any of {', '.join(SUITES)}")
    p.add_argument("--n-max", type=int, default=5)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="Metropolis sampling of the joint density")
    _add_weight_args(p)
    p.add_argument("--steps", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--stat", choices=("sum_x", "sum_x2", "count_below"), default="sum_x")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--csv", default=None, help="write samples to this CSV file")
    p.add_argument("--every", type=int, default=1, help="CSV thinning")
    p.set_defaults(func=cmd_sample)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "norm" and args.partition is None:
            if args.theta is None:
                raise DomainError("norm needs --theta (or --partition for a partition norm)")
            if args.weight not in FAMILIES:
                raise DomainError(f"unknown weight {args.weight!r}; choose from {', '.join(sorted(FAMILIES))}")
        precision()
        return args.func(args)
    except DomainError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ConvergenceError, TuningError, ConsistencyError, ConditioningError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY if args.command == "verify" else 1


if __name__ == "__main__":
    sys.exit(main())
