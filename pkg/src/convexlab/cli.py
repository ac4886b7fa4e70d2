"""Command-line interface.

Exit codes: 0 success, 1 domain or budget error, 2 bad flags, 3 a verification
check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import exact
from .errors import BudgetError, DomainError, InvalidParameter
from .export import config_to_dict, curve_csv, summaries_csv, svg_document
from .geometry import make_polygon
from .sampling import SAMPLERS, make_rng, sample
from .verify import SUITES, run_suite, write_report

EXPECTED_EXPONENT = {
    "triangle": "1 (n log n)",
    "square": "1.5",
    "rejection": "exponential in n",
}


def _positive_int(lo):
    def conv(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}")
        return v

    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convexlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("prob", help="convex-position probability")
    pr.add_argument("--kappa", type=_positive_int(3), required=True)
    pr.add_argument("--n", type=_positive_int(3), required=True)
    mode = pr.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact rational (kappa 3 or 4)")
    mode.add_argument("--asymptotic-log", action="store_true", help="log of the asymptotic equivalent")

    sa = sub.add_parser("sample", help="draw one configuration")
    sa.add_argument("--kappa", type=_positive_int(3), required=True)
    sa.add_argument("--n", type=_positive_int(3), required=True)
    sa.add_argument("--algo", choices=SAMPLERS, default="kappa")
    sa.add_argument("--seed", type=_positive_int(0), default=0)
    sa.add_argument("--format", choices=("json", "svg"), default="json")
    sa.add_argument("--out", help="output file (default stdout)")
    sa.add_argument("--plot", help="also write a PNG figure to this path")

    sh = sub.add_parser("shape", help="host polygon and limit shape")
    sh.add_argument("--kappa", type=_positive_int(3), required=True)
    sh.add_argument("--format", choices=("svg", "csv"), default="svg")
    sh.add_argument("--points-per-arc", type=_positive_int(2), default=64)
    sh.add_argument("--out")

    cu = sub.add_parser("curve", help="CSV grid of the limit arc and its variance functions")
    cu.add_argument("--points", type=_positive_int(2), default=101)
    cu.add_argument("--out")

    ve = sub.add_parser("verify", help="run a statistical verification suite")
    ve.add_argument("--suite", choices=SUITES, default="quick")
    ve.add_argument("--seed", type=_positive_int(0), default=0)
    ve.add_argument("--out", default="report.json")
    ve.add_argument("--only", action="append", help="restrict to the named check (repeatable)")
    ve.add_argument("--csv", help="also write a CSV summary")
    ve.add_argument("--figures", help="directory for PNG figures")

    be = sub.add_parser("bench", help="wall time against n and the fitted exponent")
    be.add_argument("--algo", choices=SAMPLERS, required=True)
    be.add_argument("--kappa", type=_positive_int(3))
    be.add_argument("--n-list", type=lambda t: [int(x) for x in t.split(",")])
    be.add_argument("--repeats", type=_positive_int(1), default=5)
    be.add_argument("--seed", type=_positive_int(0), default=0)
    return p


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_prob(args, parser) -> int:
    if args.exact:
        if args.kappa not in (3, 4):
            parser.error(f"no exact formula for kappa={args.kappa}")
        print(exact.exact_probability(args.kappa, args.n))
        return 0
    if args.asymptotic_log:
        print(repr(exact.log_p_asymptotic(args.kappa, args.n)))
        return 0
    out = {"schema": 1, "kappa": args.kappa, "n": args.n,
           "log_asymptotic": exact.log_p_asymptotic(args.kappa, args.n)}
    if args.kappa in (3, 4):
        q = exact.exact_probability(args.kappa, args.n)
        out["exact"] = str(q)
        out["log_exact"] = exact.log_fraction(q)
    print(json.dumps(out))
    return 0


def cmd_sample(args, parser) -> int:
    if args.n < args.kappa and args.algo == "kappa":
        parser.error("the kappa sampler needs n >= kappa")
    cfg = sample(args.kappa, args.n, args.algo, make_rng(args.seed))
    poly = make_polygon(args.kappa)
    if args.format == "json":
        _emit(json.dumps(config_to_dict(cfg, args.kappa, args.seed)) + "\n", args.out)
    else:
        _emit(svg_document(poly, cfg.points), args.out)
    if args.plot:
        from .report import plot_sample

        plot_sample(poly, cfg, args.plot)
    return 0


def cmd_shape(args, parser) -> int:
    poly = make_polygon(args.kappa)
    if args.format == "svg":
        _emit(svg_document(poly), args.out)
    else:
        from .geometry import limit_shape

        rows = ["x,y"] + [f"{x:.12g},{y:.12g}" for x, y in limit_shape(poly, args.points_per_arc)]
        _emit("\n".join(rows) + "\n", args.out)
    return 0


def cmd_curve(args, parser) -> int:
    _emit(curve_csv(args.points), args.out)
    return 0


def cmd_verify(args, parser) -> int:
    results = run_suite(args.suite, args.seed, args.only)
    if args.only and not results:
        parser.error("no check matched --only")
    write_report(results, args.out)
    if args.csv:
        _emit(summaries_csv(results), args.csv)
    if args.figures:
        from .report import write_figures

        write_figures(results, args.figures)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.test} estimate={r.estimate:.6g} "
              f"target={r.target} ({r.seconds:.1f}s)")
    return 0 if all(r.passed for r in results) else 3


def cmd_bench(args, parser) -> int:
    kappa = args.kappa or {"triangle": 3, "square": 4}.get(args.algo, 3)
    defaults = {
        "kappa": [6, 9, 12, 18, 24],
        "triangle": [500, 1000, 2000, 4000, 8000],
        "square": [500, 1000, 2000, 4000, 8000],
        "rejection": [4, 5, 6, 7, 8],
    }
    n_list = args.n_list or defaults[args.algo]
    rng = make_rng(args.seed)
    times = []
    for n in n_list:
        runs = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            sample(kappa, n, args.algo, rng)
            runs.append(time.perf_counter() - t0)
        times.append(float(np.median(runs)))
    slope = float(np.polyfit(np.log(n_list), np.log(times), 1)[0])
    expected = EXPECTED_EXPONENT.get(args.algo, f"{kappa / 2 + 1:g} (n^(kappa/2+1))")
    print(json.dumps({"schema": 1, "algorithm": args.algo, "kappa": kappa, "n": n_list,
                      "seconds": times, "fitted_exponent": slope, "expected_exponent": expected}))
    return 0


COMMANDS = {
    "prob": cmd_prob,
    "sample": cmd_sample,
    "shape": cmd_shape,
    "curve": cmd_curve,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except (DomainError, BudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvalidParameter as exc:
        parser.error(str(exc))


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
