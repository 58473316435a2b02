"""Command-line interface: ``ckrank {simulate,test,critvals,mc,verify-lln}``.

Exit codes: 0 success, 2 usage error, 3 model validation failure or
missing critical value, 4 I/O error, 5 degenerate data, 6 too few
accepted limit draws.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .cksvar import load_params
from .errors import CkrankError, DegenerateData, InsufficientAcceptedDraws
from .limitdist import CritValTable, LimitSimConfig, make_table
from .montecarlo import McConfig, format_cells, run_table, verify_lln
from .ranktest import CSV_HEADER, run_test
from .rng import RngState
from .simulate import DESIGNS, mc_design, occupation, read_series_csv, simulate_path, write_series_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4
EXIT_DEGENERATE = 5
EXIT_DRAWS = 6

log = logging.getLogger("ckrank")


class UsageError(Exception):
    """Flag combination or value rejected before any work starts."""


# ---------------------------------------------------------------------------
# argument types


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _float_list(lo: float, hi: float, *, lo_open: bool, hi_open: bool):
    def parse(text: str) -> tuple:
        try:
            vals = tuple(float(t) for t in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
        for v in vals:
            if (v < lo or (lo_open and v == lo)) or (v > hi or (hi_open and v == hi)):
                raise argparse.ArgumentTypeError(f"value {v} out of range")
        return vals

    return parse


def _level(text: str) -> float:
    return _float_list(0.0, 1.0, lo_open=True, hi_open=True)(text)[0]


def _int_list(text: str) -> tuple:
    return tuple(_positive_int(t) for t in text.split(","))


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------------------
# path validation


def _existing_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    return p


def _writable_target(path: str) -> Path:
    p = Path(path)
    parent = p.parent if str(p.parent) else Path(".")
    if not parent.is_dir():
        raise FileNotFoundError(f"{path}: directory {parent} does not exist")
    return p


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(args) -> int:
    if (args.design is None) == (args.params is None):
        raise UsageError("give exactly one of --design or --params")
    out = _writable_target(args.out)
    if args.params is not None:
        params = load_params(_existing_file(args.params))
    else:
        params, _ = mc_design(args.design)
    path = simulate_path(params, args.n, RngState(args.seed), burn_in=args.burn_in)
    write_series_csv(path.series, out)
    occ = occupation(path.series.y)
    print(f"wrote {args.n} rows to {out}")
    print(f"occupation: y>=0 {occ.count_plus} ({occ.frac_plus:.4f}), y<0 {occ.count_minus} ({occ.frac_minus:.4f})")
    return EXIT_OK


def cmd_test(args) -> int:
    series = read_series_csv(_existing_file(args.input))
    table = CritValTable.read(_existing_file(args.critvals))
    outcomes = [
        run_test(series, q0, args.variant, table, args.alpha, args.tau,
                 y0=args.y0, lrv_lags=args.lrv_lags, kernel=args.kernel)
        for q0 in args.q0
    ]
    if args.format == "csv":
        print(CSV_HEADER)
        for o in outcomes:
            print(o.csv_row())
    else:
        print("\n\n".join(o.summary() for o in outcomes))
    return EXIT_OK


def cmd_critvals(args) -> int:
    out = _writable_target(args.out)
    if args.variant == "sb" and (any(t > 0 for t in args.taus) or any(w != 0 for w in args.w0)):
        raise UsageError("SB tables are unconditional: use --taus 0 and --w0 0")
    table = CritValTable()
    for w0 in args.w0:
        try:
            cfg = LimitSimConfig(
                variant=args.variant, q0=args.q0, grid=args.grid, reps=args.reps, seed=args.seed,
                taus=args.taus, alphas=args.alphas, w0_init=w0, workers=args.workers,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        table = table.merge(make_table(cfg))
    table.write(out)
    print(f"wrote {len(table.rows)} rows to {out}")
    return EXIT_OK


def cmd_mc(args) -> int:
    out = _writable_target(args.out)
    mb = CritValTable.read(_existing_file(args.critvals_mb))
    sb = CritValTable.read(_existing_file(args.critvals_sb))
    designs = tuple(DESIGNS) if args.design == "both" else (args.design,)
    try:
        cfg = McConfig(
            mb_table=mb, sb_table=sb, designs=designs, sample_sizes=args.sizes, reps=args.reps,
            base_seed=args.seed, retention_threshold=args.retention, alpha=args.alpha, tau=args.tau,
            workers=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cells = run_table(cfg)
    Path(out).write_text(format_cells(cells))
    for c in cells[::4]:
        log.info("%s n=%d: mean discards per replication %.3f", c.design, c.n, c.mean_discards_per_rep)
    print(f"wrote {len(cells)} cells to {out}")
    return EXIT_OK


def cmd_verify_lln(args) -> int:
    report = verify_lln(args.design, args.n, args.seed)
    print(report.summary())
    print("within tolerance" if report.passes() else "outside tolerance")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ckrank", description="Cointegrating rank tests for censored and kinked SVARs.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a path and write it as CSV")
    p.add_argument("--design", choices=sorted(DESIGNS))
    p.add_argument("--params", help="model parameter file (key = value format)")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--burn-in", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="run the MB or SB rank test on a CSV series")
    p.add_argument("--input", required=True)
    p.add_argument("--q0", type=_int_list, required=True, help="hypothesized number of common trends (comma list)")
    p.add_argument("--variant", choices=["mb", "sb"], default="mb")
    p.add_argument("--alpha", type=_level, default=0.10)
    p.add_argument("--tau", type=float, default=None, help="occupation threshold (default 0.15 for MB, 0 for SB)")
    p.add_argument("--critvals", required=True)
    p.add_argument("--y0", type=float, default=0.0, help="level of y preceding the sample")
    p.add_argument("--lrv-lags", type=_positive_int, default=None)
    p.add_argument("--kernel", choices=["bartlett"], default="bartlett")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("critvals", help="simulate limit distributions and tabulate critical values")
    p.add_argument("--variant", choices=["mb", "sb"], required=True)
    p.add_argument("--q0", type=_positive_int, required=True)
    p.add_argument("--taus", type=_float_list(0.0, 0.5, lo_open=False, hi_open=True), default=(0.0, 0.15))
    p.add_argument("--alphas", type=_float_list(0.0, 1.0, lo_open=True, hi_open=True), default=(0.01, 0.05, 0.10))
    p.add_argument("--reps", type=_positive_int, default=100_000)
    p.add_argument("--grid", type=_positive_int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--w0", type=_floats, default=(0.0,), help="initialization values (comma list)")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_critvals)

    p = sub.add_parser("mc", help="rejection-rate study over the bivariate designs")
    p.add_argument("--design", choices=sorted(DESIGNS) + ["both"], default="both")
    p.add_argument("--sizes", type=_int_list, default=(200, 500, 1000, 1500))
    p.add_argument("--reps", type=_positive_int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", "--workers", dest="threads", type=_positive_int, default=1)
    p.add_argument("--critvals-mb", required=True)
    p.add_argument("--critvals-sb", required=True)
    p.add_argument("--alpha", type=_level, default=0.10)
    p.add_argument("--tau", type=float, default=0.15)
    p.add_argument("--retention", type=float, default=0.15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify-lln", help="regime-conditional sample moments on one long path")
    p.add_argument("--design", choices=sorted(DESIGNS), default="nonlinear")
    p.add_argument("--n", type=_positive_int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_lln)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ckrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ckrank: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DegenerateData as exc:
        print(f"ckrank: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InsufficientAcceptedDraws as exc:
        print(f"ckrank: {exc}", file=sys.stderr)
        return EXIT_DRAWS
    except (CkrankError, ValueError) as exc:
        print(f"ckrank: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
