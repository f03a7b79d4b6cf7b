"""Command-line front end: ``bcqd {estimate,band,critvals,coverage,replay}``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numba
import numpy as np

from . import __version__
from .bands import (
    BandSide,
    CriticalValues,
    Method,
    band_taus,
    build_band,
    simulate_critvals,
)
from .estimator import (
    Grid,
    SortedSample,
    bc_kqd,
    check_bandwidth,
    default_bandwidth,
    standard_grid,
)
from .kernels import Bandwidth, BandwidthTooSmall, kernel_make
from .mc import STANDARD_LEVELS, CoverageConfig, coverage_table_csv, run_coverage
from .svg import render_bands

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    """Shortest round-trip repr; infinities as inf / -inf."""
    return repr(float(x))


def read_sample(path) -> SortedSample:
    """One numeric column, optional header, blank lines ignored."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    values, bad = [], []
    seen_row = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = [f.strip() for f in line.split(",")]
        if all(not f for f in fields):
            continue
        if len([f for f in fields if f]) > 1:
            bad.append(f"line {lineno}: expected one column, got {len(fields)}")
            seen_row = True
            continue
        cell = next(f for f in fields if f)
        try:
            value = float(cell)
        except ValueError:
            if not seen_row:
                seen_row = True  # header
                continue
            bad.append(f"line {lineno}: not a number: {cell!r}")
            continue
        seen_row = True
        if not math.isfinite(value):
            bad.append(f"line {lineno}: non-finite value {cell!r}")
            continue
        values.append(value)
    if bad:
        shown = "; ".join(bad[:10]) + ("; ..." if len(bad) > 10 else "")
        raise DataError(f"{path}: {shown}")
    if not values:
        raise DataError(f"{path}: no numeric data")
    if len(values) < 2:
        raise DataError(f"{path}: need at least 2 observations, got {len(values)}")
    return SortedSample.from_unsorted(values)


def parse_grid(spec: str) -> Grid:
    """``standard``, ``uniform:<count>`` or a path to a file with one point per line."""
    if spec == "standard":
        return standard_grid()
    if spec.startswith("uniform:"):
        try:
            count = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad grid spec {spec!r}") from None
        if count < 1:
            raise UsageError(f"grid count must be >= 1 in {spec!r}")
        return Grid.uniform(count)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"grid spec {spec!r} is neither 'standard', 'uniform:<count>' nor a file")
    try:
        pts = [float(line) for line in path.read_text().split() if line.strip()]
        return Grid(np.asarray(pts))
    except ValueError as exc:
        raise DataError(f"{path}: invalid grid: {exc}") from None


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(
            f"{what} must be a comma-separated list of numbers, got {text!r}"
        ) from None


def resolve_h(spec: str, n: int) -> float:
    if spec == "auto":
        return default_bandwidth(n).h
    try:
        h = float(spec)
    except ValueError:
        raise UsageError(f"--h must be a number or 'auto', got {spec!r}") from None
    try:
        return Bandwidth(h, n).h
    except BandwidthTooSmall as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _level(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {text}")
    return value


def _versions() -> str:
    return f"bcqd {__version__}; numpy {np.__version__}; numba {numba.__version__}"


def write_manifest(out: Path, command: str, argv, config: dict, seed, outputs, elapsed):
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "seed": seed,
        "versions": _versions(),
        "outputs": [str(p) for p in outputs],
        "elapsed_seconds": elapsed,
    }
    path = Path(str(out) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def cmd_estimate(args, argv):
    started = time.perf_counter()
    kernel = kernel_make(args.kernel)
    sample = read_sample(args.input)
    h = resolve_h(args.h, sample.n)
    grid = parse_grid(args.grid)
    est = bc_kqd(sample, kernel, h, grid)
    for msg in check_bandwidth(Bandwidth(h, sample.n)):
        print(f"warning: {msg}", file=sys.stderr)
    out = Path(args.out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "qhat", "psi", "qhat_bc"])
        for row in zip(grid.points, est.qhat, est.psi, est.qhat_bc):
            writer.writerow([fmt(v) for v in row])
    config = {"input": str(args.input), "kernel": kernel.name.value, "h": h,
              "h_spec": args.h, "grid": args.grid, "n": sample.n}
    write_manifest(out, "estimate", argv, config, None, [out], time.perf_counter() - started)
    return EXIT_OK


def cmd_band(args, argv):
    started = time.perf_counter()
    kernel = kernel_make(args.kernel)
    sample = read_sample(args.input)
    side = BandSide(args.side)
    if args.critvals:
        try:
            critical = CriticalValues.from_json(Path(args.critvals).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"{args.critvals}: cannot load critical values: {exc}") from None
        h = critical.h if args.h == "auto" else resolve_h(args.h, sample.n)
        grid = critical.grid if args.grid == "standard" else parse_grid(args.grid)
    else:
        h = resolve_h(args.h, sample.n)
        grid = parse_grid(args.grid)
        method = Method.KnownProcess if args.method == "known" else Method.PseudoUniform
        try:
            critical = simulate_critvals(kernel, sample.n, h, grid, args.n_sims,
                                         band_taus([args.level], side), args.seed, method,
                                         args.threads)
        except BandwidthTooSmall as exc:
            raise DataError(str(exc)) from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    est = bc_kqd(sample, kernel, h, grid)
    try:
        band = build_band(est, critical, args.level, side)
    except (ValueError, KeyError) as exc:
        raise DataError(str(exc)) from None
    out = Path(args.out)
    outputs = [out]
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "lower", "upper", "qhat_bc"])
        for row in zip(grid.points, band.lower, band.upper, est.qhat_bc):
            writer.writerow([fmt(v) for v in row])
    if args.json:
        Path(args.json).write_text(json.dumps(band.to_dict(), indent=2) + "\n")
        outputs.append(Path(args.json))
    if args.svg:
        title = f"{args.level:g} {side.value} band, n={sample.n}, h={h:.4g}"
        Path(args.svg).write_text(render_bands(grid.points, [band], title=title))
        outputs.append(Path(args.svg))
    config = {"input": str(args.input), "kernel": kernel.name.value, "h": h, "h_spec": args.h,
              "grid": args.grid, "level": args.level, "side": side.value,
              "method": critical.method.value, "n_sims": critical.n_sims,
              "critvals": args.critvals, "n": sample.n}
    write_manifest(out, "band", argv, config, args.seed, outputs, time.perf_counter() - started)
    return EXIT_OK


def cmd_critvals(args, argv):
    started = time.perf_counter()
    kernel = kernel_make(args.kernel)
    if args.n < 2:
        raise UsageError(f"--n must be >= 2, got {args.n}")
    h = resolve_h(args.h, args.n)
    grid = parse_grid(args.grid)
    taus = parse_floats(args.taus, "--taus")
    method = Method.KnownProcess if args.method == "known" else Method.PseudoUniform
    try:
        critical = simulate_critvals(kernel, args.n, h, grid, args.n_sims, taus, args.seed,
                                     method, args.threads)
    except BandwidthTooSmall as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.write_text(critical.to_json())
    config = {"kernel": kernel.name.value, "n": args.n, "h": h, "h_spec": args.h,
              "grid": args.grid, "n_sims": args.n_sims, "taus": taus,
              "method": method.value}
    write_manifest(out, "critvals", argv, config, args.seed, [out],
                   time.perf_counter() - started)
    return EXIT_OK


def cmd_coverage(args, argv):
    started = time.perf_counter()
    grid = parse_grid(args.grid)
    levels = parse_floats(args.levels, "--levels")
    try:
        config = CoverageConfig(dist=args.dist, n=args.n, levels=tuple(levels), reps=args.reps,
                                n_sims=args.n_sims, grid=grid, kernel_name=args.kernel,
                                bandwidth_c=args.bandwidth_c, seed=args.seed)
        report = run_coverage(config, n_threads=args.threads)
    except BandwidthTooSmall as exc:
        raise DataError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.write_text(report.to_json())
    outputs = [out]
    if args.csv:
        Path(args.csv).write_text(coverage_table_csv([report]))
        outputs.append(Path(args.csv))
    for lv in config.levels:
        print(f"level {lv:g}: coverage {report.coverage[lv]:.4f} "
              f"(+/- {report.mc_stderr[lv]:.4f})")
    cfg = config.to_dict()
    cfg["grid"] = args.grid
    write_manifest(out, "coverage", argv, cfg, args.seed, outputs,
                   time.perf_counter() - started)
    return EXIT_OK


def cmd_replay(args, argv):
    try:
        manifest = json.loads(Path(args.manifest).read_text())
        replay_argv = manifest["argv"]
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"{args.manifest}: cannot read manifest: {exc}") from None
    return main(replay_argv)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bcqd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=_versions())
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, with_input=True):
        if with_input:
            p.add_argument("input", help="CSV file with one numeric column")
        p.add_argument("--kernel", default="truncnormal",
                       choices=["truncnormal", "rect", "epanechnikov"])
        p.add_argument("--h", default="auto", help="bandwidth or 'auto' (n^-3/8)")
        p.add_argument("--grid", default="standard",
                       help="'standard', 'uniform:<count>' or a file of points")
        p.add_argument("--threads", type=int, default=None, help="cap on worker threads")
        p.add_argument("--out", required=True, help="output path")

    p = sub.add_parser("estimate", help="BC-KQD on a grid")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("band", help="uniform confidence band")
    common(p)
    p.add_argument("--level", type=_level, default=0.95)
    p.add_argument("--side", default="two-sided", choices=[s.value for s in BandSide])
    p.add_argument("--method", default="known", choices=["known", "pseudo"])
    p.add_argument("--n-sims", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--critvals", default=None, help="tabulated critical values (JSON)")
    p.add_argument("--json", default=None, help="also write the band as JSON")
    p.add_argument("--svg", default=None, help="also write an SVG plot")
    p.set_defaults(func=cmd_band)

    p = sub.add_parser("critvals", help="tabulate simulated critical values")
    common(p, with_input=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-sims", type=int, default=20000)
    p.add_argument("--taus", default="0.8,0.9,0.95,0.975,0.99,0.995")
    p.add_argument("--method", default="known", choices=["known", "pseudo"])
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_critvals)

    p = sub.add_parser("coverage", help="Monte Carlo coverage of two-sided bands")
    common(p, with_input=False)
    p.add_argument("--dist", required=True, choices=["uniform", "linear", "truncnormal"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--levels", default=",".join(str(lv) for lv in STANDARD_LEVELS))
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--n-sims", type=int, default=20000)
    p.add_argument("--bandwidth-c", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default=None, help="Coverage-table CSV output")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if getattr(args, "threads", None) is not None and args.threads < 1:
        print("bcqd: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, argv)
    except UsageError as exc:
        print(f"bcqd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"bcqd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"bcqd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
