"""Command-line interface.

Subcommands:
  synth   generate a synthetic instance (.rel / .gt / .outliers files)
  solve   estimate absolute rotations from a measurement file
  eval    align an estimate against ground truth, append a CSV row
  bench   run a benchmark sweep and write its CSV table

Exit codes: 0 success, 2 invalid flags, 3 I/O or file-format failure,
4 disconnected measurement graph, 5 solver failure, 6 length mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import evaluate, fileio, sync, synth
from .errors import (
    DisconnectedGraph,
    FileFormatError,
    InvalidConfig,
    LengthMismatch,
    RotsyncError,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DISCONNECTED = 4
EXIT_SOLVER = 5
EXIT_LENGTH = 6


def _fail(code: int, message: str) -> int:
    print(f"rotsync: error: {message}", file=sys.stderr)
    return code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rotsync", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--missing", type=float, default=0.0)
    p.add_argument("--outliers", type=float, default=0.0)
    p.add_argument("--noise-min-deg", type=float, default=0.0)
    p.add_argument("--noise-max-deg", type=float, default=0.0)
    p.add_argument("--mode", choices=["euler", "haar"], default="euler")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)

    p = sub.add_parser("solve", help="recover absolute rotations")
    p.add_argument("--method", choices=["rgodec", "eig", "eig-irls"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lambda", dest="lam", default="auto")
    p.add_argument("--sigma", type=float, default=sync.DEFAULT_SIGMA)
    p.add_argument("--eps", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels-out", default=None)

    p = sub.add_parser("eval", help="compare an estimate to ground truth")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--csv-out", required=True)
    p.add_argument("--tag", default=None, help="method tag for the CSV row (default: estimate file stem)")

    p = sub.add_parser("bench", help="run a benchmark sweep")
    p.add_argument("--sweep", choices=list(evaluate.SWEEP_VARIABLES), required=True)
    p.add_argument("--grid", required=True, help="comma-separated grid values")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--missing", type=float, default=0.5)
    p.add_argument("--noise-deg", type=float, default=5.0)
    p.add_argument("--outliers", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--methods", default="rgodec,eig,eig-irls")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv-out", required=True)
    return parser


def _cmd_synth(args) -> int:
    config = synth.SynthConfig(
        n=args.n,
        missing_fraction=args.missing,
        outlier_fraction=args.outliers,
        noise_min_deg=args.noise_min_deg,
        noise_max_deg=args.noise_max_deg,
        ground_truth_mode=args.mode,
        seed=args.seed,
    )
    try:
        config.validate()
    except InvalidConfig as exc:
        return _fail(EXIT_USAGE, str(exc))
    ms, gt = synth.generate(config)
    try:
        fileio.write_measurements(args.out_prefix + ".rel", ms)
        fileio.write_rotations(args.out_prefix + ".gt", gt.rotations)
        fileio.write_outlier_edges(args.out_prefix + ".outliers", gt.outlier_edges)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    print(
        f"synth n={config.n} edges={len(ms.edges)} outliers={len(gt.outlier_edges)} "
        f"seed={config.seed} prefix={args.out_prefix}"
    )
    return EXIT_OK


def _cmd_solve(args) -> int:
    if args.lam != "auto":
        try:
            lam = float(args.lam)
        except ValueError:
            return _fail(EXIT_USAGE, f"--lambda must be 'auto' or a number, got {args.lam!r}")
        if lam < 0.0:
            return _fail(EXIT_USAGE, "--lambda must be nonnegative")
    else:
        lam = "auto"

    try:
        ms, projected = fileio.read_measurements(args.input)
    except FileFormatError as exc:
        return _fail(EXIT_IO, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    try:
        obs = sync.assemble(ms)
    except DisconnectedGraph as exc:
        return _fail(EXIT_DISCONNECTED, str(exc))
    except RotsyncError as exc:
        return _fail(EXIT_IO, str(exc))

    try:
        if args.method == "eig":
            sol = sync.solve_eig(obs)
        elif args.method == "eig-irls":
            sol = sync.solve_eig_irls(obs, max_rounds=args.max_iter)
        else:
            sol = sync.solve_rgodec(
                obs,
                lam=lam,
                sigma=args.sigma,
                eps=args.eps,
                max_iter=args.max_iter,
                rng=args.seed,
            )
    except (RotsyncError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_SOLVER, str(exc))

    try:
        fileio.write_rotations(args.output, sol.rotations)
        if args.labels_out:
            fileio.write_outlier_edges(
                args.labels_out, [e for e, bad in sol.edge_labels.items() if bad]
            )
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    lam_text = format(sol.lambda_value, ".17g") if sol.lambda_value is not None else "na"
    obj_text = format(sol.objective_trace[-1], ".9g") if sol.objective_trace else "na"
    outlier_count = sum(1 for bad in sol.edge_labels.values() if bad)
    print(
        f"method={sol.method} n={obs.n} edges={len(sol.edge_labels)} lambda={lam_text} "
        f"iterations={sol.iterations} runtime_s={sol.runtime_seconds:.6f} "
        f"objective={obj_text} projected_blocks={projected} outliers={outlier_count}"
    )
    return EXIT_OK


def _cmd_eval(args) -> int:
    try:
        est, _ = fileio.read_rotations(args.est)
        gt, _ = fileio.read_rotations(args.gt)
    except FileFormatError as exc:
        return _fail(EXIT_IO, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    try:
        aligned = evaluate.align(est, gt)
    except LengthMismatch as exc:
        return _fail(EXIT_LENGTH, str(exc))
    # Alignment and statistics are instantaneous next to solver time and
    # re-runs must be byte-identical, so the row carries no wall time.
    report = evaluate.error_report(aligned, gt, runtime_seconds=0.0)

    tag = args.tag
    if tag is None:
        tag = os.path.splitext(os.path.basename(args.est))[0]
    try:
        row = fileio.append_eval_csv(
            args.csv_out,
            tag,
            gt.shape[0],
            report.mean_deg,
            report.median_deg,
            report.max_deg,
            report.runtime_seconds,
        )
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    print(row)
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        grid = tuple(float(v) for v in args.grid.split(","))
    except ValueError:
        return _fail(EXIT_USAGE, f"bad --grid {args.grid!r}")
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())

    base = synth.SynthConfig(
        n=args.n,
        missing_fraction=args.missing,
        outlier_fraction=args.outliers,
        noise_min_deg=args.noise_deg,
        noise_max_deg=args.noise_deg,
        ground_truth_mode="euler",
        seed=args.seed,
    )
    spec = evaluate.SweepSpec(
        variable=args.sweep, grid=grid, base=base, trials=args.trials, methods=methods
    )
    try:
        spec.validate()
        base.validate()
    except (ValueError, InvalidConfig) as exc:
        return _fail(EXIT_USAGE, str(exc))

    try:
        with open(args.csv_out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(fileio.BENCH_CSV_HEADER + "\n")

            def flush_row(row):
                fh.write(fileio.bench_csv_row(row) + "\n")
                fh.flush()

            evaluate.run_sweep(spec, row_callback=flush_row)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))
    print(f"bench sweep={args.sweep} grid={args.grid} trials={args.trials} csv={args.csv_out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "synth":
        return _cmd_synth(args)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "eval":
        return _cmd_eval(args)
    return _cmd_bench(args)


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
