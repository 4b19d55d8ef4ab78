"""Command line entry point: ``pareto-phase <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 a verdict
failed while ``--assert`` was given.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import experiment as ex
from . import oracle
from .errors import ConfigError, InvalidArgumentError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_ASSERT = 0, 2, 3, 4


def _common(p: argparse.ArgumentParser, sim: bool = True) -> None:
    p.add_argument("--n", type=float, required=True, help="sample size (intensity if --poissonized)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--d", type=int)
    g.add_argument("--regime", choices=("star", "starstar"))
    p.add_argument("--c", type=float, default=0.0, help="offset from the critical dimension")
    p.add_argument("--r-max", type=int, default=3)
    p.add_argument("--proj", default="1", help='1-based coordinates, e.g. "1,3,7"')
    p.add_argument("--box", default=None, help='intervals, e.g. "0:0.5,0:1"')
    p.add_argument("--poissonized", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--format", dest="fmt", choices=ex.FORMATS, default="json")
    p.add_argument("--assert", dest="check", action="store_true",
                   help="exit with code 4 unless every verdict passes")
    if sim:
        p.add_argument("--reps", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--points-cap", type=int, default=64)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pareto-phase", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("simulate", help="replicated Monte Carlo run"))
    p = sub.add_parser("sweep", help="Monte Carlo over a range of d")
    _common(p)
    p.add_argument("--d-min", type=int, required=True)
    p.add_argument("--d-max", type=int, required=True)
    p.add_argument("--uncoupled", action="store_true", help="fresh coordinates for every d")
    _common(sub.add_parser("oracle", help="closed-form quantities, no randomness"), sim=False)
    _common(sub.add_parser("stein-chen", help="AGG total-variation certificate"), sim=False)

    p = sub.add_parser("plotdata", help="two-column CSV series for plotting")
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--d-min", type=int, default=None)
    p.add_argument("--d-max", type=int, default=None)
    p.add_argument("--from", dest="source", default=None, help="simulate or sweep JSON output")
    p.add_argument("--out", required=True, help="directory receiving one CSV per series")
    return parser


def _config(args, mode: str) -> ex.ExperimentConfig:
    try:
        proj = ex.parse_proj_spec(args.proj).indices
        box = ex.parse_box_spec(args.box).bounds if args.box else None
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from None
    return ex.ExperimentConfig(
        mode=mode,
        n=args.n if args.poissonized else int(args.n),
        d=args.d,
        regime=args.regime,
        c=args.c,
        r_max=args.r_max,
        reps=getattr(args, "reps", 1),
        master_seed=getattr(args, "seed", 0),
        proj=proj,
        box=box,
        poissonized=args.poissonized,
        workers=getattr(args, "workers", 1),
        d_min=getattr(args, "d_min", None),
        d_max=getattr(args, "d_max", None),
        coupled=not getattr(args, "uncoupled", False),
        points_cap=getattr(args, "points_cap", 64),
        out=args.out,
        fmt=args.fmt,
    )


def _emit_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        ex.ensure_writable(out)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(writer_fn, *args) -> str:
    buf = io.StringIO(newline="")
    writer_fn(*args, buf)
    return buf.getvalue()


def _verdicts_pass(verdicts: dict) -> bool:
    return all(v["passed"] is not False for v in verdicts.values())


def cmd_simulate(args) -> int:
    summary = ex.run_simulation(_config(args, "simulate"))
    if args.fmt == "json":
        payload = summary.payload()
        payload["meta"] = summary.meta
        _emit_text(ex.dumps(payload) + "\n", args.out)
    else:
        _emit_text(_csv_text(ex.write_records_csv, summary), args.out)
    if args.check and not _verdicts_pass(summary.aggregates["verdicts"]):
        return EXIT_ASSERT
    return EXIT_OK


def cmd_sweep(args) -> int:
    result = ex.run_sweep(_config(args, "sweep"))
    if args.fmt == "json":
        payload = result.payload()
        payload["meta"] = result.meta
        _emit_text(ex.dumps(payload) + "\n", args.out)
    else:
        _emit_text(_csv_text(ex.write_rows_csv, result.rows), args.out)
    ok = result.violations == 0 and all(r["mean_within_3se"] is not False for r in result.rows)
    return EXIT_ASSERT if args.check and not ok else EXIT_OK


def _cmd_closed_form(args, runner) -> int:
    payload = runner(_config(args, "oracle"))
    if args.fmt == "json":
        _emit_text(ex.dumps(payload) + "\n", args.out)
    else:
        _emit_text(_csv_text(ex.write_key_value_csv, payload), args.out)
    return EXIT_OK


def _write_series(directory: str, name: str, xs, ys) -> None:
    with open(os.path.join(directory, f"{name}.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        for x, y in zip(xs, ys):
            w.writerow([repr(float(x)), repr(float(y))])


def cmd_plotdata(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if not os.access(args.out, os.W_OK):
        raise OSError(f"cannot write to {args.out}")
    wrote = False
    if args.n is not None and args.d_min is not None and args.d_max is not None:
        n = int(args.n)
        if not 1 <= args.d_min <= args.d_max:
            raise ConfigError("need 1 <= d_min <= d_max")
        ds = list(range(args.d_min, args.d_max + 1))
        _write_series(args.out, "oracle_nonpareto_vs_d", ds, [oracle.expected_nonpareto(n, d) for d in ds])
        _write_series(args.out, "oracle_mean_S_vs_d", ds, [oracle.expected_S(n, d) for d in ds])
        _write_series(args.out, "limit_mean_vs_d", ds,
                      [oracle.limit_nonpareto_mean(oracle.implied_offsets(n, d).c_star) for d in ds])
        if n >= 3:
            _write_series(args.out, "oracle_EK2_vs_d", ds, [oracle.expected_K_r(n, d, 2) for d in ds])
        wrote = True
    if args.source:
        with open(args.source, encoding="utf-8") as fh:
            data = json.load(fh)
        if "rows" in data:
            ds = [r["d"] for r in data["rows"]]
            _write_series(args.out, "sweep_empirical_mean", ds, [r["empirical_mean"] for r in data["rows"]])
            _write_series(args.out, "sweep_oracle_mean", ds, [r["oracle_mean"] for r in data["rows"]])
        else:
            agg = data["aggregates"]
            dist = {int(k): v for k, v in agg["nonpareto_distribution"].items()}
            total = sum(dist.values())
            ks = list(range(max(dist) + 1))
            _write_series(args.out, "empirical_nonpareto_pmf", ks, [dist.get(k, 0) / total for k in ks])
            mean = agg["oracle"]["exact_E_nonpareto"]
            if mean > 0:
                _write_series(args.out, "poisson_pmf_exact_mean", ks, [oracle.poisson_pmf(k, mean) for k in ks])
            atoms = np.array([a for rec in data["records"] for a in rec["atoms"]])
            if atoms.size:
                for j, k in enumerate(data["config"]["proj"]):
                    x = np.sort(atoms[:, j])
                    _write_series(args.out, f"atoms_ecdf_coord_{k}", x, np.arange(1, len(x) + 1) / len(x))
                grid = np.linspace(0.0, 1.0, 101)
                _write_series(args.out, "atoms_limit_cdf", grid, grid ** 2)
        wrote = True
    if not wrote:
        raise ConfigError("plotdata needs --n with --d-min/--d-max, or --from")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "oracle": lambda a: _cmd_closed_form(a, ex.run_oracle),
    "stein-chen": lambda a: _cmd_closed_form(a, ex.run_stein_chen),
    "plotdata": cmd_plotdata,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
