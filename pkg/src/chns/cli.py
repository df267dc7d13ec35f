"""Command-line entry point: simulate, verify, experiment, plot.

All outputs land under the configured output directory.  CSV rows are
written line-buffered so an interrupted run still leaves a parseable file;
reruns with the same seed reproduce the same bytes.
"""

import argparse
import csv
import os
import struct
import sys

import numpy as np

from .checks import format_table, run_verify
from .config import parse_config
from .diagnostics import CSV_COLUMNS
from .errors import ChnsError
from .experiments import parse_plan, run_experiment
from .svg import write_chart

MAGIC = b"CHNS1"


def _load_config(path):
    if path is None:
        return parse_config("")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _dump_state(path, state):
    """Flat binary dump: magic, u32 dim, u32 n, then phi, velocity
    components and pressure as little-endian float64, row-major.  Velocity
    component c carries n+1 samples along axis c."""
    grid = state.phi.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", grid.dim, grid.n))
        fh.write(np.ascontiguousarray(state.phi.data, dtype="<f8").tobytes())
        for comp in state.u.components:
            fh.write(np.ascontiguousarray(comp, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.pi.data, dtype="<f8").tobytes())


def load_state_dump(path):
    """Inverse of the simulate dump; returns (dim, n, [arrays])."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != MAGIC:
            raise ChnsError(f"bad magic {magic!r} in {path}")
        dim, n = struct.unpack("<II", fh.read(8))
        arrays = []
        shapes = [(n,) * dim]
        for c in range(dim):
            s = [n] * dim
            s[c] += 1
            shapes.append(tuple(s))
        shapes.append((n,) * dim)
        for shape in shapes:
            count = int(np.prod(shape))
            buf = fh.read(8 * count)
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(shape))
        return dim, n, arrays


def cmd_simulate(args):
    cfg = _load_config(args.config)
    if args.out:
        cfg = cfg.with_updates(output__dir=args.out)
    out_dir = cfg["output.dir"]
    os.makedirs(out_dir, exist_ok=True)
    from .config import build_simulation

    sim = build_simulation(cfg)
    every = cfg["output.every_k_steps"]
    n_steps = int(round(cfg["time.t_final"] / cfg["time.dt"]))
    csv_path = os.path.join(out_dir, "diagnostics.csv")
    status = 0
    with open(csv_path, "w", encoding="utf-8", buffering=1, newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        fh.write(sim.ledger.records[0].to_csv_row() + "\n")
        try:
            for k in range(1, n_steps + 1):
                record = sim.step()
                if k % every == 0 or k == n_steps:
                    fh.write(record.to_csv_row() + "\n")
        except ChnsError as exc:
            print(f"simulate: step failed: {exc}", file=sys.stderr)
            status = 1
    _dump_state(os.path.join(out_dir, "final_state.chns"), sim.state)
    return status


def cmd_verify(args):
    cfg = _load_config(args.config)
    if args.out:
        cfg = cfg.with_updates(output__dir=args.out)
    results = run_verify(cfg)
    print(format_table(results))
    return 0 if all(r.passed for r in results) else 1


def cmd_experiment(args):
    with open(args.plan, "r", encoding="utf-8") as fh:
        plan = parse_plan(fh.read())
    out_dir = args.out or plan.out_dir
    report = run_experiment(plan)
    paths = report.write(out_dir)
    for path in paths:
        print(path)
    return 0


def cmd_plot(args):
    with open(args.csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            print(f"plot: {args.csv} is empty", file=sys.stderr)
            return 1
        rows = [row for row in reader if row]
    if not rows:
        print(f"plot: {args.csv} has no data rows", file=sys.stderr)
        return 1
    columns = [c.strip() for c in args.columns.split(",") if c.strip()]
    if not columns:
        print("plot: no columns requested", file=sys.stderr)
        return 1
    missing = [c for c in columns if c not in header]
    if missing:
        print(f"plot: columns not in CSV: {missing}", file=sys.stderr)
        return 1
    if "t" not in header:
        print("plot: CSV lacks a 't' column", file=sys.stderr)
        return 1
    idx = {name: header.index(name) for name in header}
    t = [float(row[idx["t"]]) for row in rows]
    out_dir = args.out or os.path.dirname(os.path.abspath(args.csv))
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.csv))[0]
    for col in columns:
        ys = [float(row[idx[col]]) for row in rows]
        path = os.path.join(out_dir, f"{stem}_{col}.svg")
        write_chart(path, f"{col} vs t", "t", col, [(t, ys, col)])
        print(path)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="chns",
        description="Coupled Cahn-Hilliard / damped Navier-Stokes desk simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one simulation to t_final")
    p_sim.add_argument("--config", help="path to a key = value config file")
    p_sim.add_argument("--out", help="override output.dir")
    p_sim.set_defaults(func=cmd_simulate)

    p_ver = sub.add_parser("verify", help="run the property suite")
    p_ver.add_argument("--config", help="path to a key = value config file")
    p_ver.add_argument("--out", help="override output.dir")
    p_ver.set_defaults(func=cmd_verify)

    p_exp = sub.add_parser("experiment", help="run a scripted study from a plan file")
    p_exp.add_argument("--plan", required=True, help="path to the plan file")
    p_exp.add_argument("--out", help="override output.dir")
    p_exp.set_defaults(func=cmd_experiment)

    p_plot = sub.add_parser("plot", help="render diagnostics columns as SVG charts")
    p_plot.add_argument("--csv", required=True, help="diagnostics CSV path")
    p_plot.add_argument("--columns", required=True, help="comma-separated column names")
    p_plot.add_argument("--out", help="output directory (default: CSV directory)")
    p_plot.set_defaults(func=cmd_plot)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChnsError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
