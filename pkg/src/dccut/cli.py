"""Command-line driver: solve one instance, or sweep (algo, nlap) cells
into benchmark CSV rows.

Exit codes for `solve`: 0 optimal/eps-optimal, 2 infeasible,
3 limit-reached, 1 usage or IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from dccut.instance import InstanceFormatError, MblpInstance, parse_instance
from dccut.mps import MpsFormatError, parse_mps
from dccut.solver import ALGOS, SolveReport, SolverConfig, dccut_solve

REPORT_SCHEMA = 1
SWEEP_HEADER = ["nlap", "algo", "clgap", "gap", "ub", "time_s"]
_EXIT_BY_STATUS = {"optimal": 0, "eps-optimal": 0, "infeasible": 2, "limit-reached": 3}


@dataclass(frozen=True)
class RunRecord:
    instance: str
    config: SolverConfig
    report: SolveReport


def load_instance(path: str) -> MblpInstance:
    p = Path(path)
    text = p.read_text()
    if p.suffix.lower() == ".mps":
        return parse_mps(text, name=p.stem)
    return parse_instance(text, name=p.stem)


def _num(v: float | None):
    if v is None:
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def record_as_dict(rec: RunRecord) -> dict:
    rep = rec.report
    cfg = asdict(rec.config)
    return {
        "schema": REPORT_SCHEMA,
        "instance": rec.instance,
        "config": cfg,
        "status": rep.status,
        "ub": _num(rep.ub),
        "lb": _num(rep.lb),
        "gap": _num(rep.gap),
        "clgap": _num(rep.clgap),
        "iterations": rep.iterations,
        "cut_dc1": rep.cut_dc1,
        "cut_dc2": rep.cut_dc2,
        "cut_lap": rep.cut_lap,
        "wall_time": rep.wall_time,
        "u_opt": None
        if rep.u_opt is None
        else {"x": [float(v) for v in rep.u_opt.x], "y": [float(v) for v in rep.u_opt.y]},
        "trace": [
            {"k": row.k, "lb": _num(row.lb), "ub": _num(row.ub), "cuts_added": row.cuts_added}
            for row in rep.trace
        ],
    }


def format_report(rec: RunRecord, fmt: str) -> str:
    data = record_as_dict(rec)
    if fmt == "json":
        return json.dumps(data, indent=2) + "\n"
    if fmt == "csv":
        flat = {k: data[k] for k in
                ("instance", "status", "ub", "lb", "gap", "clgap", "iterations",
                 "cut_dc1", "cut_dc2", "cut_lap", "wall_time")}
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(flat))
        writer.writeheader()
        writer.writerow(flat)
        return buf.getvalue()
    lines = [f"schema: {REPORT_SCHEMA}", f"instance: {data['instance']}"]
    lines += [f"{key}: {data[key]}" for key in
              ("status", "ub", "lb", "gap", "clgap", "iterations",
               "cut_dc1", "cut_dc2", "cut_lap", "wall_time")]
    if data["u_opt"] is not None:
        lines.append(f"u_opt.x: {data['u_opt']['x']}")
        lines.append(f"u_opt.y: {data['u_opt']['y']}")
    lines.append("trace: k lb ub cuts_added")
    for row in data["trace"]:
        lines.append(f"  {row['k']} {row['lb']} {row['ub']} {row['cuts_added']}")
    return "\n".join(lines) + "\n"


def _add_config_flags(sp: argparse.ArgumentParser):
    sp.add_argument("--algo", choices=ALGOS, default="dccut")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--nlap", type=int, default=1)
    sp.add_argument("--t", type=float, default=500.0)
    sp.add_argument("--eps", type=float, default=0.01)
    sp.add_argument("--time-limit", type=float, default=None)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--fbest", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dccut", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("instance")
    _add_config_flags(solve)
    solve.add_argument("--format", choices=("text", "json", "csv"), default="text")
    solve.add_argument("--output", default=None, help="write the report here instead of stdout")

    sweep = sub.add_parser("sweep", help="run (algo, nlap) cells and emit CSV")
    sweep.add_argument("instance")
    sweep.add_argument("--algos", default="dccut", help="comma-separated algorithm list")
    sweep.add_argument("--nlap-values", default="1", help="comma-separated nlap list")
    sweep.add_argument("--cell-time-limit", type=float, default=30.0)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--t", type=float, default=500.0)
    sweep.add_argument("--eps", type=float, default=0.01)
    sweep.add_argument("--seed", type=int, default=0)
    sweep.add_argument("--fbest", type=float, default=None)
    sweep.add_argument("--output", default=None)
    return parser


def run(args: argparse.Namespace) -> int:
    try:
        inst = load_instance(args.instance)
    except (OSError, InstanceFormatError, MpsFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    cfg = SolverConfig(
        algo=args.algo, t=args.t, eps=args.eps, nlap=args.nlap, workers=args.workers,
        time_limit=args.time_limit, seed=args.seed, fbest=args.fbest,
    )
    report = dccut_solve(inst, cfg)
    text = format_report(RunRecord(inst.name, cfg, report), args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return _EXIT_BY_STATUS[report.status]


def _csv_cell(v) -> str:
    if v is None:
        return "na"
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return str(v)


def sweep(args: argparse.Namespace) -> int:
    try:
        inst = load_instance(args.instance)
        algos = [a.strip() for a in args.algos.split(",") if a.strip()]
        nlaps = [int(v) for v in args.nlap_values.split(",") if v.strip()]
        for a in algos:
            if a not in ALGOS:
                raise ValueError(f"unknown algorithm {a!r}")
    except (OSError, InstanceFormatError, MpsFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    rows = []
    for nlap in nlaps:
        for algo in algos:
            cfg = SolverConfig(
                algo=algo, t=args.t, eps=args.eps, nlap=nlap, workers=args.workers,
                time_limit=args.cell_time_limit, seed=args.seed, fbest=args.fbest,
            )
            try:
                rep = dccut_solve(inst, cfg)
                rows.append([nlap, algo, _csv_cell(rep.clgap), _csv_cell(rep.gap),
                             _csv_cell(None if math.isinf(rep.ub) else rep.ub),
                             f"{rep.wall_time:.3f}"])
            except Exception as exc:  # cell failure must not kill the sweep
                print(f"cell (nlap={nlap}, algo={algo}) failed: {exc}", file=sys.stderr)
                rows.append([nlap, algo, "na", "na", "na", "na"])

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SWEEP_HEADER)
    writer.writerows(rows)
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses code 2 for usage errors
        return 1 if exc.code else 0
    if args.command == "solve":
        return run(args)
    return sweep(args)


if __name__ == "__main__":
    sys.exit(main())
