"""Command line entry point: ``normtop run`` and ``normtop compare``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .objectives import ObjectiveKind
from .problems import PRESETS
from .runner import RunConfig, RunStatus, compare, exit_code, load_config, run

_FLAG_TO_FIELD = {
    "problem": "problem", "objective": "objective", "nelx": "nelx", "nely": "nely",
    "volfrac": "volfrac", "penal": "penal", "rmin": "rmin", "move": "move", "eta": "eta",
    "epsilon": "epsilon", "threshold": "threshold", "max_iters": "max_iterations",
    "out": "out", "snapshot_every": "snapshot_every", "seed": "seed",
}


def _add_common(p: argparse.ArgumentParser, with_objective: bool):
    p.add_argument("--config", type=Path, help="key = value file; flags override it")
    p.add_argument("--problem", choices=sorted(PRESETS))
    if with_objective:
        p.add_argument("--objective", choices=[k.value for k in ObjectiveKind])
    p.add_argument("--nelx", type=int)
    p.add_argument("--nely", type=int)
    p.add_argument("--volfrac", type=float)
    p.add_argument("--penal", type=float)
    p.add_argument("--rmin", type=float)
    p.add_argument("--move", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--epsilon", type=float, help="absolute eigenvalue truncation threshold")
    p.add_argument("--threshold", type=float, help="stop when change <= threshold")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--snapshot-every", type=int, help="write density every J iterations")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-timing", action="store_true", help="write ms = 0 in log.csv")
    p.add_argument("-q", "--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normtop", description="Compliance topology optimization with norm-based objectives.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="optimize one problem with one objective"), True)
    _add_common(sub.add_parser("compare", help="run all three objectives and tabulate"), False)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for flag, name in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[name] = value
    if args.no_timing:
        values["timing"] = False
    return RunConfig(**values)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s")
    try:
        config = config_from_args(args)
        if args.command == "run":
            result = run(config)
        else:
            rows = compare(config)
    except (ValueError, TypeError, OSError) as exc:
        print(f"normtop: {exc}", file=sys.stderr)
        return 1

    if args.command == "run":
        msg = (f"{config.objective.value} on {result.problem.name}: {result.status.value} after "
               f"{len(result.history)} iterations")
        if result.error:
            msg += f" ({result.error})"
        print(msg)
        return exit_code(result.status)

    cols = list(rows[0])
    print(",".join(cols))
    for row in rows:
        print(",".join(f"{row[c]:.6g}" if isinstance(row[c], float) else str(row[c])
                       for c in cols))
    statuses = {RunStatus(r["status"]) for r in rows}
    for status in (RunStatus.ERROR, RunStatus.MAX_ITERATIONS):
        if status in statuses:
            return exit_code(status)
    return 0


if __name__ == "__main__":
    sys.exit(main())
