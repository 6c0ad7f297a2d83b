"""Command line entry point: ``qaoa-workbench gen|run|summarize|curves``.

Any long flag can also come from a flat ``key = value`` file given with
``--config``; flags on the command line win. Keys use the flag names with or
without dashes (``epsilon-ag`` and ``epsilon_ag`` both work), ``#`` starts a
comment, and ``method`` may list several methods separated by commas.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiment import (
    ExperimentConfig,
    emit_cost_curves,
    make_instances,
    read_runs,
    run_experiment,
    summarize,
    summarize_instances,
    write_instances,
    write_summary_csv,
    SUMMARY_COLUMNS,
)
from .shots import PrecisionConfig

METHOD_NAMES = ("nm", "fd", "ag")


def parse_depths(text: str) -> tuple[int, ...]:
    """``"5"``, ``"1,3,7"`` or ``"1..8"`` (inclusive)."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"bad depth list {text!r}")
    return tuple(out)


def parse_method(text: str, epsilon: float, delta: float, epsilon_ag: float) -> PrecisionConfig:
    """``name[:epsilon[:x]]`` where ``x`` is delta for fd and epsilon_ag for ag."""
    parts = text.strip().lower().split(":")
    name = parts[0]
    if name not in METHOD_NAMES or len(parts) > 3:
        raise argparse.ArgumentTypeError(f"bad method {text!r}; expected nm|fd|ag[:eps[:delta or eps_ag]]")
    if len(parts) > 1:
        epsilon = float(parts[1])
    if len(parts) > 2:
        if name == "fd":
            delta = float(parts[2])
        elif name == "ag":
            epsilon_ag = float(parts[2])
        else:
            raise argparse.ArgumentTypeError("nm takes only an epsilon")
    return PrecisionConfig(epsilon, delta, epsilon_ag, name)


def read_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _truthy(value) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file with defaults for any flag")
    common.add_argument("--out", default="results", help="output directory (default: results)")
    common.add_argument("-v", "--verbose", action="store_true")

    gen_opts = argparse.ArgumentParser(add_help=False)
    gen_opts.add_argument("--nodes", type=int, default=16)
    gen_opts.add_argument("--instances", type=int, default=128)
    gen_opts.add_argument("--seed", type=int, default=0, help="master seed")

    parser = argparse.ArgumentParser(prog="qaoa-workbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen", parents=[common, gen_opts], help="generate random 3-regular instances")

    run = sub.add_parser("run", parents=[common, gen_opts], help="run the optimization experiment")
    run.add_argument("--depths", type=parse_depths, default=(7,), help="e.g. 5, 1,3,7 or 1..8")
    run.add_argument("--runs", type=int, default=16, help="optimization runs per instance")
    run.add_argument("--method", action="append", default=None,
                     help="nm|fd|ag[:eps[:delta or eps_ag]]; repeat or comma-separate (default: all three)")
    run.add_argument("--epsilon", type=float, default=0.01)
    run.add_argument("--delta", type=float, default=0.1)
    run.add_argument("--epsilon-ag", type=float, default=0.1)
    run.add_argument("--exact", action="store_true", help="no sampling noise, zero cost")
    run.add_argument("--workers", type=int, default=1)

    sub.add_parser("summarize", parents=[common], help="recompute summary.csv from runs.jsonl")
    sub.add_parser("curves", parents=[common], help="write cost curves from runs.jsonl")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        file_values = read_config_file(args.config)
        # re-parse with the file as defaults so explicit flags still win
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(file_values) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        defaults = {}
        for key, value in file_values.items():
            action = next(a for a in sub._actions if a.dest == key)
            if key == "method":
                defaults[key] = [m.strip() for m in value.split(",") if m.strip()]
            elif key == "exact" or key == "verbose":
                defaults[key] = _truthy(value)
            elif action.type is not None:
                defaults[key] = action.type(value)
            else:
                defaults[key] = value
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _methods(args) -> tuple[PrecisionConfig, ...]:
    specs = []
    for item in args.method or list(METHOD_NAMES):
        specs.extend(s for s in item.split(",") if s.strip())
    return tuple(parse_method(s, args.epsilon, args.delta, args.epsilon_ag) for s in specs)


def _print_table(rows) -> None:
    print("\t".join(SUMMARY_COLUMNS))
    for row in rows:
        print("\t".join(f"{row[c]:.6g}" if isinstance(row[c], float) else str(row[c]) for c in SUMMARY_COLUMNS))


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        out = Path(args.out)

        if args.command == "gen":
            instances = make_instances(args.nodes, args.instances, args.seed)
            write_instances(instances, out)
            print(f"wrote {len(instances)} instances to {out / 'instances'}")

        elif args.command == "run":
            config = ExperimentConfig(
                num_nodes=args.nodes, depths=args.depths, num_instances=args.instances,
                runs_per_instance=args.runs, methods=_methods(args), master_seed=args.seed,
                output_dir=str(out), exact=args.exact, workers=args.workers,
            )
            result = run_experiment(config)
            _print_table(result.table)
            if result.errors:
                print(f"{len(result.errors)} runs failed; see {out / 'errors.jsonl'}", file=sys.stderr)
                return 1

        else:
            records = read_runs(out / "runs.jsonl")
            if args.command == "summarize":
                rows = summarize(summarize_instances(records))
                write_summary_csv(rows, out / "summary.csv")
                _print_table(rows)
            else:
                curves = emit_cost_curves(records, out)
                print(f"wrote {len(curves)} curves to {out / 'curves'}")
    except (ValueError, FileNotFoundError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
