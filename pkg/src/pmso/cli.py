"""Command-line entry point: ``pmso benchmark | solar | suite``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .harness import (
    FUNCTION_IDS,
    ConfigError,
    ExperimentSpec,
    apply_overrides,
    load_config,
    run_experiment,
    summarize,
    write_summary_csv,
)

logger = logging.getLogger("pmso")

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--runs", type=int, help="number of seeded runs (default 30)")
    parser.add_argument("--seed", type=int, help="base seed; run i uses seed + i (default 0)")
    parser.add_argument("--config", type=Path, help="key = value config file; flags override it")
    parser.add_argument("--out-dir", dest="out_dir", help="directory for CSV output (default ./results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmso", description="PMSO swarm optimizer experiments; all output is CSV.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every run")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("benchmark", help="multi-seed campaign on one test function")
    bench.add_argument("--function", help=f"function id, one of {', '.join(FUNCTION_IDS)}")
    bench.add_argument("--dim", type=int, help="search dimension (>= 2)")
    _common(bench)

    solar = sub.add_parser("solar", help="reconfigure a partially shaded PV array")
    solar.add_argument("--irradiance", help="irradiance matrix file (default: shipped 9x9 shadow)")
    solar.add_argument("--arrangement", help="arrangement file scored as an extra baseline")
    _common(solar)

    suite = sub.add_parser("suite", help="summary table over the whole test suite")
    suite.add_argument("--dim", type=int, help="search dimension (default 2)")
    suite.add_argument("--functions", nargs="+", metavar="ID", help="subset of function ids (default: all)")
    _common(suite)
    return parser


def _base_spec(args, mode: str) -> ExperimentSpec:
    spec = load_config(args.config) if args.config is not None else ExperimentSpec(mode=mode)
    if spec.mode != mode:
        raise ConfigError(f"{args.config}: mode is {spec.mode!r} but the {args.command} command needs {mode!r}")
    return apply_overrides(spec, runs=args.runs, seed=args.seed, out_dir=args.out_dir)


def _print_summary(stats) -> None:
    print("function,dim,best,mean,std")
    for s in stats:
        print(f"{s.function},{s.dim},{s.best:.6e},{s.mean:.6e},{s.std:.6e}")


def cmd_benchmark(args) -> None:
    spec = apply_overrides(_base_spec(args, "benchmark"), function=args.function, dim=args.dim)
    records = run_experiment(spec)
    _print_summary([summarize(records)])


def cmd_solar(args) -> None:
    spec = apply_overrides(_base_spec(args, "solar"), irradiance=args.irradiance, arrangement=args.arrangement)
    records = run_experiment(spec)
    for r in records:
        print(f"run {r.index} seed {r.seed}: {r.best_fitness:.2f} W")
    print(f"CSV written to {spec.out_dir}")


def cmd_suite(args) -> None:
    base = apply_overrides(_base_spec(args, "benchmark"), dim=args.dim)
    functions = args.functions or list(FUNCTION_IDS)
    unknown = [f for f in functions if f not in FUNCTION_IDS]
    if unknown:
        raise ConfigError(f"functions: unknown ids {unknown}")
    stats = []
    for function in functions:
        records = run_experiment(apply_overrides(base, function=function))
        stats.append(summarize(records))
    write_summary_csv(stats, Path(base.out_dir) / f"suite_D{base.dim}_summary.csv")
    _print_summary(stats)


COMMANDS = {"benchmark": cmd_benchmark, "solar": cmd_solar, "suite": cmd_suite}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"pmso: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"pmso: error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
