"""
Command-line launcher for the forking-paths engine.

    python launch_cli.py enumerate --config config/premium_study.json
    python launch_cli.py run --config config/premium_study.json --data goyal_welch.csv --out runs/premium
    python launch_cli.py analyze runs/premium average
    python launch_cli.py simulate --config config/simlab.json --out runs/simlab
"""

import os
import sys
import argparse

# Add project root to path for imports
project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

from debug.logger import setup_logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_STRICT = 3


def _env_int(name, default):
    value = os.environ.get(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise SystemExit(f"{name} must be an integer, got '{value}'")


class UsageParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 is reserved for data errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = UsageParser(description="Forking-paths engine for empirical finance")
    parser.add_argument("--debug", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    enum = sub.add_parser("enumerate", help="List the paths of a study config")
    enum.add_argument("--config", required=True)
    enum.add_argument("--data", nargs="*", default=None, help="key=path (or one bare path)")
    enum.add_argument("--out", default=None)

    run = sub.add_parser("run", help="Execute every feasible path of a study")
    run.add_argument("--config", required=True)
    run.add_argument("--data", nargs="+", required=True, help="key=path (or one bare path)")
    run.add_argument("--out", default=None)
    run.add_argument("--jobs", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--cache-dir", default=None)
    run.add_argument("--resume", action="store_true")
    run.add_argument("--strict", action="store_true", help="Exit with 3 when any path ends with status 'error'")

    analyze = sub.add_parser("analyze", help="Analyze the outcomes of a finished run")
    analyze.add_argument("outcomes")
    analyze.add_argument("analysis", choices=["average", "conditional", "intervals", "etc", "mtest", "phack"])
    analyze.add_argument("--out", default=None)
    analyze.add_argument("--weights", choices=["frequentist", "bayesian", "uniform"], default=None)
    analyze.add_argument("--sigma-convention", choices=["linear", "squared", "source", "paper"], default="linear")
    analyze.add_argument("--odds-reading", choices=["repaired", "inverse_n", "paper"], default="repaired")
    analyze.add_argument("--level", type=float, default=0.95)
    analyze.add_argument("--column", default="b")
    analyze.add_argument("--q", type=float, default=0.9)
    analyze.add_argument("--fit", choices=["empirical", "gaussian", "student"], default="gaussian")
    analyze.add_argument("--nu", type=float, default=3.0)
    analyze.add_argument("--bstar", type=float, default=None)
    analyze.add_argument("--benchmark", choices=["pointwise", "average"], default="pointwise")
    analyze.add_argument("--block-length", type=int, default=12)
    analyze.add_argument("--replicates", type=int, default=576)
    analyze.add_argument("--method", choices=["bootstrap", "paths", "both"], default="both")
    analyze.add_argument("--k-min", type=int, default=1)
    analyze.add_argument("--k-max", type=int, default=None)
    analyze.add_argument("--bins", type=int, default=10)
    analyze.add_argument("--alternative", choices=["two-sided", "greater"], default="two-sided")
    analyze.add_argument("--layer", default=None)
    analyze.add_argument("--option-a", default=None)
    analyze.add_argument("--option-b", default=None)
    analyze.add_argument("--by", default=None, help="Layer to analyze per option, or 'none'")
    analyze.add_argument("--strict-pairs", action="store_true", help="Fail on paths whose twin did not finish ok")
    analyze.add_argument("--seed", type=int, default=None)
    analyze.add_argument("--jobs", type=int, default=None)

    simulate = sub.add_parser("simulate", help="Run the simulation lab sweeps")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--out", default=None)
    simulate.add_argument("--seed", type=int, default=None)
    simulate.add_argument("--jobs", type=int, default=None)

    schema = sub.add_parser("schema", help="Write the JSON Schema of study configs")
    schema.add_argument("--out", default=os.path.join(project_root, "config", "study_schema.json"))
    return parser


def dispatch(args, logger):
    from cli.commands import AnalyzeOptions, cmd_analyze, cmd_enumerate, cmd_run, cmd_simulate
    from pathgrid.study_config import load_study_config
    from studies.study_manager import parse_data_arguments

    # Flags win over environment variables
    jobs = args.jobs if getattr(args, "jobs", None) is not None else _env_int("FORKPATHS_JOBS", 1)
    seed = args.seed if getattr(args, "seed", None) is not None else _env_int("FORKPATHS_SEED", None)
    out = getattr(args, "out", None) or os.environ.get("FORKPATHS_OUT")
    logger.info(f"Command {args.command}: jobs={jobs}, seed={seed}, out={out}")

    if args.command == "enumerate":
        data = None
        if args.data:
            data = parse_data_arguments(args.data, load_study_config(args.config).kind)
        table, counts = cmd_enumerate(args.config, data, out)
        print(f"{counts['study_id']}: {counts['n_nominal']} nominal paths, {counts['n_feasible']} feasible")
        return EXIT_OK

    if args.command == "run":
        if not out:
            raise SystemExit("run needs --out or FORKPATHS_OUT")
        data = parse_data_arguments(args.data, load_study_config(args.config).kind)
        manifest = cmd_run(args.config, data, out, jobs=jobs, seed=seed or 0, resume=args.resume,
                           strict=args.strict, cache_dir=args.cache_dir, debug_mode=args.debug)
        print(f"{manifest.study_id}: {manifest.n_feasible} paths, {manifest.status_tally}")
        return EXIT_OK

    if args.command == "analyze":
        options = AnalyzeOptions(
            weights=args.weights, sigma_convention=args.sigma_convention, odds_reading=args.odds_reading,
            level=args.level, column=args.column, q=args.q, fit=args.fit, nu=args.nu, bstar=args.bstar,
            benchmark=args.benchmark, block_length=args.block_length, replicates=args.replicates,
            method=args.method, k_min=args.k_min, k_max=args.k_max, bins=args.bins,
            alternative=args.alternative, layer=args.layer, option_a=args.option_a, option_b=args.option_b,
            by=args.by, drop_unpaired=not args.strict_pairs, seed=seed or 0, n_jobs=jobs,
        )
        written = cmd_analyze(args.outcomes, args.analysis, out, options)
        for name, path in written.items():
            print(f"{name}: {path}")
        return EXIT_OK

    if args.command == "schema":
        from pathgrid.study_config import study_config_schema
        from utils.fileio import atomic_write_json

        atomic_write_json(args.out, study_config_schema())
        print(f"schema: {args.out}")
        return EXIT_OK

    if not out:
        raise SystemExit("simulate needs --out or FORKPATHS_OUT")
    written = cmd_simulate(args.config, out, seed=seed, jobs=jobs)
    for name, path in written.items():
        print(f"{name}: {path}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logger = setup_logger("cli_launcher", debug_mode=args.debug)

    from utils.errors import (
        ExecutionError,
        ForkingPathsError,
        IngestionError,
        SchemaError,
        SpecValidationError,
    )

    try:
        return dispatch(args, logger)
    except (IngestionError, SchemaError) as e:
        logger.error(f"Data error: {str(e)}")
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_DATA
    except ExecutionError as e:
        logger.error(f"Strict run failed: {str(e)}")
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_STRICT
    except (SpecValidationError, ForkingPathsError) as e:
        logger.error(f"Invalid input: {str(e)}")
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {str(e)}", exc_info=True)
        print(f"Error: {str(e)}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
