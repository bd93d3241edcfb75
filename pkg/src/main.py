#!/usr/bin/env python3
"""
fraclap command-line interface
Evaluate the fractional Laplacian by its equivalent definitions, compare
them, audit kernel identities and run Monte Carlo validations.
"""

import argparse
import os
import sys
from pathlib import Path
from typing import List, Optional

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli.commands import (
    EXIT_NON_CONVERGENCE,
    EXIT_USAGE,
    MC_ACTIONS,
    CommandResult,
    cmd_audit,
    cmd_bank_list,
    cmd_compare,
    cmd_eval,
    cmd_kernels_dump,
    cmd_mc,
    cmd_probe_conjecture,
    cmd_reports,
)
from src.cli.formatters import render
from src.cli.run_config import RunConfig
from src.reports.report_store import DEFAULT_REPORT_DIR, ReportStore
from src.utils.config_loader import DEFAULT_CONFIG_PATH, ConfigLoader
from src.utils.errors import (
    AliasingError,
    BudgetError,
    FraclapError,
    NonConvergenceError,
    QuadratureError,
)
from src.utils.logger import get_logger, setup_logger
from src.utils.parallel import THREADS_ENV_VAR, default_threads
from src.utils.validators import OUTPUT_FORMATS, parse_point

COMMANDS = {
    "eval": cmd_eval,
    "compare": cmd_compare,
    "audit": cmd_audit,
    "mc": cmd_mc,
    "probe-conjecture": cmd_probe_conjecture,
    "bank": cmd_bank_list,
    "kernels": cmd_kernels_dump,
    "reports": cmd_reports,
}

NUMERICAL_ERRORS = (NonConvergenceError, QuadratureError, BudgetError, AliasingError)


class FraclapArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors exit with code 1 (2 is reserved for non-convergence)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_parser() -> argparse.ArgumentParser:
    """Flags shared by the subcommands; every default is None so bundles can fill them."""
    common = FraclapArgumentParser(add_help=False)
    common.add_argument('--d', type=int, help='Dimension (1, 2 or 3)')
    common.add_argument('--alpha', type=float, help='Stability index in (0, 2)')
    common.add_argument('--fn', type=str, help='Test function name (see "bank list")')
    common.add_argument('--x', action='append', metavar='POINT',
                        help='Evaluation point, comma-separated (repeatable)')
    common.add_argument('--def', dest='definitions', action='append', metavar='TAG',
                        help='Definition tag F, B, BB, I, Ibar, Itilde, D, S, H, R (repeatable)')
    common.add_argument('--out', choices=OUTPUT_FORMATS, help='Output format (default json)')
    common.add_argument('--output', type=str, metavar='FILE', help='Write output to FILE instead of stdout')
    common.add_argument('--threads', type=int, help=f'Worker threads (default ${THREADS_ENV_VAR} or config)')
    common.add_argument('--seed', type=int, help='Monte Carlo seed')
    common.add_argument('--run-config', type=str, metavar='FILE', help='key=value run-config bundle')
    common.add_argument('--abs-tol', type=float, help='Absolute convergence tolerance')
    common.add_argument('--rel-tol', type=float, help='Relative convergence tolerance')
    common.add_argument('--agreement-tol', type=float, help='Agreement tolerance added to error estimates')
    common.add_argument('--r0', type=float, help='First radius of the I/D ladder')
    common.add_argument('--singular-steps', type=int, help='Halvings of the I/D ladder')
    common.add_argument('--t0', type=float, help='First time of the S ladder')
    common.add_argument('--semigroup-steps', type=int, help='Quarterings of the S ladder')
    common.add_argument('--y0', type=float, help='First height of the H ladder')
    common.add_argument('--harmonic-steps', type=int, help='Quarterings of the H ladder')
    return common


def build_parser() -> FraclapArgumentParser:
    """Argument parser with one subparser per subcommand."""
    parser = FraclapArgumentParser(
        prog='fraclap',
        description='Fractional Laplacian: definitions, agreement, identities and Monte Carlo checks',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='Exit codes: 0 success, 1 usage, 2 numerical non-convergence, 3 check failure'
    )

    parser.add_argument(
        '--config',
        type=str,
        default=DEFAULT_CONFIG_PATH,
        help='Path to configuration file'
    )

    parser.add_argument(
        '--log-level',
        type=str,
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
        help='Override the configured log level'
    )

    parser.add_argument(
        '--no-save',
        action='store_true',
        help='Do not persist the run report'
    )

    common = _common_parser()
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')

    subparsers.add_parser('eval', parents=[common], help='Evaluate L f(x) by the chosen definitions')
    subparsers.add_parser('compare', parents=[common], help='Agreement matrix over definitions')

    audit = subparsers.add_parser('audit', parents=[common], help='Kernel and ball identity audit')
    audit.add_argument('--grid', action='append', metavar='KEY=VALUE',
                       help='Audit grid override, e.g. r=2 or heat_rho=40 (repeatable)')

    mc = subparsers.add_parser('mc', parents=[common], help='Monte Carlo validations')
    mc.add_argument('action', choices=MC_ACTIONS)
    mc.add_argument('--r', type=float, help='Ball radius')
    mc.add_argument('--n', dest='n_paths', type=int, help='Number of paths')
    mc.add_argument('--mode', choices=['exact', 'path'], help='Exit sampling mode')
    mc.add_argument('--dt', type=float, help='Time step of path mode')
    mc.add_argument('--max-steps', type=int, help='Step budget per path')
    mc.add_argument('--lambda', dest='lam', type=float, help='Discount rate of the Dynkin check')
    mc.add_argument('--start', type=parse_point, help='Start point of "mc exit" (default centre)')
    mc.add_argument('--dump', type=str, metavar='FILE', help='Write exit samples (CSV) and summary (JSON)')

    probe = subparsers.add_parser('probe-conjecture', parents=[common],
                                  help='Probe complete monotonicity of sqrt(r) K_{alpha/2}(r^{1/alpha})')
    probe.add_argument('--orders', type=int, default=6, help='Highest derivative order (1..8)')
    probe.add_argument('--grid', type=int, default=121, help='Number of log-spaced radii')
    probe.add_argument('--r-min', type=float, default=1e-3)
    probe.add_argument('--r-max', type=float, default=1e3)

    bank = subparsers.add_parser('bank', parents=[common], help='Test-function bank')
    bank.add_argument('action', choices=['list'])
    bank.add_argument('--validate', action='store_true', help='Self-check gradients and Fourier profiles')

    kernels = subparsers.add_parser('kernels', parents=[common], help='Kernel tables')
    kernels.add_argument('action', choices=['dump'])
    kernels.add_argument('--rho-max', type=float, help='End of the tabulated grid')
    kernels.add_argument('--every', type=int, default=1, help='Keep every k-th grid node')

    reports = subparsers.add_parser('reports', parents=[common], help='List persisted run reports')
    reports.add_argument('--limit', type=int, default=20)
    reports.add_argument('--show', type=str, metavar='RUN_ID', help='Print one stored report')

    return parser


def run_config_from_args(args: argparse.Namespace) -> RunConfig:
    """Bundle file (if any) with the command-line flags on top."""
    flags = {
        "d": args.d,
        "alpha": args.alpha,
        "fn": args.fn,
        "points": "; ".join(args.x) if args.x else None,
        "definitions": ",".join(args.definitions) if args.definitions else None,
        "out": args.out,
        "threads": args.threads,
        "seed": args.seed,
        "abs_tol": args.abs_tol,
        "rel_tol": args.rel_tol,
        "agreement_tol": args.agreement_tol,
        "r0": args.r0,
        "singular_steps": args.singular_steps,
        "t0": args.t0,
        "semigroup_steps": args.semigroup_steps,
        "y0": args.y0,
        "harmonic_steps": args.harmonic_steps,
    }
    for key in ("r", "n_paths", "mode", "dt", "max_steps", "lam"):
        flags[key] = getattr(args, key, None)

    base = RunConfig.from_file(args.run_config) if args.run_config else RunConfig()
    return base.merged(RunConfig.from_mapping(flags))


def resolve_threads(run: RunConfig, config: ConfigLoader) -> RunConfig:
    """--threads, then FRACLAP_THREADS, then parallel.threads from the config."""
    if run.threads is not None:
        return run
    if os.environ.get(THREADS_ENV_VAR):
        threads = default_threads()
    else:
        threads = default_threads(config.get("parallel.threads") or 1)
    return run.merged(RunConfig(threads=threads))


def emit(result: CommandResult, fmt: str, output: Optional[str] = None) -> None:
    """Print or write the rendered report."""
    text = render(result.report, fmt, csv_rows=result.csv_rows, csv_blocks=result.csv_blocks, title=result.title)
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding='utf-8')
        get_logger().info(f"Output written to {path}")
    else:
        sys.stdout.write(text)


def save_report(result: CommandResult, config: ConfigLoader) -> Optional[str]:
    """Persist the report unless disabled."""
    if not result.save or not config.get("reports.enabled", True):
        return None
    store = ReportStore(config.get("reports.report_dir", DEFAULT_REPORT_DIR))
    return store.save(result.subcommand, result.status, result.report, exit_code=result.exit_code)


def execute(args: argparse.Namespace, config: ConfigLoader) -> int:
    """
    Run the selected subcommand.

    Returns:
        Process exit code
    """
    logger = get_logger()
    try:
        run = resolve_threads(run_config_from_args(args), config)
        result = COMMANDS[args.command](run, args, config)
        emit(result, run.out or config.get("output.format", "json"), args.output)
        if not args.no_save:
            save_report(result, config)
        return result.exit_code

    except NUMERICAL_ERRORS as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NON_CONVERGENCE

    except FraclapError as e:
        logger.error(str(e))
        return EXIT_USAGE

    except FileNotFoundError as e:
        logger.error(str(e))
        return EXIT_USAGE

    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user", file=sys.stderr)
        return EXIT_USAGE

    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        return EXIT_USAGE


def main(argv: Optional[List[str]] = None):
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(EXIT_USAGE)

    # Load configuration
    try:
        config_loader = ConfigLoader(args.config)
        config_loader.load()
        config_loader.validate()
    except Exception as e:
        print(f"Error loading configuration: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)

    # Set up logging
    logging_config = config_loader.section('logging')
    setup_logger(
        level=args.log_level or logging_config.get('level', 'INFO'),
        log_to_file=logging_config.get('log_to_file', True),
        log_file=logging_config.get('log_file')
    )

    sys.exit(execute(args, config_loader))


if __name__ == '__main__':
    main()
