import argparse
import logging
import sys
from typing import List, Optional

from flow import error_payload, stcalc_flow
from utils.artifacts import render_json
from utils.config import CliConfig, Defaults
from utils.errors import EXIT_OK, StCalcError, UsageError
from utils.numeric import parse_number

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Flags shared by every subcommand; everything else lands in CliConfig.options
COMMON = ("command", "s", "t", "u", "N", "tol", "format", "out", "log_level", "log_file")

logger = logging.getLogger('main')


def setup_logging(level: str = "WARNING", log_file: Optional[str] = None):
    """Root logger at DEBUG, console on stderr at `level`, optional DEBUG file log."""
    logger_root = logging.getLogger()
    logger_root.setLevel(logging.DEBUG)

    # Clear any existing handlers to avoid duplicates
    logger_root.handlers.clear()

    # Console handler - stderr so stdout only ever carries the artifact
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger_root.addHandler(console_handler)

    # File handler - save DEBUG and above
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger_root.addHandler(file_handler)


class StcalcArgumentParser(argparse.ArgumentParser):
    """argparse that raises UsageError instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(message)


def number(text: str):
    try:
        return parse_number(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = StcalcArgumentParser(add_help=False)
    common.add_argument('--s', type=number, help='s of the pair (s,t); p/q keeps exact arithmetic')
    common.add_argument('--t', type=number, help='t of the pair (s,t)')
    common.add_argument('--u', type=number, help='deformation parameter u > 0')
    common.add_argument('--family', type=str, help='named pair: fibonacci, pell, jacobsthal, mersenne, repunit, pq, chebyshev, lucas')
    common.add_argument('--family-args', type=number, nargs='*', default=[], help='arguments of the named family')
    common.add_argument('--N', type=int, default=Defaults.N, help='truncation order (default: %(default)s)')
    common.add_argument('--tol', type=float, default=Defaults.TOL, help='tolerance (default: %(default)s)')
    common.add_argument('--format', choices=['json', 'csv'], default='json', help='artifact format')
    common.add_argument('--out', type=str, help='write the artifact to this file instead of stdout')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default='WARNING')
    common.add_argument('--log-file', type=str, help='also log DEBUG messages to this file')

    parser = StcalcArgumentParser(prog='stcalc', description='(s,t)-calculus and pantograph equation solver')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=StcalcArgumentParser)

    seq = commands.add_parser('seq', parents=[common], help='table of {n}_{s,t}')
    seq.add_argument('--n', type=int, required=True)

    fib = commands.add_parser('fib', parents=[common], help='fibotorial {n}! or fibonomial')
    fib.add_argument('--n', type=int, required=True)
    fib.add_argument('--k', type=int)

    diff = commands.add_parser('diff', parents=[common], help='apply the (s,t)-derivative')
    diff.add_argument('--f', type=str, help='function of x')
    diff.add_argument('--x', type=number)

    integrate = commands.add_parser('integrate', parents=[common], help='(s,t)-integral over [a,b]')
    integrate.add_argument('--f', type=str, help='function of x')
    integrate.add_argument('--a', type=number, default=0)
    integrate.add_argument('--b', type=number)

    exp = commands.add_parser('exp', parents=[common], help='deformed exponentials')
    exp.add_argument('--kind', choices=['deformed', 'Exp', 'ExpPrime'], default='deformed')
    exp.add_argument('--mode', choices=['series', 'product', 'compare', 'inequalities'], default='series')
    exp.add_argument('--z', type=number)
    exp.add_argument('--K', type=int, help='number of product factors (default: adaptive)')
    exp.add_argument('--v', type=number, help='second deformation for the monotonicity check')
    exp.add_argument('--x-grid', type=float, nargs='+')

    classify = commands.add_parser('classify', parents=[common], help='convergence class of a series or of E(a,b,u;z)')
    classify.add_argument('--a', type=number)
    classify.add_argument('--b', type=number)
    classify.add_argument('--alpha', type=number)

    solve = commands.add_parser('solve', parents=[common], help='solve a pantograph equation')
    solve.add_argument('--method', choices=['linear', 'two-term', 'bell', 'iterate'], default='iterate')
    solve.add_argument('--rhs', type=str, help='right-hand side in x, y, yu')
    solve.add_argument('--a', type=number)
    solve.add_argument('--b', type=number)
    solve.add_argument('--y0', type=number, default=1)
    solve.add_argument('--eta', type=number, default=0)
    solve.add_argument('--a-dom', type=number, default=1)
    solve.add_argument('--b-box', type=number, default=1)
    solve.add_argument('--L1', type=float)
    solve.add_argument('--L2', type=float)
    solve.add_argument('--M', type=float)
    solve.add_argument('--regime', choices=['S', 'T'])
    solve.add_argument('--iterations', type=int)

    ambartsumian = commands.add_parser('ambartsumian', parents=[common], help='D y = -y + y(x/v)/v')
    ambartsumian.add_argument('--v', type=number)
    ambartsumian.add_argument('--y0', type=number, default=1)

    bell = commands.add_parser('bell', parents=[common], help='partial Bell polynomial B_{n,k}')
    bell.add_argument('--n', type=int, required=True)
    bell.add_argument('--k', type=int)
    bell.add_argument('--x', type=number, nargs='+')

    sweep = commands.add_parser('sweep', parents=[common], help='batch over a YAML list of parameter points')
    sweep.add_argument('--points', type=str, help='YAML file')
    sweep.add_argument('--task', choices=['classify', 'limit', 'exp'], default='classify')

    return parser


def build_config(args: argparse.Namespace) -> CliConfig:
    options = {key: value for key, value in vars(args).items() if key not in COMMON}
    return CliConfig(
        command=args.command,
        s=args.s,
        t=args.t,
        u=args.u,
        N=args.N,
        tol=args.tol,
        output=args.format,
        out_path=args.out,
        options=options,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one stcalc subcommand. The artifact (or the error document) goes to
    stdout unless --out is given; the return value is the exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(render_json(error_payload(e)))
        return e.exit_code

    setup_logging(args.log_level, args.log_file)
    shared = {"config": build_config(args)}
    logger.info(f"Running {args.command}")

    try:
        stcalc_flow.run(shared)
    except StCalcError as e:
        # Raised outside a node's exec, e.g. while loading sweep points
        logger.warning(f"{e.name}: {e}")
        print(render_json(error_payload(e)))
        return e.exit_code

    if shared.get("output") is not None:
        print(shared["output"])
    return shared.get("exit_code", EXIT_OK)


if __name__ == "__main__":
    sys.exit(main())
