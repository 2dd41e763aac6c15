"""
kwtool - batch command-line front end of the Kotz-Wishart toolkit.

Every subcommand validates its request through the handler chain, runs one
facade method and writes a JSON envelope or a CSV table to stdout. Logs go
to stderr. Exit codes: 0 success, 1 failed self test or unexpected error,
2 invalid input, 3 unmet precondition, 4 numeric non-convergence.
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from src import __version__
from src.config import Config
from src.errors import ConvergenceError, DomainError, KotzWishartError
from src.logging_config import setup_logging
from src.models.run_config import OutputFormat, RunConfig
from src.numerics.zonal import Partition
from src.patterns.chain_of_responsibility import ValidationPipeline
from src.patterns.facade import SELFTEST_LEVELS, TRANSFORMS, KotzWishartFacade

from .output import render, render_error

logger = logging.getLogger(__name__)

PROG = 'kwtool'


def _dist_parent() -> argparse.ArgumentParser:
    """Distribution options shared by the distribution commands."""
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group('distribution')
    group.add_argument('--dist', dest='dist_file', help="JSON distribution spec (overrides inline flags)")
    group.add_argument('--p', type=int, help="Dimension (defaults to the size of --sigma)")
    group.add_argument('--nu', type=float, help="Degrees of freedom nu = n - 1")
    group.add_argument('--q', type=float, default=1.0, help="Kotz power q (default: 1)")
    group.add_argument('--theta', type=float, default=0.5, help="Kotz scale theta (default: 1/2)")
    group.add_argument('--s', type=float, default=1.0, help="Kotz exponent s (default: 1)")
    group.add_argument('--sigma', help="Sigma matrix file (default: identity)")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Kotz-Wishart samplers, densities, moments, cdfs, estimator risk and M-Varma transforms.",
    )
    parser.add_argument('--version', action='version', version=f"{PROG} {__version__}")
    parser.add_argument('--config', dest='run_file', help="YAML run file with run settings")
    parser.add_argument('--seed', type=int, help=f"Master seed (default: {Config.SEED})")
    parser.add_argument('--workers', type=int, help=f"Monte Carlo worker streams (default: {Config.WORKERS})")
    parser.add_argument('--format', dest='output_format', choices=[f.value for f in OutputFormat],
                        help=f"Output format (default: {Config.OUTPUT_FORMAT})")
    parser.add_argument('--tol', type=float, help=f"Quadrature relative tolerance (default: {Config.QUAD_REL_TOL:g})")
    parser.add_argument('--max-degree', type=int, dest='max_degree',
                        help=f"Zonal series truncation degree (default: {Config.ZONAL_MAX_DEGREE})")
    parser.add_argument('--mc-samples', type=int, dest='mc_samples',
                        help=f"Monte Carlo budget (default: {Config.MC_SAMPLES})")
    parser.add_argument('--log-level', dest='log_level', help=f"Log level (default: {Config.LOG_LEVEL})")

    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True
    dist = _dist_parent()

    sample = commands.add_parser('sample', parents=[dist], help="Draw KW matrices")
    sample.add_argument('--count', type=int, required=True, help="Number of draws")

    pdf = commands.add_parser('pdf', parents=[dist], help="Density and log-density at a matrix")
    pdf.add_argument('--matrix', dest='matrix_file', required=True, help="Evaluation point A (matrix file)")
    pdf.add_argument('--integrate', action='store_true', help="Also integrate the density (p = 1)")

    moments = commands.add_parser('moments', parents=[dist], help="c1, E(A), E(A^2), E(|A|^t)")
    moments.add_argument('--t', dest='t_values', type=float, nargs='+', default=[1.0],
                         help="Generalized-variance moment orders (default: 1)")

    eig = commands.add_parser('eig', parents=[dist], help="Smallest-eigenvalue cdf on a grid")
    eig.add_argument('--grid', type=float, nargs='+', required=True, help="Positive thresholds x")

    risk = commands.add_parser('risk', parents=[dist], help="Risk of alpha A^{-1}, closed form and Monte Carlo")
    risk.add_argument('--alpha', dest='alphas', type=float, nargs='+',
                      help="Multipliers (default: 0.8 c0, c0, 1.2 c0)")

    varma = commands.add_parser('varma', help="M-Varma transform, closed form and numeric")
    varma.add_argument('transform', choices=TRANSFORMS)
    varma.add_argument('--z', dest='matrix_file', required=True, help="Transform argument Z (matrix file)")
    varma.add_argument('--q', type=float, default=1.0, help="Kernel power q (default: 1)")
    varma.add_argument('--n', type=float, help="Sample-size parameter n")
    varma.add_argument('--kappa', default='', help="Partition, e.g. 2,1 (default: empty)")
    varma.add_argument('--gamma', type=float, default=0.0, help="Laguerre parameter gamma")
    varma.add_argument('--a', type=float, nargs='*', default=[], help="Upper parameters (hypergeom, psi)")
    varma.add_argument('--b', type=float, nargs='*', default=[], help="Lower parameters (hypergeom)")
    varma.add_argument('--c', type=float, default=1.0, help="Second psi parameter")

    selftest = commands.add_parser('selftest', help="Run the built-in invariant checks")
    selftest.add_argument('--level', choices=SELFTEST_LEVELS, default='quick')

    config = commands.add_parser('config', help="Show the active configuration")
    config.add_argument('--plain', action='store_true', help="Human-readable listing instead of a table")

    return parser


def resolve_run(args: argparse.Namespace) -> RunConfig:
    """CLI flags over the YAML run file over Config defaults."""
    try:
        run_file = Config.load_run_file(args.run_file)
    except (OSError, ValueError) as e:
        raise DomainError(f"cannot read run file {args.run_file}: {e}") from e
    return RunConfig.resolve(
        run_file,
        seed=args.seed,
        workers=args.workers,
        output_format=args.output_format,
        rel_tol=args.tol,
        max_degree=args.max_degree,
        mc_samples=args.mc_samples,
    )


def build_request(args: argparse.Namespace) -> Dict[str, Any]:
    """Request dictionary consumed by the validation chain."""
    request: Dict[str, Any] = {
        'command': args.command,
        'needs_dist': args.command in ('sample', 'pdf', 'moments', 'eig', 'risk'),
        'matrix_file': getattr(args, 'matrix_file', None),
        'count': getattr(args, 'count', None),
        'grid': getattr(args, 'grid', None),
    }
    if request['needs_dist']:
        request['dist_file'] = args.dist_file
        request['options'] = {
            'p': args.p, 'nu': args.nu, 'q': args.q, 'theta': args.theta, 's': args.s, 'sigma': args.sigma,
        }
    return request


# ============================================
# Command handlers
# ============================================

def cmd_sample(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.sample_table(request['dist'], args.count)


def cmd_pdf(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.pdf_table(request['dist'], request['matrix'], integrate=args.integrate)


def cmd_moments(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.moments_table(request['dist'], args.t_values)


def cmd_eig(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.eig_table(request['dist'], args.grid)


def cmd_risk(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.risk_table(request['dist'], args.alphas)


def cmd_varma(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.varma_table(
        args.transform, request['matrix'], q=args.q, n=args.n, kappa=Partition.parse(args.kappa),
        gamma=args.gamma, a=args.a, b=args.b, c=args.c,
    )


def cmd_selftest(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    return facade.selftest_table(args.level)


def cmd_config(facade: KotzWishartFacade, request: Dict[str, Any], args: argparse.Namespace) -> pd.DataFrame:
    try:
        Config.validate()
    except ValueError as e:
        raise DomainError(f"invalid environment configuration: {e}") from e
    rows = [{'source': 'environment', 'name': name, 'value': str(value)} for name, value in Config.as_dict().items()]
    rows += [{'source': 'run', 'name': name, 'value': str(value)} for name, value in facade.run.to_dict().items()]
    return pd.DataFrame(rows, columns=['source', 'name', 'value'])


COMMANDS: Dict[str, Callable[[KotzWishartFacade, Dict[str, Any], argparse.Namespace], pd.DataFrame]] = {
    'sample': cmd_sample,
    'pdf': cmd_pdf,
    'moments': cmd_moments,
    'eig': cmd_eig,
    'risk': cmd_risk,
    'varma': cmd_varma,
    'selftest': cmd_selftest,
    'config': cmd_config,
}


def _fail(command: str, error: KotzWishartError) -> int:
    logger.error(f"{command} failed: {error}")
    sys.stderr.write(render_error(error))
    return error.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    """Run one kwtool command; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        setup_logging(args.log_level)
        run = resolve_run(args)
        if args.command == 'config' and args.plain:
            Config.print_config()
            return 0
        request = ValidationPipeline().process(build_request(args))
        facade = KotzWishartFacade(run)
        frame = COMMANDS[args.command](facade, request, args)
    except KotzWishartError as e:
        return _fail(args.command, e)
    except (np.linalg.LinAlgError, ArithmeticError) as e:
        # LinAlgError is a ValueError, so it has to be caught first
        return _fail(args.command, ConvergenceError(f"numerical failure: {e}"))
    except ValueError as e:
        return _fail(args.command, DomainError(str(e)))
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly")
        sys.stderr.write(render_error(e))
        return KotzWishartError.exit_code

    sys.stdout.write(render(args.command, run, frame))
    if args.command == 'selftest' and not frame['passed'].all():
        logger.error("Self test failed: %s", ', '.join(frame.loc[~frame['passed'], 'check']))
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
