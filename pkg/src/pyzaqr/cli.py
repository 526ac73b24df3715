# SPDX-FileCopyrightText: 2024-present Brian McClune <bpmcclune@gmail.com>
#
# SPDX-License-Identifier: MIT
"""Defines the ``zar`` command-line tool.

    zar fit|diagnose|envelope|simulate --config <ini> --data <csv>
        --out <dir> --seed <u64>

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 non-convergence.
"""

import argparse
import dataclasses
import logging
import pathlib
import sys
from typing import List, Optional

import numpy as np

from .config import RunConfig, load_config
from .data_container import Dataset, read_csv
from .envelope import halfnormal_envelope
from .errors import (
    ConfigError,
    ConvergenceError,
    CovarianceError,
    DataError,
    DomainError,
    SimulationError,
    ZarError,
)
from .model import deletion_changes, fit
from .parallel import parse_seed
from .reports import (
    load_fit_artifact,
    write_fit_artifact,
    write_fit_report,
    write_plot_data,
    write_residuals,
    write_table,
)
from .residuals import compute_residuals
from .simulation import run_study, write_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONVERGENCE = 3

class ArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with ``EXIT_USAGE`` on bad arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, type=pathlib.Path,
                        metavar='<file>', help='INI run configuration')
    common.add_argument('--out', default=pathlib.Path('.'), type=pathlib.Path,
                        metavar='<dir>',
                        help='output directory (default: %(default)s)')
    common.add_argument('--seed', type=_seed, metavar='<u64>',
                        help='random seed (default: configuration, else 0)')
    common.add_argument('--workers', type=int, metavar='<n>',
                        help='worker processes; 0 means one per CPU')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')

    with_data = ArgumentParser(add_help=False)
    with_data.add_argument('--data', required=True, type=pathlib.Path,
                           metavar='<csv>', help='input CSV with header row')

    with_fit = ArgumentParser(add_help=False)
    with_fit.add_argument('--fit', type=pathlib.Path, metavar='<json>',
                          help='fit artifact (default: <out>/fit.json)')

    parser = ArgumentParser(
        prog='zar', description='Zero-adjusted regression models.')
    commands = parser.add_subparsers(dest='command', required=True,
                                     parser_class=ArgumentParser)
    commands.add_parser('fit', parents=[common, with_data],
                        help='fit a model and report Wald tests')
    commands.add_parser('diagnose', parents=[common, with_data, with_fit],
                        help='residuals and plot data of a fitted model')
    commands.add_parser('envelope', parents=[common, with_data, with_fit],
                        help='half-normal plot with simulated envelope')
    commands.add_parser('simulate', parents=[common],
                        help='Monte Carlo study of residual tail calibration')
    return parser


def _read_data(args, config: RunConfig) -> Dataset:
    data = read_csv(args.data, config.response,
                    covariates=config.covariate_names(),
                    id_column=config.id_column)
    if config.family is not None:
        data.validate_for(config.family)
    return data


def _load_fit(args, config: RunConfig):
    data = _read_data(args, config)
    path = args.fit or args.out / 'fit.json'
    return load_fit_artifact(path, data)


def cmd_fit(args, config: RunConfig):
    data = _read_data(args, config)
    if np.unique(data.y).size == 1:
        raise DataError(f'response {config.response!r} is constant')
    spec = config.model_spec(data)
    result = fit(spec, data, config.fit_options)
    args.out.mkdir(parents=True, exist_ok=True)
    if not result.converged:
        write_fit_artifact(result, args.out / 'fit.json')
        raise ConvergenceError(
            f'fit did not converge: {result.convergence.message}')
    paths = write_fit_report(result, args.out)
    logger.info('fit converged; log-likelihood %.4f', result.loglik)
    sys.stdout.write(paths[0].read_text(encoding='utf-8'))
    return result


def cmd_diagnose(args, config: RunConfig):
    result = _load_fit(args, config)
    vectors = [compute_residuals(result, kind, config.seed)
               for kind in config.kinds]
    args.out.mkdir(parents=True, exist_ok=True)
    write_residuals(result, vectors, args.out / 'residuals.csv')
    write_plot_data(result, vectors, args.out)
    if config.deletion_rows:
        rows = [r - 1 for r in config.deletion_rows]
        write_table(deletion_changes(result, rows), args.out / 'deletion.csv')
    logger.info('wrote %d residual kinds to %s', len(vectors), args.out)
    return vectors


def cmd_envelope(args, config: RunConfig):
    result = _load_fit(args, config)
    table = halfnormal_envelope(
        result, config.envelope_kind, config.envelope_replicates,
        config.envelope_band, config.seed, config.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    path = write_table(
        table, args.out / f'envelope_{config.envelope_kind.name}.csv')
    logger.info('wrote %s', path)
    return table


def cmd_simulate(args, config: RunConfig):
    if config.scenario is None:
        raise ConfigError('[simulate] names no scenario')
    report = run_study(config.scenario, config.reps, config.sim_kinds,
                       config.seed, config.workers, config.tails)
    write_report(report, args.out)
    sys.stdout.write(report.summary().to_string(
        index=False, float_format=lambda v: f'{v:.2f}') + '\n')
    return report


COMMANDS = {
    'fit': cmd_fit,
    'diagnose': cmd_diagnose,
    'envelope': cmd_envelope,
    'simulate': cmd_simulate,
}


def exit_code(exc: ZarError) -> int:
    if isinstance(exc, (ConfigError, DomainError)):
        return EXIT_USAGE
    if isinstance(exc, (ConvergenceError, CovarianceError, SimulationError)):
        return EXIT_CONVERGENCE
    return EXIT_DATA


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else \
        logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        config = load_config(args.config)
        overrides = {}
        if args.seed is not None:
            overrides['seed'] = args.seed
        if args.workers is not None:
            overrides['workers'] = args.workers
        config = dataclasses.replace(config, **overrides)
        COMMANDS[args.command](args, config)
    except ZarError as exc:
        logger.error('%s', exc)
        return exit_code(exc)
    except OSError as exc:
        logger.error('%s', exc)
        return EXIT_DATA
    return EXIT_OK
