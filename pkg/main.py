#!/usr/bin/env python3
"""
Entanglement toolkit - Main entry point
Estimates violation fractions over random state ensembles, verifies single
states against fixed Bell operators and reports the entanglement bound suite.

Exit codes: 0 success, 2 usage/flag/file error, 3 invalid state, 1 unexpected failure.
"""
import argparse
import dataclasses
import logging
import sys
from typing import Dict, List, Optional

from sqlalchemy.exc import SQLAlchemyError

from config import config
from database.connection import DatabaseManager
from entanglement.bell import (
    CANONICAL_SETTINGS,
    SQRT2,
    SettingsPair,
    bell_family4,
    bell_family36,
    classify,
    expectation,
    horodecki_max,
    max_over_orthogonal_settings,
)
from entanglement.errors import (
    ConfigInvalid,
    EntanglementError,
    InvalidDensityMatrix,
    NotHermitian,
    NotNormalized,
)
from entanglement.qstate import fidelity_negativity_slack, fully_entangled_fraction, negativity
from entanglement.rng import validate_seed
from entanglement.sampling import DEFAULT_SEPARABLE_TERMS
from montecarlo import STATISTIC_ALIASES, STATISTICS, ExperimentConfig, ExperimentRunner, resolve_statistic
from utils.files import load_settings, load_state
from utils.logger import init_sentry, setup_logger
from utils.output import dumps_csv, dumps_json, write_output

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INVALID_STATE = 3

_STATE_ERRORS = (InvalidDensityMatrix, NotNormalized, NotHermitian)

TALLY_CSV_COLUMNS = [
    'statistic', 'ensemble', 'hits', 'trials', 'fraction', 'stderr',
    'ci95_lo', 'ci95_hi', 'seed', 'min_value',
]
VERIFY_CSV_COLUMNS = [
    'index', 'variant', 'a_pair', 'b_pair', 'expectation', 'violates_chsh',
    'violates_rus', 'within_cirelson', 'negativity_lower_bound',
    'satisfies_negativity_bound',
]
BOUND_CSV_COLUMNS = [
    'negativity', 'fully_entangled_fraction', 'optimizer_max', 'horodecki_max',
    'fidelity_bound_slack', 'fidelity_negativity_slack', 'negativity_bound_slack',
] + [f"{party}{k}_{axis}" for party in 'ab' for k in (1, 2) for axis in 'xyz']


class UsageError(Exception):
    """Flag problem detected by the argument parser"""


class ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage problems as exceptions instead of exiting"""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> ArgumentParser:
    """
    Build the command line parser

    Returns:
        Parser with estimate, verify and bound subcommands
    """
    common = ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0, help='Random seed, 0..2^64-1 (default: 0)')
    common.add_argument(
        '--format',
        choices=['json', 'csv'],
        default='json',
        help='Output format (default: json)'
    )
    common.add_argument('--out', type=str, help='Output file (default: standard output)')
    common.add_argument(
        '--log-level',
        type=str.upper,
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Logging level (default: LOG_LEVEL or WARNING)'
    )

    parser = ArgumentParser(
        prog='entanglement',
        description='Two-qubit Bell-CHSH entanglement verification toolkit'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    estimate = subparsers.add_parser(
        'estimate',
        parents=[common],
        help='Monte Carlo estimate of violation fractions'
    )
    estimate.add_argument(
        '--ensemble',
        choices=['mixed', 'pure-haar', 'separable'],
        default='mixed',
        help='State ensemble (default: mixed)'
    )
    estimate.add_argument(
        '--separable-terms',
        type=int,
        default=DEFAULT_SEPARABLE_TERMS,
        help='Product terms per separable mixture (default: 8)'
    )
    estimate.add_argument(
        '--statistic',
        action='append',
        help=f"Statistic to tally, repeatable or comma-separated: {', '.join(STATISTICS)} (default: all; alias: {', '.join(STATISTIC_ALIASES)})"
    )
    estimate.add_argument('--samples', type=int, required=True, help='Number of sampled states')
    estimate.add_argument('--shards', type=int, default=1, help='Independent seeded streams (default: 1)')
    estimate.add_argument(
        '--workers',
        type=int,
        help='Worker threads; never changes results (default: ENTANGLEMENT_WORKERS or CPU count)'
    )
    estimate.add_argument('--settings-file', type=str, help='Fixed settings (pair or triad mode)')
    estimate.add_argument('--store', type=str, help='Database URL to upsert results into (default: RESULTS_DB_URL)')

    verify = subparsers.add_parser(
        'verify',
        parents=[common],
        help='Evaluate a state against the 4 or 36 Bell operators of fixed settings'
    )
    verify.add_argument('--state-file', type=str, required=True, help='State file (density or pure)')
    verify.add_argument('--settings-file', type=str, help='Settings file (default: canonical z, x pair)')

    bound = subparsers.add_parser(
        'bound',
        parents=[common],
        help='Report negativity, fully entangled fraction, optimized Bell value and bound slacks'
    )
    bound.add_argument('--state-file', type=str, required=True, help='State file (density or pure)')
    bound.add_argument('--restarts', type=int, default=8, help='Optimizer restarts (default: 8)')
    bound.add_argument('--iterations', type=int, default=200, help='Optimizer sweeps per restart (default: 200)')

    return parser


def parse_statistics(values: Optional[List[str]]) -> tuple:
    """Flatten repeated and comma-separated --statistic values, keeping first occurrences"""
    if not values:
        return STATISTICS
    statistics = []
    for value in values:
        for name in value.split(','):
            name = resolve_statistic(name.strip())
            if name and name not in statistics:
                statistics.append(name)
    return tuple(statistics)


def _render(records: List[Dict], columns: List[str], fmt: str, document=None) -> str:
    if fmt == 'csv':
        return dumps_csv(records, columns)
    return dumps_json(records if document is None else document)


def cmd_estimate(args) -> int:
    """
    Run a Monte Carlo estimate and write one TallyResult per statistic
    """
    experiment = ExperimentConfig(
        ensemble=args.ensemble,
        statistics=parse_statistics(args.statistic),
        samples=args.samples,
        seed=args.seed,
        shards=args.shards,
        separable_terms=args.separable_terms,
    )
    if args.settings_file:
        settings = load_settings(args.settings_file)
        if isinstance(settings, SettingsPair):
            experiment = dataclasses.replace(experiment, settings=settings)
        else:
            experiment = dataclasses.replace(experiment, triads=settings)

    store_url = args.store or config.storage.results_db_url
    if store_url and not store_url.startswith(('sqlite', 'postgresql')):
        raise ConfigInvalid("--store must be a sqlite:// or postgresql:// URL")

    workers = args.workers if args.workers is not None else config.runtime.workers
    runner = ExperimentRunner(experiment, workers=workers)

    db_manager = None
    if store_url:
        db_manager = DatabaseManager(store_url)
        db_manager.initialize()
        if not db_manager.test_connection():
            db_manager.close()
            raise ConfigInvalid("cannot connect to the --store database")

    try:
        results = runner.run()
        if db_manager:
            db_manager.create_tables()
            runner.save_results(db_manager, results)
    finally:
        if db_manager:
            db_manager.close()

    records = [result.to_dict() for result in results]
    if args.format == 'csv':
        for record in records:
            lo, hi = record.pop('ci95')
            record['ci95_lo'], record['ci95_hi'] = lo, hi
    write_output(_render(records, TALLY_CSV_COLUMNS, args.format), args.out)
    return EXIT_OK


def verify_report(rho, settings) -> Dict:
    """
    Evaluate every operator of the settings' family on one state

    Args:
        rho: DensityMatrix to verify
        settings: SettingsPair (4 operators) or a (Triad, Triad) tuple (36 operators)

    Returns:
        Report dictionary with negativity, the best negativity lower bound and per-operator verdicts
    """
    if isinstance(settings, SettingsPair):
        operators = bell_family4(settings)
    else:
        operators = bell_family36(*settings)

    n = negativity(rho)
    rows = []
    for index, operator in enumerate(operators):
        verdict = classify(expectation(operator, rho), n)
        rows.append({
            'index': index,
            'variant': operator.variant,
            'a_pair': operator.a_pair,
            'b_pair': operator.b_pair,
            'expectation': verdict.value,
            'violates_chsh': verdict.violates_chsh,
            'violates_rus': verdict.violates_rus,
            'within_cirelson': verdict.within_cirelson,
            'negativity_lower_bound': verdict.negativity_lower_bound,
            'satisfies_negativity_bound': verdict.satisfies_negativity_bound,
        })

    violations = sum(1 for row in rows if row['violates_chsh'])
    logger.info(f"{violations} of {len(rows)} operators violate the CHSH bound")
    return {
        'negativity': n,
        'negativity_lower_bound': max(row['negativity_lower_bound'] for row in rows),
        'operators': rows,
    }


def cmd_verify(args) -> int:
    rho = load_state(args.state_file)
    settings = load_settings(args.settings_file) if args.settings_file else CANONICAL_SETTINGS
    report = verify_report(rho, settings)
    write_output(_render(report['operators'], VERIFY_CSV_COLUMNS, args.format, report), args.out)
    return EXIT_OK


def bound_report(rho, restarts: int, iterations: int, seed: int) -> Dict:
    """
    Compute the entanglement bound suite for one state

    Slacks are non-negative up to optimizer and rounding error:
    2 sqrt2 F - max, (1 + N)/2 - F and sqrt2 (1 + N) - max.
    """
    n = negativity(rho)
    f = fully_entangled_fraction(rho)
    value, settings = max_over_orthogonal_settings(rho, restarts=restarts, iterations=iterations, seed=seed)

    def directions(pair):
        return [[d.x, d.y, d.z] for d in (pair.d1, pair.d2)]

    return {
        'negativity': n,
        'fully_entangled_fraction': f,
        'optimizer_max': value,
        'horodecki_max': horodecki_max(rho),
        'fidelity_bound_slack': 2.0 * SQRT2 * f - value,
        'fidelity_negativity_slack': fidelity_negativity_slack(rho),
        'negativity_bound_slack': SQRT2 * (1.0 + n) - value,
        'settings': {'a': directions(settings.a), 'b': directions(settings.b)},
    }


def cmd_bound(args) -> int:
    rho = load_state(args.state_file)
    report = bound_report(rho, args.restarts, args.iterations, args.seed)

    row = {key: value for key, value in report.items() if key != 'settings'}
    for party in ('a', 'b'):
        for k, vector in enumerate(report['settings'][party], start=1):
            for axis, component in zip('xyz', vector):
                row[f"{party}{k}_{axis}"] = component
    write_output(_render([row], BOUND_CSV_COLUMNS, args.format, report), args.out)
    return EXIT_OK


COMMANDS = {
    'estimate': cmd_estimate,
    'verify': cmd_verify,
    'bound': cmd_bound,
}


def _fail(code: int, message: str) -> int:
    sys.stderr.write(f"error: {message}\n")
    sys.stderr.flush()
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main execution function

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        return _fail(EXIT_USAGE, str(e))

    setup_logger(level=args.log_level or config.logging.level, log_file=config.logging.log_file or None)
    init_sentry(config.monitoring.sentry_dsn)

    errors = config.validate()
    if errors:
        return _fail(EXIT_USAGE, f"invalid environment configuration: {'; '.join(errors)}")

    try:
        validate_seed(args.seed)
        return COMMANDS[args.command](args)
    except _STATE_ERRORS as e:
        return _fail(EXIT_INVALID_STATE, str(e))
    except EntanglementError as e:
        return _fail(EXIT_USAGE, str(e))
    except OSError as e:
        return _fail(EXIT_USAGE, f"cannot write output: {e}")
    except SQLAlchemyError as e:
        logger.error(f"Storing results failed: {e}", exc_info=True)
        return _fail(EXIT_FAILURE, f"storing results failed: {e.__class__.__name__}")
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return _fail(EXIT_FAILURE, str(e))


if __name__ == '__main__':
    sys.exit(main())
