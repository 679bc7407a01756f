"""
Command-line interface for the revival gravimetry engine.

Subcommands: derive, qfi, scenario, sweep and validate. Data goes to stdout or
--out; log messages and errors go to stderr.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from . import __version__
from .config import MIN_GRID_POINTS, OUTPUT_FORMATS, load_config
from .errors import ConfigError, DomainError, GravimetryError, OracleResourceError, OutputError
from .open_system import DephasingModel
from .output import (
    DERIVED_COLUMNS,
    DERIVED_DIGITS,
    QFI_COLUMNS,
    SCENARIO_COLUMNS,
    SWEEP_COLUMNS,
    VALIDATION_COLUMNS,
    derived_row,
    qfi_rows,
    render_csv,
    render_json,
    scenario_document,
    scenario_row,
    sweep_rows,
    validation_document,
    validation_rows,
    write_text,
)
from .scenario import SWEEP_AXES, evaluate_scenario, find_optimal_time, run_jobs, scenario_params, sweep, time_series
from .validation import run_validation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_ORACLE = 5


def _common_arguments():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Path to a TOML run configuration. Defaults to the bundled scenarios.')
    common.add_argument('--scenario', help='Only use the scenario with this name.')
    common.add_argument('--format', choices=OUTPUT_FORMATS, help='Output format (default from the config, else csv).')
    common.add_argument('--out', help='Output file, or directory when several scenarios are written.')
    common.add_argument('--ideal', action='store_true', help='Use the ideal column: Gamma_2 = 0 and F_r = 1.')
    common.add_argument('--model', choices=[model.value for model in DephasingModel],
                        help='Dephasing model for the QFI.')
    common.add_argument('--nmax', type=int, help='Fock truncation for the oracle.')
    common.add_argument('--grid', type=int, help=f'Time-series points per mechanical period (>= {MIN_GRID_POINTS}).')
    common.add_argument('--jobs', type=int, default=1, help='Worker threads for independent evaluations.')
    common.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log progress to stderr (-vv for debug output).')
    return common


def build_parser():
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog='revival-gravimetry',
        description='Gravimetric sensitivity of a transmon longitudinally coupled to a nanomechanical '
                    'resonator, read out at mechanical revivals.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    commands.add_parser('derive', parents=[common], help='Print the derived physical parameters.')
    qfi = commands.add_parser('qfi', parents=[common], help='Write the time series of QFI, CFI and sensitivity.')
    qfi.add_argument('--periods', type=int, help='Mechanical periods covered (default: up to t*).')
    commands.add_parser('scenario', parents=[common], help='Evaluate scenarios at their optimal revival.')
    sweep_parser = commands.add_parser('sweep', parents=[common], help='Sweep one device parameter.')
    sweep_parser.add_argument('--axis', required=True, choices=list(SWEEP_AXES), help='Parameter to sweep.')
    sweep_parser.add_argument('--values', required=True,
                              help='Comma-separated values in SI units (k is dimensionless).')
    validate = commands.add_parser('validate', parents=[common], help='Run the oracle cross-checks.')
    validate.add_argument('--self-test', action='store_true',
                          help='Flip the sign of one closed-form term; the run must then fail.')
    validate.add_argument('--quick', action='store_true',
                          help='Smoke run: 5 oracle points and one thermal occupation.')
    return parser


def _configure_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr, force=True)


def apply_overrides(config, args):
    """Fold command-line flags into the loaded configuration."""
    # Narrow to one scenario and apply the per-scenario flags
    scenarios = config.scenarios
    if args.scenario:
        scenarios = tuple(spec for spec in scenarios if spec.name == args.scenario)
        if not scenarios:
            raise ConfigError(f"no scenario named {args.scenario!r} in the configuration", key='scenario')
    changes = {}
    if args.ideal:
        changes['ideal'] = True
    if args.model:
        changes['model'] = DephasingModel(args.model)
    scenarios = tuple(dataclasses.replace(spec, **changes) for spec in scenarios)

    # Output and oracle flags replace the configured values
    output = config.output
    if args.format:
        output = dataclasses.replace(output, format=args.format)
    if args.out:
        output = dataclasses.replace(output, path=args.out)
    if args.grid is not None:
        output = dataclasses.replace(output, grid_points_per_period=args.grid)
    if getattr(args, 'periods', None) is not None:
        output = dataclasses.replace(output, periods=args.periods)
    oracle = config.oracle
    if args.nmax is not None:
        oracle = dataclasses.replace(oracle, n_max=args.nmax)

    config = dataclasses.replace(config, scenarios=scenarios, output=output, oracle=oracle)
    config.validate()
    return config


def _emit(text, path):
    write_text(text, path, stream=sys.stdout)


def _emit_per_scenario(config, prefix, tables):
    """
    Write one table per scenario.

    With a single scenario --out names the file; with several it names a
    directory that receives <prefix>_<name>.<format>.
    """
    fmt = config.output.format
    path = config.output.path
    if len(tables) == 1:
        _emit(tables[0][1], path)
        return
    if path is None:
        raise ConfigError(f"{len(tables)} scenarios selected: pass --scenario NAME or --out DIRECTORY", key='out')
    for name, text in tables:
        _emit(text, Path(path) / f"{prefix}_{name}.{fmt}")


def cmd_derive(config, args):
    rows = [derived_row(spec.name, scenario_params(spec)) for spec in config.scenarios]
    if config.output.format == 'json':
        document = {row.pop('name'): row for row in rows}
        text = render_json(document, digits=DERIVED_DIGITS)
    else:
        text = render_csv(DERIVED_COLUMNS, rows, digits=DERIVED_DIGITS)
    _emit(text, config.output.path)
    return EXIT_OK


def cmd_qfi(config, args):
    grid = config.output.grid_points_per_period

    def render(spec):
        periods = config.output.periods
        if periods is None:
            # Default length runs up to the optimal revival
            n_star, _ = find_optimal_time(spec)
            periods = n_star // 2
        rows = qfi_rows(time_series(spec, scenario_params(spec), periods, grid))
        if config.output.format == 'json':
            return spec.name, render_json({'scenario': spec.name, 'model': spec.model.value, 'rows': rows})
        return spec.name, render_csv(QFI_COLUMNS, rows)

    _emit_per_scenario(config, 'qfi', run_jobs(render, config.scenarios, args.jobs))
    return EXIT_OK


def cmd_scenario(config, args):
    reports = run_jobs(lambda spec: evaluate_scenario(spec, periods=0), config.scenarios, args.jobs)
    if config.output.format == 'json':
        text = render_json({report.name: scenario_document(report) for report in reports})
    else:
        text = render_csv(SCENARIO_COLUMNS, [scenario_row(report) for report in reports])
    _emit(text, config.output.path)
    return EXIT_OK


def _parse_values(text):
    items = [item.strip() for item in text.split(',') if item.strip()]
    if not items:
        raise DomainError("empty value list for --values", field='values')
    try:
        return [float(item) for item in items]
    except ValueError as exc:
        raise DomainError(f"--values must be numbers: {exc}", field='values') from exc


def cmd_sweep(config, args):
    values = _parse_values(args.values)
    tables = []
    for spec in config.scenarios:
        rows = sweep_rows(sweep(spec, args.axis, values, jobs=args.jobs))
        if config.output.format == 'json':
            text = render_json({'scenario': spec.name, 'axis': args.axis, 'rows': rows})
        else:
            text = render_csv(SWEEP_COLUMNS, rows)
        tables.append((spec.name, text))
    _emit_per_scenario(config, f'sweep_{args.axis}', tables)
    return EXIT_OK


def cmd_validate(config, args):
    report = run_validation(config, self_test=args.self_test, jobs=args.jobs, quick=args.quick)
    if config.output.format == 'json':
        text = render_json(validation_document(report))
    else:
        text = render_csv(VALIDATION_COLUMNS, validation_rows(report))
    _emit(text, config.output.path)
    if not report.overall:
        failed = ', '.join(row.name for row in report.rows if not row.passed)
        print(f"Error: validation failed: {failed}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


COMMANDS = {
    'derive': cmd_derive,
    'qfi': cmd_qfi,
    'scenario': cmd_scenario,
    'sweep': cmd_sweep,
    'validate': cmd_validate,
}


def main(argv=None):
    """
    Main entry point for the command-line interface.

    Args:
        argv (list): Arguments without the program name; sys.argv when omitted.

    Returns:
        int: Exit code (0 success, 1 domain error, 2 configuration, 3 I/O,
        4 validation failure, 5 oracle resource failure).
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        config = apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OracleResourceError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except GravimetryError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    exit(main())
