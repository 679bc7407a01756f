"""
Run configuration read from TOML.

Key names carry their units (f_m_hz, T_bath_k, ...). Frequencies stay in Hz
here; derive() does the single conversion to angular frequency.
"""

import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, DomainError
from .open_system import DephasingModel
from .params import DeviceInput
from .scenario import REFERENCE_FIELDS, ScenarioSpec

logger = logging.getLogger(__name__)

CONFIG_DIR = Path(__file__).resolve().parent / 'configs'
DEFAULT_CONFIG_NAME = 'scenarios.toml'

OUTPUT_FORMATS = ('csv', 'json')
MIN_GRID_POINTS = 8

# TOML key -> (DeviceInput field, default); None marks a required key
DEVICE_KEYS = {
    'f_m_hz': ('f_m', None),
    'm_eff_kg': ('m_eff', None),
    'g0_over_2pi_hz': ('g0_over_2pi', None),
    'Q_m': ('Q_m', None),
    'T_bath_k': ('T_bath', None),
    'T1_s': ('T1', None),
    'T_phi_s': ('T_phi', None),
    'F_r': ('F_r', 0.995),
    'g_m_s2': ('g', 9.81),
    'T_over_s': ('T_over', 0.0),
}

SCENARIO_KEYS = set(DEVICE_KEYS) | {
    'name', 'theta_over_pi', 'alpha_re', 'alpha_im', 'T_int_s', 'n_half_cycle_max', 'model', 'ideal',
    'reference',
}
OUTPUT_KEYS = {'format', 'path', 'grid_points_per_period', 'periods'}
ORACLE_KEYS = {'n_max', 'delta_g', 'seed'}


@dataclass(frozen=True)
class OutputSettings:
    format: str = 'csv'
    path: Optional[str] = None
    grid_points_per_period: int = 40
    periods: Optional[int] = None


@dataclass(frozen=True)
class OracleSettings:
    """Oracle overrides; seed drives the randomized validation points."""

    n_max: Optional[int] = None
    delta_g: Optional[float] = None
    seed: int = 20240611


@dataclass(frozen=True)
class RunConfig:
    scenarios: Tuple[ScenarioSpec, ...]
    output: OutputSettings = field(default_factory=OutputSettings)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    source: Optional[str] = None

    def validate(self):
        if not self.scenarios:
            raise ConfigError("configuration defines no scenario", key='scenario')
        if self.output.format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {', '.join(OUTPUT_FORMATS)}, "
                              f"got {self.output.format!r}", key='format')
        if self.output.grid_points_per_period < MIN_GRID_POINTS:
            raise ConfigError(f"grid_points_per_period must be at least {MIN_GRID_POINTS}, "
                              f"got {self.output.grid_points_per_period}", key='grid_points_per_period')
        if self.output.periods is not None and self.output.periods < 0:
            raise ConfigError(f"periods must be non-negative, got {self.output.periods}", key='periods')
        if self.oracle.n_max is not None and self.oracle.n_max < 4:
            raise ConfigError(f"n_max must be at least 4, got {self.oracle.n_max}", key='n_max')
        names = [spec.name for spec in self.scenarios]
        if len(set(names)) != len(names):
            raise ConfigError("scenario names must be unique", key='name')


def _number(table, key, where, default=None, integer=False):
    if key not in table:
        if default is None:
            raise ConfigError(f"missing required key '{key}' in {where}", key=key)
        return default
    value = table[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}' in {where} must be a number, got {value!r}", key=key)
    if integer:
        if int(value) != value:
            raise ConfigError(f"key '{key}' in {where} must be an integer, got {value!r}", key=key)
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"key '{key}' in {where} must be finite, got {value!r}", key=key)
    return float(value)


def _check_keys(table, allowed, where):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}' in {where}", key=unknown[0])


def _parse_reference(table, where):
    if not isinstance(table, dict):
        raise ConfigError(f"'reference' in {where} must be a table", key='reference')
    where = f"{where}.reference"
    _check_keys(table, set(REFERENCE_FIELDS), where)
    return {key: _number(table, key, where, integer=(key == 'n_star')) for key in table}


def parse_scenario(table, index):
    """
    Build a ScenarioSpec from one [[scenario]] table.

    Args:
        table (dict): Parsed TOML table.
        index (int): Position in the file, used in error messages.

    Returns:
        ScenarioSpec: The validated scenario.

    Raises:
        ConfigError: On a missing, unknown or ill-typed key, or an out-of-range value.
    """
    where = f"scenario {index}"
    if not isinstance(table, dict):
        raise ConfigError(f"{where} must be a table", key='scenario')
    _check_keys(table, SCENARIO_KEYS, where)
    name = table.get('name', f"scenario{index}")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"'name' in {where} must be a non-empty string", key='name')
    where = f"{where} ({name})"

    # Device values, then the angle and amplitude given in parts
    fields = {attr: _number(table, key, where, default) for key, (attr, default) in DEVICE_KEYS.items()}
    fields['theta'] = math.pi * _number(table, 'theta_over_pi', where, 0.5)
    fields['alpha'] = complex(_number(table, 'alpha_re', where, 0.0), _number(table, 'alpha_im', where, 0.0))

    model_name = table.get('model', DephasingModel.POLARON_LAB.value)
    try:
        model = DephasingModel(model_name)
    except ValueError:
        choices = ', '.join(m.value for m in DephasingModel)
        raise ConfigError(f"'model' in {where} must be one of {choices}, got {model_name!r}", key='model')
    ideal = table.get('ideal', False)
    if not isinstance(ideal, bool):
        raise ConfigError(f"'ideal' in {where} must be true or false", key='ideal')

    spec = ScenarioSpec(
        name=name,
        device=DeviceInput(**fields),
        model=model,
        ideal=ideal,
        n_half_cycle_max=_number(table, 'n_half_cycle_max', where, 200, integer=True),
        T_int=_number(table, 'T_int_s', where, 600.0),
        reference=_parse_reference(table.get('reference', {}), where),
    )
    try:
        spec.validate()
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}", key=exc.field) from exc
    return spec


def _parse_output(table):
    _check_keys(table, OUTPUT_KEYS, 'output')
    path = table.get('path')
    if path is not None and not isinstance(path, str):
        raise ConfigError("'path' in output must be a string", key='path')
    periods = table.get('periods')
    return OutputSettings(
        format=table.get('format', 'csv'),
        path=path,
        grid_points_per_period=_number(table, 'grid_points_per_period', 'output', 40, integer=True),
        periods=None if periods is None else _number(table, 'periods', 'output', integer=True),
    )


def _parse_oracle(table):
    _check_keys(table, ORACLE_KEYS, 'oracle')
    return OracleSettings(
        n_max=None if 'n_max' not in table else _number(table, 'n_max', 'oracle', integer=True),
        delta_g=None if 'delta_g' not in table else _number(table, 'delta_g', 'oracle'),
        seed=_number(table, 'seed', 'oracle', OracleSettings.seed, integer=True),
    )


def parse_config(document, source=None):
    """
    Turn a parsed TOML document into a RunConfig.

    Accepts either a [[scenario]] array or a single [scenario] table.
    """
    _check_keys(document, {'scenario', 'output', 'oracle'}, 'configuration')
    tables = document.get('scenario', [])
    # A single [scenario] table is a one-element array
    if isinstance(tables, dict):
        tables = [tables]
    config = RunConfig(
        scenarios=tuple(parse_scenario(table, index) for index, table in enumerate(tables, start=1)),
        output=_parse_output(document.get('output', {})),
        oracle=_parse_oracle(document.get('oracle', {})),
        source=source,
    )
    config.validate()
    return config


def load_config(path=None):
    """
    Read and validate a configuration file.

    Args:
        path (str or Path): TOML file; the bundled scenarios.toml when omitted.

    Returns:
        RunConfig: The parsed configuration.

    Raises:
        ConfigError: If the file cannot be read or parsed, or is incomplete.
    """
    path = Path(path) if path is not None else bundled_config(DEFAULT_CONFIG_NAME)
    try:
        with open(path, 'rb') as handle:
            document = tomllib.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc.strerror or exc}", key=None) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}", key=None) from exc
    logger.debug("loaded configuration %s", path)
    return parse_config(document, source=str(path))


def bundled_config(name):
    """Path of a configuration file shipped with the package, e.g. 'scenario1.toml'."""
    return CONFIG_DIR / name
