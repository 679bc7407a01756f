"""
Serialization of reports to CSV and JSON.

Floats are written in scientific notation with nine significant digits so that
identical inputs give byte-identical files. CSV uses LF line endings; JSON keeps
insertion order and writes non-finite numbers as null.
"""

import csv
import io
import json
import logging
import math
from pathlib import Path

from .errors import OutputError

logger = logging.getLogger(__name__)

QFI_COLUMNS = ('t_s', 'tau_over_pi', 'FQ_closed', 'FQ_decohered', 'FC_max', 'visibility', 'SL',
               'eta_if_stopped')

SWEEP_COLUMNS = ('value', 'FQ_peak_ideal', 'FQ_peak_decohered', 'visibility_tau_pi', 'eta_g_at_opt')

DERIVED_COLUMNS = ('name', 'omega_m', 'z_zpf', 'gamma_lever', 'k', 'G_bar', 'gamma_m', 'n_th',
                   'Gamma_1', 'Gamma_phi', 'Gamma_phi_prime', 'Gamma_2')

SCENARIO_COLUMNS = ('name', 'model', 'mode', 'n_star', 't_star_s', 'F_Q_at_t_star', 'F_eff', 'eta_g',
                    'delta_g_at_T_int', 'T_int_s', 'F_Q_realistic', 'eta_g_realistic', 'F_Q_ideal',
                    'eta_g_ideal', 'eta_g_ideal_with_readout', 'search_at_boundary', 'flagged_references')

VALIDATION_COLUMNS = ('name', 'anchor', 'tolerance', 'achieved', 'passed')

# Significant digits of the derive table
DERIVED_DIGITS = 6
DEFAULT_DIGITS = 9


def format_number(value, digits=DEFAULT_DIGITS):
    """Render a number for CSV: integers as-is, floats in %.{digits-1}e, inf as 'inf'."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return f"{value:.{digits - 1}e}"
    return str(value)


def json_number(value, digits=DEFAULT_DIGITS):
    """Round a float to `digits` significant digits for JSON; non-finite becomes None."""
    if isinstance(value, bool) or not isinstance(value, float):
        return value
    if not math.isfinite(value):
        return None
    return float(f"{value:.{digits - 1}e}")


def _json_ready(value, digits):
    if isinstance(value, dict):
        return {key: _json_ready(item, digits) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item, digits) for item in value]
    return json_number(value, digits)


def render_csv(columns, rows, digits=DEFAULT_DIGITS):
    """Header plus one line per row dict, LF-terminated."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row[column], digits) for column in columns])
    return buffer.getvalue()


def render_json(document, digits=DEFAULT_DIGITS):
    """Indented JSON in insertion order, with a trailing newline."""
    return json.dumps(_json_ready(document, digits), indent=2, allow_nan=False, ensure_ascii=False) + '\n'


def derived_row(name, p):
    row = {'name': name}
    for column in DERIVED_COLUMNS[1:]:
        row[column] = float(getattr(p, column))
    return row


def qfi_rows(points):
    return [
        {
            't_s': point.t,
            'tau_over_pi': point.tau_over_pi,
            'FQ_closed': point.F_Q_closed,
            'FQ_decohered': point.F_Q,
            'FC_max': point.F_C_max,
            'visibility': point.visibility,
            'SL': point.S_L,
            'eta_if_stopped': point.eta_g_if_stopped_here,
        }
        for point in sorted(points, key=lambda point: point.t)
    ]


def sweep_rows(rows):
    return [{column: getattr(row, column) for column in SWEEP_COLUMNS} for row in rows]


def scenario_row(report):
    return {
        'name': report.name,
        'model': report.model.value,
        'mode': report.mode,
        'n_star': report.n_star,
        't_star_s': report.t_star,
        'F_Q_at_t_star': report.F_Q_at_t_star,
        'F_eff': report.F_eff,
        'eta_g': report.eta_g,
        'delta_g_at_T_int': report.delta_g_at_T_int,
        'T_int_s': report.T_int,
        'F_Q_realistic': report.F_Q_realistic,
        'eta_g_realistic': report.eta_g_realistic,
        'F_Q_ideal': report.F_Q_ideal,
        'eta_g_ideal': report.eta_g_ideal,
        'eta_g_ideal_with_readout': report.eta_g_ideal_with_readout,
        'search_at_boundary': report.search_at_boundary,
        'flagged_references': ';'.join(report.flagged_references),
    }


def scenario_document(report):
    """Scenario report as an ordered mapping, reference checks included."""
    document = scenario_row(report)
    del document['flagged_references']
    document['reference_checks'] = [
        {
            'name': check.name,
            'computed': float(check.computed),
            'published': float(check.published),
            'relative_difference': check.relative_difference,
            'flagged': check.flagged,
        }
        for check in report.reference_checks
    ]
    return document


def validation_rows(report):
    return [
        {
            'name': row.name,
            'anchor': row.anchor,
            'tolerance': row.tolerance,
            'achieved': row.achieved,
            'passed': row.passed,
        }
        for row in report.rows
    ]


def validation_document(report):
    return {
        'overall': report.overall,
        'n_max_convergence': report.n_max_convergence,
        'checks': validation_rows(report),
        'notes': list(report.notes),
    }


def write_text(text, path=None, stream=None):
    """
    Write text to a file, or to stream when no path is given.

    Raises:
        OutputError: If the file cannot be written; carries the path.
    """
    if path is None:
        stream.write(text)
        return
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True)
        with open(path, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}", path=str(path)) from exc
    logger.info("wrote %s", path)
