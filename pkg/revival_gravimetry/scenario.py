"""
Scenario evaluation: optimal interrogation time, report assembly and sweeps.

A scenario is searched over true revivals t = 2 pi l / omega_m only. The
ideal column always reuses the realistic optimum t*, with Gamma_2 = 0 and
perfect readout.
"""

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from . import closed_system
from .constants import TWO_PI
from .errors import DomainError, EmptyGridError
from .open_system import (
    DephasingModel,
    cfi_for_model,
    effective_fisher_and_sensitivity,
    qfi_for_model,
    visibility_for_model,
)
from .params import DeviceInput, derive, ideal

logger = logging.getLogger(__name__)

# Relative gap above which a computed figure is flagged against its published value
REFERENCE_TOLERANCE = 0.03

# Published-figure keys and the report attribute each is compared with
REFERENCE_FIELDS = {
    'n_star': 'n_star',
    't_star_s': 't_star',
    'eta_g': 'eta_g_realistic',
    'eta_g_ideal': 'eta_g_ideal',
    'F_Q': 'F_Q_realistic',
    'F_Q_ideal': 'F_Q_ideal',
    'resolution': 'resolution_realistic',
    'resolution_ideal': 'resolution_ideal',
}


def _g0_from_k(device, value):
    return dataclasses.replace(device, g0_over_2pi=value * device.f_m)


# Sweep axis -> how a value is applied to a DeviceInput
SWEEP_AXES = {
    'k': _g0_from_k,
    'Q_m': lambda device, value: dataclasses.replace(device, Q_m=value),
    'T_bath': lambda device, value: dataclasses.replace(device, T_bath=value),
    'F_r': lambda device, value: dataclasses.replace(device, F_r=value),
    'm_eff': lambda device, value: dataclasses.replace(device, m_eff=value),
    'f_m': lambda device, value: dataclasses.replace(device, f_m=value),
}


@dataclass(frozen=True)
class ScenarioSpec:
    """
    One gravimeter configuration to evaluate.

    Attributes:
        name: Identifier used in reports and file names.
        device: Raw device parameters.
        model: Dephasing model used for the QFI.
        ideal: Report the ideal column (Gamma_2 = 0, F_r = 1) as the headline figures.
        n_half_cycle_max: Largest half-cycle index searched; only even indices are revivals.
        T_int: Total integration time for the absolute resolution, s.
        reference: Published figures keyed as in REFERENCE_FIELDS.
    """

    name: str
    device: DeviceInput
    model: DephasingModel = DephasingModel.POLARON_LAB
    ideal: bool = False
    n_half_cycle_max: int = 200
    T_int: float = 600.0
    reference: Dict[str, float] = field(default_factory=dict)

    def validate(self):
        self.device.validate()
        if int(self.n_half_cycle_max) != self.n_half_cycle_max or self.n_half_cycle_max < 2:
            raise DomainError(f"n_half_cycle_max must be an integer >= 2, got {self.n_half_cycle_max!r}",
                              field='n_half_cycle_max')
        if not self.T_int > 0:
            raise DomainError(f"T_int must be positive, got {self.T_int!r}", field='T_int')
        for key in self.reference:
            if key not in REFERENCE_FIELDS:
                raise DomainError(f"unknown reference figure {key!r}", field='reference')


@dataclass(frozen=True)
class MetrologyPoint:
    """
    Figures of merit at one time t, evaluated for the report's active column.

    F_Q, F_C_max and visibility all come from the scenario's dephasing model.
    F_C_max is the perfect-readout optimum; readout fidelity enters only
    eta_g_if_stopped_here.
    """

    t: float
    tau_over_pi: float
    F_Q_closed: float
    F_Q: float
    F_C_max: float
    visibility: float
    S_L: float
    eta_g_if_stopped_here: float


@dataclass(frozen=True)
class ReferenceCheck:
    name: str
    computed: float
    published: float
    relative_difference: float
    flagged: bool


@dataclass(frozen=True)
class ScenarioReport:
    """
    Evaluated scenario.

    The headline fields (F_Q_at_t_star, F_eff, eta_g, delta_g_at_T_int) belong to
    the column selected by `mode`; both columns are always reported as well.
    """

    name: str
    model: DephasingModel
    mode: str
    n_star: int
    t_star: float
    F_Q_at_t_star: float
    F_eff: float
    eta_g: float
    delta_g_at_T_int: float
    T_int: float
    F_Q_realistic: float
    eta_g_realistic: float
    resolution_realistic: float
    F_Q_ideal: float
    eta_g_ideal: float
    resolution_ideal: float
    eta_g_ideal_with_readout: float
    search_at_boundary: bool
    reference_checks: Tuple[ReferenceCheck, ...] = ()
    time_series: Tuple[MetrologyPoint, ...] = ()

    @property
    def flagged_references(self):
        return [check.name for check in self.reference_checks if check.flagged]


@dataclass(frozen=True)
class SweepRow:
    value: float
    FQ_peak_ideal: float
    FQ_peak_decohered: float
    visibility_tau_pi: float
    eta_g_at_opt: float
    n_star: int


def run_jobs(fn, items, jobs=1):
    """
    Apply fn to every item, in a thread pool when jobs > 1.

    Returns:
        list: Results in input order.
    """
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _revival_time(n_half, p):
    return n_half * math.pi / p.omega_m


def _search_revivals(spec, p):
    device = spec.device
    best = None
    # Only even half-cycle indices n = 2 ell are revivals
    ell_max = spec.n_half_cycle_max // 2
    for ell in range(1, ell_max + 1):
        t = _revival_time(2 * ell, p)
        F_Q = qfi_for_model(device.theta, t, p, spec.model)
        F_eff = (2.0 * device.F_r - 1.0) ** 2 * F_Q
        score = F_eff / (t + device.T_over)
        # strict comparison keeps the earliest revival on ties
        if best is None or score > best[0]:
            best = (score, ell)
    score, ell = best
    if score == 0:
        raise DomainError(f"scenario {spec.name!r}: no revival carries information", field='F_eff')
    at_boundary = ell == ell_max
    if at_boundary:
        logger.warning("scenario %r: optimum sits at the search bound n=%d; raise n_half_cycle_max",
                       spec.name, 2 * ell)
    return 2 * ell, _revival_time(2 * ell, p), at_boundary


def find_optimal_time(spec):
    """
    Revival time maximizing F_eff(t) / (t + T_over).

    Args:
        spec (ScenarioSpec): Scenario to search.

    Returns:
        tuple: (n_star, t_star) with t_star = n_star pi / omega_m and n_star even.
    """
    spec.validate()
    n_star, t_star, _ = _search_revivals(spec, derive(spec.device))
    return n_star, t_star


def _sensitivity_or_inf(F_Q, F_r, t, T_over):
    try:
        return effective_fisher_and_sensitivity(F_Q, F_r, t, T_over)[1]
    except DomainError:
        return math.inf


def metrology_point(spec, p, tau):
    """Every time-series figure at dimensionless time tau, for the parameters p."""
    device = spec.device
    t = tau / p.omega_m
    state = closed_system.hybrid_state(device.theta, device.alpha, tau, p)
    b0, b1 = state.branches
    F_Q = qfi_for_model(device.theta, t, p, spec.model)
    F_r = 1.0 if spec.ideal else device.F_r
    return MetrologyPoint(
        t=t,
        tau_over_pi=tau / math.pi,
        F_Q_closed=closed_system.qfi_closed_form(device.theta, device.alpha, tau, p),
        F_Q=F_Q,
        F_C_max=cfi_for_model(device.theta, t, p, spec.model),
        visibility=visibility_for_model(t, p, spec.model),
        S_L=closed_system.linear_entropy(state.c0 ** 2, b0.alpha, b1.alpha),
        eta_g_if_stopped_here=_sensitivity_or_inf(F_Q, F_r, t, device.T_over),
    )


def time_series(spec, p, periods, points_per_period):
    """
    Metrology points on t_i = i T_m / points_per_period, i = 1 .. periods * points_per_period.

    Raises:
        EmptyGridError: If the grid has no points.
    """
    count = int(periods) * int(points_per_period)
    if count <= 0:
        raise EmptyGridError("empty grid", field='grid')
    return [metrology_point(spec, p, TWO_PI * i / points_per_period) for i in range(1, count + 1)]


def _reference_checks(spec, values):
    checks = []
    for key, published in spec.reference.items():
        computed = values[REFERENCE_FIELDS[key]]
        difference = abs(computed - published) / abs(published) if published else math.inf
        if key == 'n_star':
            flagged = computed != published
        else:
            flagged = difference > REFERENCE_TOLERANCE
        if flagged:
            logger.warning("scenario %r: %s computed %.4g vs published %.4g (%.1f%% apart)",
                           spec.name, key, computed, published, 100.0 * difference)
        checks.append(ReferenceCheck(name=key, computed=computed, published=published,
                                     relative_difference=difference, flagged=flagged))
    return tuple(checks)


def evaluate_scenario(spec, points_per_period=40, periods=None):
    """
    Evaluate a scenario at its optimal revival.

    Args:
        spec (ScenarioSpec): Scenario to evaluate.
        points_per_period (int): Time-series density.
        periods (int): Mechanical periods covered by the time series; defaults to
            the periods up to t*. Zero skips the time series.

    Returns:
        ScenarioReport: Headline figures, both columns and reference checks.
    """
    spec.validate()
    device = spec.device
    try:
        p = derive(device)
        p_ideal = ideal(p)
        n_star, t_star, at_boundary = _search_revivals(spec, p)
        # Realistic column first, then the ideal column at the same t*
        F_Q_real = qfi_for_model(device.theta, t_star, p, spec.model)
        F_eff_real, eta_real = effective_fisher_and_sensitivity(F_Q_real, device.F_r, t_star, device.T_over)
        F_Q_ideal = qfi_for_model(device.theta, t_star, p_ideal, spec.model)
        F_eff_ideal, eta_ideal = effective_fisher_and_sensitivity(F_Q_ideal, 1.0, t_star, device.T_over)
        _, eta_ideal_readout = effective_fisher_and_sensitivity(F_Q_ideal, device.F_r, t_star, device.T_over)
    except DomainError as exc:
        raise DomainError(f"scenario {spec.name!r}: {exc}", field=exc.field) from exc

    root_T = math.sqrt(spec.T_int)
    values = {
        'n_star': n_star,
        't_star': t_star,
        'F_Q_realistic': F_Q_real,
        'eta_g_realistic': eta_real,
        'resolution_realistic': eta_real / root_T,
        'F_Q_ideal': F_Q_ideal,
        'eta_g_ideal': eta_ideal,
        'resolution_ideal': eta_ideal / root_T,
    }
    if spec.ideal:
        mode, active, headline = 'ideal', p_ideal, (F_Q_ideal, F_eff_ideal, eta_ideal)
    else:
        mode, active, headline = 'realistic', p, (F_Q_real, F_eff_real, eta_real)

    # Time series of the headline column
    if periods is None:
        periods = n_star // 2
    series = time_series(spec, active, periods, points_per_period) if periods > 0 else []
    logger.info("scenario %r: n*=%d t*=%.6e s eta_g=%.6e", spec.name, n_star, t_star, headline[2])

    return ScenarioReport(
        name=spec.name,
        model=spec.model,
        mode=mode,
        n_star=n_star,
        t_star=t_star,
        F_Q_at_t_star=headline[0],
        F_eff=headline[1],
        eta_g=headline[2],
        delta_g_at_T_int=headline[2] / root_T,
        T_int=spec.T_int,
        F_Q_realistic=F_Q_real,
        eta_g_realistic=eta_real,
        resolution_realistic=values['resolution_realistic'],
        F_Q_ideal=F_Q_ideal,
        eta_g_ideal=eta_ideal,
        resolution_ideal=values['resolution_ideal'],
        eta_g_ideal_with_readout=eta_ideal_readout,
        search_at_boundary=at_boundary,
        reference_checks=_reference_checks(spec, values),
        time_series=tuple(series),
    )


def _sweep_row(spec, axis, value):
    device = SWEEP_AXES[axis](spec.device, value)
    row_spec = dataclasses.replace(spec, device=device, reference={})
    row_spec.validate()
    p = derive(device)
    n_star, t_star, _ = _search_revivals(row_spec, p)
    decohered = qfi_for_model(device.theta, t_star, p, spec.model)
    _, eta = effective_fisher_and_sensitivity(decohered, device.F_r, t_star, device.T_over)
    return SweepRow(
        value=value,
        FQ_peak_ideal=qfi_for_model(device.theta, t_star, ideal(p), spec.model),
        FQ_peak_decohered=decohered,
        visibility_tau_pi=visibility_for_model(math.pi / p.omega_m, p, spec.model),
        eta_g_at_opt=eta,
        n_star=n_star,
    )


def sweep(spec, axis, values, jobs=1):
    """
    Re-evaluate a scenario for each value of one device parameter.

    Args:
        spec (ScenarioSpec): Base scenario.
        axis (str): One of SWEEP_AXES; 'k' sets g0/2pi = k f_m.
        values (list): Values in the axis' SI unit, in output order.
        jobs (int): Worker threads.

    Returns:
        list: One SweepRow per value, in input order.
    """
    if axis not in SWEEP_AXES:
        raise DomainError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}", field='axis')
    values = [float(value) for value in values]
    if not values:
        raise DomainError("sweep needs at least one value", field='values')
    try:
        return run_jobs(lambda value: _sweep_row(spec, axis, value), values, jobs)
    except DomainError as exc:
        raise DomainError(f"scenario {spec.name!r}, {axis} sweep: {exc}", field=exc.field) from exc


def scenario_params(spec, use_ideal: Optional[bool] = None):
    """DerivedParams of a scenario, ideal when requested or when the scenario asks for it."""
    p = derive(spec.device)
    if spec.ideal if use_ideal is None else use_ideal:
        return ideal(p)
    return p

