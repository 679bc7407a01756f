"""
Analytic open-system dynamics of the sensor qubit.

Times are in seconds here; each function converts to tau = omega_m t once and
reuses the range-reduced cycle terms of closed_system. The bare precession
Omega_q t is carried symbolically, as in the closed-system module.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .closed_system import cycle_terms
from .constants import TWO_PI, decay
from .errors import DomainError

logger = logging.getLogger(__name__)


class DephasingModel(enum.Enum):
    """Decoherence envelope used to dress the coherent signal."""

    POLARON_LAB = 'polaron'
    THERMAL_WHICH_PATH = 'thermal'
    THERMAL_WHICH_PATH_DAMPED = 'thermal-damped'


@dataclass(frozen=True)
class BlochVector:
    r_x: float
    r_y: float
    r_z: float

    @property
    def length(self):
        return math.sqrt(self.r_x ** 2 + self.r_y ** 2 + self.r_z ** 2)

    def as_array(self):
        return np.array([self.r_x, self.r_y, self.r_z])


@dataclass(frozen=True)
class QubitDensityMatrix:
    """Qubit state with populations rho00, rho11 and coherence rho01 = <0|rho|1>."""

    rho00: float
    rho11: float
    rho01: complex

    def bloch(self):
        """Bloch vector of rho = (I + r.sigma)/2, with |0> the +z pole."""
        return BlochVector(
            r_x=2.0 * self.rho01.real,
            r_y=-2.0 * self.rho01.imag,
            r_z=self.rho00 - self.rho11,
        )

    def as_array(self):
        return np.array([[self.rho00, self.rho01],
                         [self.rho01.conjugate(), self.rho11]], dtype=complex)

    def is_positive(self, atol=1e-12):
        return abs(self.rho01) ** 2 <= self.rho00 * self.rho11 + atol


@dataclass(frozen=True)
class OptimalReadout:
    """
    Ramsey readout at the optimal local-oscillator phase.

    F_C_max assumes perfect readout; the (2 F_r - 1)^2 penalty is applied only
    in effective_fisher_and_sensitivity.

    Attributes:
        F_C_max: CFI at phi_LO_star, equal to r_perp^2 A^2.
        phi_LO_star: pi/2 - Phi, wrapped to (-pi, pi].
        as_reported: r_perp^2 A^2 / (1 - r_perp^2), infinite for a pure transverse state.
        exceeds_qfi: True when as_reported is larger than the state QFI.
    """

    F_C_max: float
    phi_LO_star: float
    as_reported: float
    exceeds_qfi: bool


def _tau(t, p):
    if t < 0:
        raise DomainError(f"time must be non-negative, got {t!r}", field='t')
    return p.omega_m * t


def decoherence_envelope_lambda(t, p):
    """Lambda(t) = 4 k^2 (1 - cos omega_m t); zero at every revival."""
    ct = cycle_terms(_tau(t, p))
    return 4.0 * p.k ** 2 * ct.one_minus_cos


def accumulated_phase(t, p):
    """
    Phase Phi(t) of the lab-frame coherence without the bare Omega_q t term.

    Returns the unreduced value -4 omega_m k G t - 4 k^2 sin(omega_m t)
    + 4 k G (1 - cos omega_m t), in rad.
    """
    ct = cycle_terms(_tau(t, p))
    kG = p.k * p.G_bar
    return -4.0 * kG * ct.tau - 4.0 * p.k ** 2 * ct.sin + 4.0 * kG * ct.one_minus_cos


def phase_sensitivity(t, p):
    """A(t) = dPhi/dg = 4 k gamma (1 - cos omega_m t - omega_m t), in s^2/m."""
    ct = cycle_terms(_tau(t, p))
    return 4.0 * p.k * p.gamma_lever * (ct.one_minus_cos - ct.tau)


def geometric_phase_sensitivity(t, p):
    """Derivative 2 k gamma (tau - sin tau) of the branch-dependent geometric phase."""
    ct = cycle_terms(_tau(t, p))
    return 2.0 * p.k * p.gamma_lever * ct.sweep


def _populations(theta, t, p):
    excited = math.sin(0.5 * theta) ** 2 * decay(p.Gamma_1 * t)
    return 1.0 - excited, excited


def lab_density_matrix(theta, t, p):
    """
    Lab-frame qubit state under the Lindblad reduction.

    Args:
        theta (float): Preparation polar angle, rad.
        t (float): Time, s.
        p (DerivedParams): Derived parameters.

    Returns:
        QubitDensityMatrix: Populations relax with Gamma_1; the coherence carries
        e^{-Lambda} e^{-Gamma_2 t} and the phase -Phi.
    """
    rho00, rho11 = _populations(theta, t, p)
    magnitude = 0.5 * math.sin(theta) * decay(decoherence_envelope_lambda(t, p) + p.Gamma_2 * t)
    phase = accumulated_phase(t, p)
    return QubitDensityMatrix(rho00=rho00, rho11=rho11,
                              rho01=magnitude * complex(math.cos(phase), -math.sin(phase)))


def visibility(t, p):
    """Residual fringe contrast e^{-Lambda} e^{-Gamma_2 t}."""
    return decay(decoherence_envelope_lambda(t, p) + p.Gamma_2 * t)


def transverse_bloch(theta, t, p):
    """Length r_perp of the transverse Bloch component."""
    return math.sin(theta) * visibility(t, p)


def qfi_decohered(theta, t, p):
    """
    Decohered QFI sin^2(theta) e^{-2 Lambda - 2 Gamma_2 t} A(t)^2, in s^4/m^2.

    Args:
        theta (float): Preparation polar angle, rad.
        t (float): Time, s.
        p (DerivedParams): Derived parameters.

    Returns:
        float: F_Q >= 0; exactly 0 once the envelope underflows.
    """
    envelope = decay(2.0 * decoherence_envelope_lambda(t, p) + 2.0 * p.Gamma_2 * t)
    return math.sin(theta) ** 2 * envelope * phase_sensitivity(t, p) ** 2


def cfi_ramsey(theta, t, phi_LO, p):
    """
    Classical Fisher information of a Ramsey readout at local-oscillator phase phi_LO.

    Returns:
        float: r_perp^2 A^2 sin^2(x) / (1 - r_perp^2 cos^2(x)) with x = Phi + phi_LO.
    """
    r_perp = transverse_bloch(theta, t, p)
    slope = phase_sensitivity(t, p)
    x = math.remainder(accumulated_phase(t, p) + phi_LO, TWO_PI)
    denominator = 1.0 - (r_perp * math.cos(x)) ** 2
    if denominator <= 0.0:
        # pure transverse state read out on its own axis: the limit x -> 0
        return r_perp ** 2 * slope ** 2
    return r_perp ** 2 * slope ** 2 * math.sin(x) ** 2 / denominator


def cfi_optimal(theta, t, p):
    """
    CFI at the quadrature phase phi_LO* = pi/2 - Phi.

    Returns:
        OptimalReadout: The maximized CFI together with the r_perp^2 A^2 / (1 - r_perp^2)
        expression, which is flagged whenever it exceeds the state QFI.
    """
    phi_star = math.remainder(0.5 * math.pi - accumulated_phase(t, p), TWO_PI)
    best = cfi_ramsey(theta, t, phi_star, p)
    r_perp = transverse_bloch(theta, t, p)
    signal = r_perp ** 2 * phase_sensitivity(t, p) ** 2
    as_reported = signal / (1.0 - r_perp ** 2) if r_perp < 1.0 else math.inf
    quantum = qfi_decohered(theta, t, p)
    exceeds = as_reported > quantum * (1.0 + 1e-12)
    if exceeds and signal > 0:
        logger.debug("reported CFI %.6e exceeds the state QFI %.6e at t=%.6e s", as_reported, quantum, t)
    return OptimalReadout(F_C_max=best, phi_LO_star=phi_star,
                          as_reported=as_reported, exceeds_qfi=exceeds)


def _which_path_exponent(t, p, variant):
    ct = cycle_terms(_tau(t, p))
    thermal = 2.0 * p.n_th + 1.0
    if variant is DephasingModel.POLARON_LAB:
        return 8.0 * p.k ** 2 * ct.one_minus_cos
    if variant is DephasingModel.THERMAL_WHICH_PATH:
        # 16 k^2 (2n+1) sin^2(tau/2)
        return 8.0 * p.k ** 2 * thermal * ct.one_minus_cos
    if variant is DephasingModel.THERMAL_WHICH_PATH_DAMPED:
        # 1 - e^{-gamma_m t/2} e^{-i tau}, written to keep precision near revivals
        ring_down = p.gamma_m * t / 2.0
        opening = -math.expm1(-ring_down) + math.exp(-ring_down) * ct.eta
        # normalised so gamma_m = 0 reproduces |delta alpha|^2 = 8 k^2 sin^2(tau/2)
        separation = 2.0 * p.k ** 2 * abs(opening) ** 2
        return 2.0 * separation * thermal
    raise DomainError(f"unknown dephasing model {variant!r}", field='model')


def which_path_dephasing(t, p, variant):
    """
    Mechanical which-path dephasing factor D_mech(t).

    Args:
        t (float): Time, s.
        p (DerivedParams): Derived parameters.
        variant (DephasingModel): Envelope to evaluate.

    Returns:
        float: D_mech in [0, 1]; saturates to 0.0 instead of underflowing.
    """
    return decay(_which_path_exponent(t, p, variant))


def geometric_density_matrix(theta, t, p, variant=DephasingModel.THERMAL_WHICH_PATH):
    """
    Reduced qubit state of the branch dynamics with the mechanics starting thermal.

    The coherence is 1/2 sin(theta) sqrt(D_mech) e^{-Gamma_2 t} e^{i 4 k G (tau - sin tau)}.
    With THERMAL_WHICH_PATH and Gamma_2 from qubit rates only this is the exact
    reduced state at every time, not just at revivals.
    """
    rho00, rho11 = _populations(theta, t, p)
    ct = cycle_terms(_tau(t, p))
    exponent = 0.5 * _which_path_exponent(t, p, variant) + p.Gamma_2 * t
    magnitude = 0.5 * math.sin(theta) * decay(exponent)
    phase = 4.0 * p.k * p.G_bar * ct.sweep
    return QubitDensityMatrix(rho00=rho00, rho11=rho11,
                              rho01=magnitude * complex(math.cos(phase), math.sin(phase)))


def qfi_geometric_model(theta, t, p, variant=DephasingModel.THERMAL_WHICH_PATH):
    """
    QFI of the geometric-phase model sin^2(theta) D_mech e^{-Gamma_2 t} [2 k gamma (tau - sin tau)]^2.

    Kept separate from qfi_decohered; the two differ in slope and envelope.
    """
    envelope = decay(_which_path_exponent(t, p, variant) + p.Gamma_2 * t)
    return math.sin(theta) ** 2 * envelope * geometric_phase_sensitivity(t, p) ** 2


def qfi_for_model(theta, t, p, model):
    """Dispatch to the QFI of the selected dephasing model."""
    model = DephasingModel(model)
    if model is DephasingModel.POLARON_LAB:
        return qfi_decohered(theta, t, p)
    return qfi_geometric_model(theta, t, p, model)


def visibility_for_model(t, p, model):
    """Fringe contrast |2 rho01| / sin(theta) of the selected dephasing model."""
    model = DephasingModel(model)
    if model is DephasingModel.POLARON_LAB:
        return visibility(t, p)
    return decay(0.5 * _which_path_exponent(t, p, model) + p.Gamma_2 * t)


def cfi_for_model(theta, t, p, model):
    """
    Optimal-phase Ramsey CFI r_perp^2 (dPhi/dg)^2 of the selected dephasing model.

    Transverse length and phase slope both come from the same model as
    qfi_for_model, so the result never exceeds it. Readout is taken as perfect.
    """
    model = DephasingModel(model)
    if model is DephasingModel.POLARON_LAB:
        return cfi_optimal(theta, t, p).F_C_max
    r_perp = math.sin(theta) * visibility_for_model(t, p, model)
    return r_perp ** 2 * geometric_phase_sensitivity(t, p) ** 2


def effective_fisher_and_sensitivity(F_Q, F_r, t, T_over=0.0):
    """
    Readout-degraded Fisher information and the gravity sensitivity.

    Args:
        F_Q (float): Quantum Fisher information, s^4/m^2.
        F_r (float): Single-shot readout fidelity in [0.5, 1].
        t (float): Interrogation time, s.
        T_over (float): Per-cycle overhead, s.

    Returns:
        tuple: (F_eff = (2 F_r - 1)^2 F_Q, eta_g = sqrt((t + T_over)/F_eff) in m s^-2/sqrt(Hz)).

    Raises:
        DomainError: If an input is out of range or F_eff is zero.
    """
    if not F_Q >= 0:
        raise DomainError(f"F_Q must be non-negative, got {F_Q!r}", field='F_Q')
    if not 0.5 <= F_r <= 1.0:
        raise DomainError(f"F_r must lie in [0.5, 1], got {F_r!r}", field='F_r')
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}", field='t')
    if not T_over >= 0:
        raise DomainError(f"T_over must be non-negative, got {T_over!r}", field='T_over')
    F_eff = (2.0 * F_r - 1.0) ** 2 * F_Q
    if F_eff == 0:
        raise DomainError("effective Fisher information is zero; the measurement carries no information",
                          field='F_eff')
    return F_eff, math.sqrt((t + T_over) / F_eff)
