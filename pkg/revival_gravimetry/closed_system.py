"""
Exact unitary dynamics of the qubit-oscillator sensor.

The evolved state is a superposition of two qubit-conditioned coherent states
whose amplitudes close in phase space at every revival tau = 2 pi n. All
functions work in dimensionless time tau = omega_m t. The bare qubit precession
(Omega_q/omega_m) tau/2 is kept symbolically as a coefficient and never
evaluated, because only phase differences and g-derivatives reach observables.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .constants import TWO_PI
from .errors import DomainError

logger = logging.getLogger(__name__)

# Residuals below this many ulps of tau are treated as an exact revival
_REVIVAL_SNAP = 64.0 * np.finfo(float).eps

# Below this tau the sweep tau - sin(tau) is taken from its Taylor series
_SERIES_LIMIT = 1e-2


@dataclass(frozen=True)
class CycleTerms:
    """Trigonometric pieces of one point of the mechanical cycle."""

    tau: float
    sin: float
    one_minus_cos: float
    eta: complex
    sweep: float

    @property
    def cos(self):
        return 1.0 - self.one_minus_cos

    @property
    def rotation(self):
        """The free-evolution phase factor e^{-i tau}."""
        return 1.0 - self.eta


def cycle_terms(tau):
    """
    Range-reduce tau by whole periods and evaluate the cycle functions.

    Exact multiples of 2 pi land on r = 0, so eta(2 pi n) is exactly zero.

    Args:
        tau (float): Dimensionless time, >= 0.

    Returns:
        CycleTerms: sin, 1 - cos, eta = 1 - e^{-i tau} and tau - sin tau.
    """
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau!r}", field='tau')
    n = round(tau / TWO_PI)
    r = tau - n * TWO_PI
    if abs(r) <= _REVIVAL_SNAP * max(1.0, tau):
        r = 0.0
    s = math.sin(r)
    half = math.sin(0.5 * r)
    one_minus_cos = 2.0 * half * half
    if tau < _SERIES_LIMIT:
        t2 = tau * tau
        sweep = tau * t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
    else:
        sweep = tau - s
    return CycleTerms(tau=tau, sin=s, one_minus_cos=one_minus_cos,
                      eta=complex(one_minus_cos, s), sweep=sweep)


@dataclass(frozen=True)
class ConditionalBranch:
    """
    Mechanical trajectory attached to qubit state |j>.

    phase is the numeric part of phi_j; the full phase adds
    precession_coefficient * Omega_q / omega_m.
    """

    j: int
    Z: float
    alpha: complex
    geometric_phase: float
    chi: float
    precession_coefficient: float

    @property
    def phase(self):
        return self.geometric_phase + self.chi


@dataclass(frozen=True)
class HybridPureState:
    """Qubit-oscillator pure state sum_j c_j e^{i phi_j} |j>|alpha_j>."""

    c0: float
    c1: float
    branches: Tuple[ConditionalBranch, ConditionalBranch]
    tau: float

    @property
    def relative_phase(self):
        """phi_0 - phi_1 without the symbolic precession term."""
        return self.branches[0].phase - self.branches[1].phase

    def coherence(self):
        """Reduced qubit coherence <0|rho_q|1> after tracing out the mechanics."""
        b0, b1 = self.branches
        overlap, _ = branch_overlap(b0.alpha, b1.alpha)
        return self.c0 * self.c1 * cmath.exp(1j * self.relative_phase) * overlap


@dataclass(frozen=True)
class QfiIntermediates:
    """Per-branch coefficients of the closed-form QFI."""

    eta: complex
    A: float
    R: float
    I: float


def _displacement(j, p):
    return (-1) ** j * p.k + p.G_bar


def branch_state(j, alpha, tau, p):
    """
    Conditional amplitude and phase of branch j at time tau.

    The preparation angle theta only weights the two branches in hybrid_state;
    the conditional resonator state itself does not depend on it.

    Args:
        j (int): Qubit branch, 0 or 1.
        alpha (complex): Initial coherent amplitude of the resonator.
        tau (float): Dimensionless time omega_m t.
        p (DerivedParams): Supplies k and G_bar.

    Returns:
        ConditionalBranch: alpha_j = alpha e^{-i tau} - Z_j (1 - e^{-i tau}) and
        phi_j = Z_j^2 (tau - sin tau) + chi_j + symbolic precession.
    """
    if j not in (0, 1):
        raise DomainError(f"branch index must be 0 or 1, got {j!r}", field='j')
    ct = cycle_terms(tau)
    Z = _displacement(j, p)
    rotated = complex(alpha) * ct.rotation
    beta = -Z * ct.eta
    # D(beta)|a> = exp(i Im(beta a*)) |a + beta>
    chi = (beta * rotated.conjugate()).imag
    return ConditionalBranch(
        j=j,
        Z=Z,
        alpha=rotated + beta,
        geometric_phase=Z * Z * ct.sweep,
        chi=chi,
        precession_coefficient=0.5 * (-1) ** j * tau,
    )


def hybrid_state(theta, alpha, tau, p):
    """Evolved sensor state for preparation angle theta and initial amplitude alpha."""
    return HybridPureState(
        c0=math.cos(0.5 * theta),
        c1=math.sin(0.5 * theta),
        branches=(branch_state(0, alpha, tau, p), branch_state(1, alpha, tau, p)),
        tau=tau,
    )


def qfi_intermediates(alpha, tau, p):
    """
    Coefficients eta, A_j, R_j, I_j of the closed-form QFI for both branches.

    Returns:
        tuple: (QfiIntermediates for j=0, QfiIntermediates for j=1).
    """
    ct = cycle_terms(tau)
    # alpha e^{i tau}; common to both branches
    counter_rotated = complex(alpha) * ct.rotation.conjugate()
    drift = (1j * ct.eta * counter_rotated).real
    result = []
    for j in (0, 1):
        branch = branch_state(j, alpha, tau, p)
        projection = ct.eta * branch.alpha.conjugate()
        result.append(QfiIntermediates(
            eta=ct.eta,
            A=2.0 * branch.Z * ct.sweep + drift,
            R=projection.real,
            I=projection.imag,
        ))
    return tuple(result)


def _populations(theta):
    half = 0.5 * theta
    return math.cos(half) ** 2, math.sin(half) ** 2


def qfi_closed_form(theta, alpha, tau, p):
    """
    Pure-state QFI for g, in s^4/m^2.

    The per-branch bracket A^2 + |eta|^2(2|alpha_j|^2 + 1) - 2 Re[(eta alpha_j*)^2]
    - 4 A I collapses to (A - 2I)^2 + |eta|^2, so the QFI is evaluated as
    4 gamma^2 (|eta|^2 + Var_p(A - 2I)). The variance is taken about the weighted
    mean, which removes the large G_bar-proportional part of A_j before squaring.

    Args:
        theta (float): Qubit preparation polar angle, rad.
        alpha (complex): Initial coherent amplitude.
        tau (float): Dimensionless time.
        p (DerivedParams): Derived parameters.

    Returns:
        float: F_Q >= 0.
    """
    p0, p1 = _populations(theta)
    first, second = qfi_intermediates(alpha, tau, p)
    b0 = first.A - 2.0 * first.I
    b1 = second.A - 2.0 * second.I
    mean = p0 * b0 + p1 * b1
    variance = p0 * (b0 - mean) ** 2 + p1 * (b1 - mean) ** 2
    eta2 = abs(first.eta) ** 2
    return 4.0 * p.gamma_lever ** 2 * (eta2 + variance)


def qfi_revival(gamma_lever, k, p0):
    """QFI at tau = 2 pi: 256 pi^2 gamma^2 k^2 p0 (1 - p0)."""
    if not 0.0 <= p0 <= 1.0:
        raise DomainError(f"p0 must lie in [0, 1], got {p0!r}", field='p0')
    return 256.0 * math.pi ** 2 * gamma_lever ** 2 * k ** 2 * p0 * (1.0 - p0)


def crb_delta_g(F_Q, N=1):
    """
    Quantum Cramer-Rao bound on the gravity uncertainty.

    Args:
        F_Q (float): Fisher information per repetition, s^4/m^2.
        N (int): Number of independent repetitions.

    Returns:
        float: Delta g_min = 1/sqrt(N F_Q), m/s^2.
    """
    if not F_Q > 0:
        raise DomainError(f"Fisher information must be positive, got {F_Q!r}", field='F_Q')
    if int(N) != N or N < 1:
        raise DomainError(f"N must be a positive integer, got {N!r}", field='N')
    return 1.0 / math.sqrt(N * F_Q)


def branch_overlap(alpha_0, alpha_1):
    """
    Coherent-state overlap <alpha_1|alpha_0>.

    Returns:
        tuple: (complex overlap, |overlap|^2 = exp(-|alpha_0 - alpha_1|^2)).
    """
    separation = abs(alpha_1 - alpha_0) ** 2
    phase = (alpha_1.conjugate() * alpha_0).imag
    overlap = cmath.exp(complex(-0.5 * separation, phase))
    return overlap, math.exp(-separation)


def linear_entropy(p, alpha_0, alpha_1):
    """
    Linear entropy 2 p (1 - p)(1 - |O|^2) of the reduced qubit.

    Args:
        p (float): Population of either qubit level.
        alpha_0 (complex): Branch-0 amplitude.
        alpha_1 (complex): Branch-1 amplitude.

    Returns:
        float: S_L in [0, 1/2].
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"population must lie in [0, 1], got {p!r}", field='p')
    separation = abs(alpha_1 - alpha_0) ** 2
    return 2.0 * p * (1.0 - p) * -math.expm1(-separation)


def simple_revival_amplitudes(tau, p):
    """Branch amplitudes of the alpha_j = Z_j (1 - e^{-i tau}) revival model."""
    eta = cycle_terms(tau).eta
    return _displacement(0, p) * eta, _displacement(1, p) * eta


def qfi_profile(theta, alpha, taus, p):
    """Closed-form QFI on a grid of dimensionless times."""
    return np.array([qfi_closed_form(theta, alpha, float(tau), p) for tau in taus])


def first_cycle_peak(theta, alpha, p, samples=4001):
    """
    Largest closed-form QFI within the first mechanical cycle (0, 2 pi].

    Returns:
        tuple: (tau at the peak, F_Q at the peak).
    """
    if samples < 2:
        raise DomainError("first-cycle search needs at least two samples", field='samples')
    taus = np.linspace(TWO_PI / samples, TWO_PI, samples)
    values = qfi_profile(theta, alpha, taus, p)
    index = int(np.argmax(values))
    return float(taus[index]), float(values[index])
