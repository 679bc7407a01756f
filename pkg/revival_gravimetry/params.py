"""
Device parameters and the physical quantities derived from them.

Frequencies enter in Hz and are converted to angular frequency exactly once,
in derive(). Everything downstream works with rad/s and SI units.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass

from .constants import HBAR, K_B, TWO_PI
from .errors import DomainError

logger = logging.getLogger(__name__)

# Above this ratio expm1 would overflow; the occupation is exp(-x) to double precision
_BOSE_ASYMPTOTIC = 700.0


@dataclass(frozen=True)
class DeviceInput:
    """Raw experimental parameters of one gravimeter configuration."""

    f_m: float
    m_eff: float
    g0_over_2pi: float
    Q_m: float
    T_bath: float
    T1: float
    T_phi: float
    F_r: float = 0.995
    theta: float = math.pi / 2
    alpha: complex = 0j
    g: float = 9.81
    T_over: float = 0.0

    def validate(self):
        """
        Check the device invariants.

        Raises:
            DomainError: Naming the first field that violates its range.
        """
        for name in ('f_m', 'm_eff', 'Q_m', 'T_bath', 'T1', 'T_phi'):
            value = getattr(self, name)
            if not value > 0 or not math.isfinite(value):
                raise DomainError(f"{name} must be positive and finite, got {value!r}", field=name)
        if not 0.5 <= self.F_r <= 1.0:
            raise DomainError(f"F_r must lie in [0.5, 1], got {self.F_r!r}", field='F_r')
        if not 0.0 <= self.theta <= math.pi:
            raise DomainError(f"theta must lie in [0, pi], got {self.theta!r}", field='theta')
        if not self.T_over >= 0.0:
            raise DomainError(f"T_over must be non-negative, got {self.T_over!r}", field='T_over')
        if self.g0_over_2pi < 0:
            raise DomainError(f"g0_over_2pi must be non-negative, got {self.g0_over_2pi!r}",
                              field='g0_over_2pi')


@dataclass(frozen=True)
class DerivedParams:
    """
    Every physical quantity the QFI formulas consume.

    Attributes:
        omega_m: Angular mechanical frequency, rad/s.
        z_zpf: Zero-point amplitude, m.
        gamma_lever: m_eff z_zpf / (hbar omega_m), s^2/m.
        k: Dimensionless longitudinal coupling g0/omega_m.
        G_bar: Dimensionless gravity gamma_lever * g.
        gamma_m: Mechanical damping omega_m/Q_m, rad/s.
        n_th: Thermal occupation of the mechanical bath.
        Gamma_1: Qubit relaxation rate, 1/s.
        Gamma_phi: Bare qubit pure dephasing rate, 1/s.
        Gamma_phi_prime: Gamma_phi plus the mechanical contribution, 1/s.
        Gamma_2: Total coherence decay rate, 1/s.
    """

    omega_m: float
    z_zpf: float
    gamma_lever: float
    k: float
    G_bar: float
    gamma_m: float
    n_th: float
    Gamma_1: float
    Gamma_phi: float
    Gamma_phi_prime: float
    Gamma_2: float

    @property
    def mechanical_period(self):
        """Mechanical period 2 pi / omega_m, s."""
        return TWO_PI / self.omega_m


def thermal_occupation(omega_m, T_bath):
    """
    Bose-Einstein occupation of a mode at angular frequency omega_m.

    Args:
        omega_m (float): Angular frequency, rad/s.
        T_bath (float): Bath temperature, K. Zero gives zero occupation.

    Returns:
        float: Mean thermal phonon number.
    """
    if not omega_m > 0:
        raise DomainError(f"omega_m must be positive, got {omega_m!r}", field='omega_m')
    if T_bath < 0:
        raise DomainError(f"T_bath must be non-negative, got {T_bath!r}", field='T_bath')
    if T_bath == 0:
        return 0.0
    x = HBAR * omega_m / (K_B * T_bath)
    if x > _BOSE_ASYMPTOTIC:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def _mechanical_dephasing(gamma_m, k, n_th):
    return gamma_m * k * k * (2.0 * n_th + 1.0)


def total_dephasing_rate(p):
    """
    Total coherence decay rate Gamma_2 = Gamma_1/2 + 2 Gamma_phi + 2 gamma_m k^2 (2 n_th + 1).

    Args:
        p (DerivedParams): Derived parameters; only the bare rates are read.

    Returns:
        float: Gamma_2 in 1/s.
    """
    return 0.5 * p.Gamma_1 + 2.0 * p.Gamma_phi + 2.0 * _mechanical_dephasing(p.gamma_m, p.k, p.n_th)


def dephasing_budget(p):
    """Split Gamma_2 into its additive contributions (1/s), in a fixed key order."""
    relaxation = 0.5 * p.Gamma_1
    pure = 2.0 * p.Gamma_phi
    mechanical = 2.0 * _mechanical_dephasing(p.gamma_m, p.k, p.n_th)
    return {
        'relaxation': relaxation,
        'pure_dephasing': pure,
        'mechanical': mechanical,
        'total': relaxation + pure + mechanical,
    }


def derive(device):
    """
    Convert raw device parameters into every derived quantity.

    Args:
        device (DeviceInput): Validated or unvalidated raw parameters.

    Returns:
        DerivedParams: The derived quantities.

    Raises:
        DomainError: If any physical parameter is out of range.
    """
    device.validate()

    omega_m = TWO_PI * device.f_m
    z_zpf = math.sqrt(HBAR / (2.0 * device.m_eff * omega_m))
    gamma_lever = device.m_eff * z_zpf / (HBAR * omega_m)
    # g0/omega_m with both 2 pi factors cancelled exactly
    k = device.g0_over_2pi / device.f_m
    gamma_m = omega_m / device.Q_m
    n_th = thermal_occupation(omega_m, device.T_bath)
    Gamma_1 = 1.0 / device.T1
    Gamma_phi = 1.0 / device.T_phi
    Gamma_phi_prime = Gamma_phi + _mechanical_dephasing(gamma_m, k, n_th)

    params = DerivedParams(
        omega_m=omega_m,
        z_zpf=z_zpf,
        gamma_lever=gamma_lever,
        k=k,
        G_bar=gamma_lever * device.g,
        gamma_m=gamma_m,
        n_th=n_th,
        Gamma_1=Gamma_1,
        Gamma_phi=Gamma_phi,
        Gamma_phi_prime=Gamma_phi_prime,
        Gamma_2=0.5 * Gamma_1 + 2.0 * Gamma_phi_prime,
    )
    logger.debug("derived %s", params)
    return params


def override(p, **changes):
    """
    Replace fields of DerivedParams and recompute the dependent rates.

    Gamma_phi_prime and Gamma_2 always follow from the bare rates, so they cannot
    be overridden directly.

    Args:
        p (DerivedParams): Starting parameters.
        **changes: Field replacements, e.g. G_bar=0.5 or n_th=2.0.

    Returns:
        DerivedParams: New parameters with consistent rates.
    """
    for name in ('Gamma_phi_prime', 'Gamma_2'):
        if name in changes:
            raise DomainError(f"{name} is derived and cannot be overridden", field=name)
    for name in ('gamma_m', 'n_th', 'Gamma_1', 'Gamma_phi'):
        if name in changes and changes[name] < 0:
            raise DomainError(f"{name} must be non-negative, got {changes[name]!r}", field=name)
    updated = dataclasses.replace(p, **changes)
    Gamma_phi_prime = updated.Gamma_phi + _mechanical_dephasing(updated.gamma_m, updated.k, updated.n_th)
    return dataclasses.replace(
        updated,
        Gamma_phi_prime=Gamma_phi_prime,
        Gamma_2=0.5 * updated.Gamma_1 + 2.0 * Gamma_phi_prime,
    )


def ideal(p):
    """Return the decoherence-free version of p (all rates zero, so Gamma_2 = 0)."""
    return override(p, gamma_m=0.0, Gamma_1=0.0, Gamma_phi=0.0)
