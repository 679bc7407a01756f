"""
Brute-force numerical checks of the analytic results.

Everything here works in the truncated Fock basis of the resonator, ordered
qubit (x) oscillator, with time in units of 1/omega_m and energies in units of
hbar omega_m. Gravity enters through the dimensionless G_bar; the physical
G_bar ~ 10^4 does not fit in any Fock basis, so the oracle evaluates a test
value in [0, 2]. The pure-state QFI does not depend on G_bar, which is what
carries the comparison over to physical gravity.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from qutip import Qobj, basis, coherent, destroy, num, qeye, sigmaz, tensor, thermal_dm, tracedist
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from .closed_system import hybrid_state
from .errors import DomainError, IntegrationError, SingularQfiError, TruncationError
from .open_system import QubitDensityMatrix
from .params import override

logger = logging.getLogger(__name__)

# Largest G_bar the Fock basis is asked to hold
MAX_TEST_G_BAR = 2.0

# Substituted for a physical G_bar when an oracle QFI is requested
DEFAULT_TEST_G_BAR = 1.0

LEAKAGE_LIMIT = 1e-8
NORM_TOLERANCE = 1e-10
TRACE_TOLERANCE = 1e-8
POSITIVITY_TOLERANCE = 1e-8

# Relative disagreement between the two step sizes that triggers a warning
RICHARDSON_WARNING = 1e-3


@dataclass(frozen=True)
class FisherEstimate:
    """
    Finite-difference QFI with its ingredients, in s^4/m^2.

    Attributes:
        value: Richardson-extrapolated derivative-form estimate.
        fidelity_value: Richardson-extrapolated fidelity-form estimate.
        coarse: Derivative form at step delta.
        fine: Derivative form at step delta/2.
        delta: Step in G_bar.
        n_max: Fock truncation used.
    """

    value: float
    fidelity_value: float
    coarse: float
    fine: float
    delta: float
    n_max: int

    @property
    def forms_disagreement(self):
        return abs(self.value - self.fidelity_value) / max(abs(self.value), 1e-300)


def default_n_max(alpha, k, G_bar):
    """Fock cutoff ceil(4 (|alpha| + 2k + 2|G_bar| + 2)^2)."""
    return int(math.ceil(4.0 * (abs(alpha) + 2.0 * abs(k) + 2.0 * abs(G_bar) + 2.0) ** 2))


def _check_n_max(n_max):
    if int(n_max) != n_max or n_max < 4:
        raise DomainError(f"n_max must be an integer >= 4, got {n_max!r}", field='n_max')
    return int(n_max)


def _test_params(p):
    if abs(p.G_bar) <= MAX_TEST_G_BAR:
        return p
    logger.info("G_bar=%.6g is outside the Fock basis; using test G_bar=%.1f", p.G_bar, DEFAULT_TEST_G_BAR)
    return override(p, G_bar=DEFAULT_TEST_G_BAR)


def _qubit_state(theta):
    return (math.cos(0.5 * theta) * basis(2, 0) + math.sin(0.5 * theta) * basis(2, 1))


def _coherent(n_max, alpha):
    vector = coherent(n_max + 1, complex(alpha), method='analytic').full().ravel()
    return vector / np.linalg.norm(vector)


def _qubit_operators(p):
    return p.k * sigmaz() + p.G_bar * qeye(2)


def build_hamiltonian(p, n_max):
    """
    H / (hbar omega_m) = a^dag a + (k sigma_z + G_bar)(a + a^dag), bare sigma_z term dropped.

    Args:
        p (DerivedParams): Supplies k and G_bar.
        n_max (int): Highest retained Fock level.

    Returns:
        numpy.ndarray: Dense Hermitian matrix of size 2 (n_max + 1).
    """
    n_max = _check_n_max(n_max)
    a = destroy(n_max + 1)
    H = tensor(qeye(2), num(n_max + 1)) + tensor(_qubit_operators(p), a + a.dag())
    return H.full()


def initial_state(theta, alpha, n_max):
    """Product state (cos(theta/2)|0> + sin(theta/2)|1>) (x) |alpha> as a vector."""
    n_max = _check_n_max(n_max)
    return np.kron(_qubit_state(theta).full().ravel(), _coherent(n_max, alpha))


def thermal_initial_state(theta, n_th, n_max):
    """Qubit superposition (x) truncated thermal resonator state as a density matrix."""
    n_max = _check_n_max(n_max)
    qubit = _qubit_state(theta)
    rho = tensor(qubit * qubit.dag(), thermal_dm(n_max + 1, n_th)).full()
    return rho / np.trace(rho).real


def analytic_fock_state(theta, alpha, tau, p, n_max):
    """Closed-system branch state written out in the truncated Fock basis."""
    n_max = _check_n_max(n_max)
    state = hybrid_state(theta, alpha, tau, p)
    parts = []
    for weight, branch in zip((state.c0, state.c1), state.branches):
        parts.append(weight * np.exp(1j * branch.phase) * _coherent(n_max, branch.alpha))
    return np.concatenate(parts)


def state_fidelity(a, b):
    """Overlap |<a|b>|^2 of two state vectors."""
    return abs(np.vdot(a, b)) ** 2


def _leakage(vector, n_max):
    return abs(vector[n_max]) ** 2 + abs(vector[2 * n_max + 1]) ** 2


def evolve_pure(state, tau, p, n_max, samples=16):
    """
    Propagate a state vector by exp(-i H tau).

    Args:
        state (numpy.ndarray): Initial vector of length 2 (n_max + 1).
        tau (float): Dimensionless time.
        p (DerivedParams): Parameters with a test-sized G_bar.
        n_max (int): Fock truncation.
        samples (int): Intermediate times at which leakage and norm are checked.

    Returns:
        numpy.ndarray: The evolved vector.

    Raises:
        TruncationError: If the top Fock level holds more than 1e-8 at a sampled time.
    """
    n_max = _check_n_max(n_max)
    if tau < 0:
        raise DomainError(f"tau must be non-negative, got {tau!r}", field='tau')
    state = np.asarray(state, dtype=complex)
    if tau == 0:
        return state.copy()
    generator = sparse.csr_matrix(-1j * build_hamiltonian(p, n_max))
    trajectory = expm_multiply(generator, state, start=0.0, stop=tau, num=samples + 1, endpoint=True)
    # Check the truncation at every sampled time, not only at the end
    for step, vector in enumerate(trajectory):
        time = tau * step / samples
        leakage = _leakage(vector, n_max)
        if leakage > LEAKAGE_LIMIT:
            raise TruncationError(
                f"Fock level {n_max} holds {leakage:.3e} at tau={time:.6g}; increase n_max",
                time=time, leakage=leakage)
        norm = np.linalg.norm(vector)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise TruncationError(f"norm drifted to {norm:.12f} at tau={time:.6g}", time=time, leakage=leakage)
    return trajectory[-1]


def reduced_qubit(rho, n_max):
    """
    Trace out the resonator.

    Args:
        rho (numpy.ndarray): Joint state vector or density matrix.
        n_max (int): Fock truncation.

    Returns:
        QubitDensityMatrix: The qubit marginal.
    """
    dims = [2, n_max + 1]
    rho = np.asarray(rho)
    if rho.ndim == 1:
        joint = Qobj(rho.reshape(-1, 1), dims=[dims, [1, 1]])
    else:
        joint = Qobj(rho, dims=[dims, dims])
    block = joint.ptrace(0).full()
    return QubitDensityMatrix(rho00=float(block[0, 0].real), rho11=float(block[1, 1].real),
                              rho01=complex(block[0, 1]))


def qubit_trace_distance(a, b):
    """Trace distance between two QubitDensityMatrix values."""
    return tracedist(Qobj(a.as_array()), Qobj(b.as_array()))


def _richardson(coarse, fine):
    return (4.0 * fine - coarse) / 3.0


def _check_richardson(coarse, fine, label):
    extrapolated = _richardson(coarse, fine)
    scale = max(abs(extrapolated), 1e-300)
    spread = abs(extrapolated - fine) / scale
    if spread > RICHARDSON_WARNING:
        logger.warning("%s: Richardson steps disagree by %.3e relative", label, spread)
    return extrapolated


def _fd_step(alpha, tau, p):
    scale = 1.0 + 2.0 * (abs(p.G_bar) + p.k) * (tau + 1.0) + 2.0 * abs(alpha)
    return 1e-3 / scale


def _derivative_form(plus, minus, centre, delta):
    derivative = (plus - minus) / (2.0 * delta)
    return 4.0 * (np.vdot(derivative, derivative).real - abs(np.vdot(centre, derivative)) ** 2)


def _fidelity_form(plus, minus, delta):
    return 8.0 * (1.0 - abs(np.vdot(minus, plus))) / (2.0 * delta) ** 2


def pure_fisher_estimates(theta, alpha, tau, p, n_max=None, delta_g=None):
    """
    Finite-difference QFI of the propagated Fock-space state with respect to g.

    Both the derivative form 4(<dpsi|dpsi> - |<psi|dpsi>|^2) and the fidelity form
    8(1 - |<psi(G-d)|psi(G+d)>|)/(2d)^2 are evaluated at steps d and d/2.

    Args:
        theta (float): Preparation angle.
        alpha (complex): Initial coherent amplitude.
        tau (float): Dimensionless time.
        p (DerivedParams): Parameters; a physical G_bar is replaced by a test value.
        n_max (int): Fock truncation, default_n_max when omitted.
        delta_g (float): Step in G_bar, chosen from the phase scale when omitted.

    Returns:
        FisherEstimate: Estimates converted to s^4/m^2 with gamma_lever^2.
    """
    p = _test_params(p)
    if n_max is None:
        n_max = default_n_max(alpha, p.k, p.G_bar)
    n_max = _check_n_max(n_max)
    delta = _fd_step(alpha, tau, p) if delta_g is None else delta_g
    if not delta > 0:
        raise DomainError(f"delta_g must be positive, got {delta!r}", field='delta_g')
    start = initial_state(theta, alpha, n_max)

    def propagate(G_bar):
        return evolve_pure(start, tau, override(p, G_bar=G_bar), n_max)

    centre = propagate(p.G_bar)
    derivative_forms = []
    fidelity_forms = []
    for step in (delta, 0.5 * delta):
        plus = propagate(p.G_bar + step)
        minus = propagate(p.G_bar - step)
        derivative_forms.append(_derivative_form(plus, minus, centre, step))
        fidelity_forms.append(_fidelity_form(plus, minus, step))

    lever2 = p.gamma_lever ** 2
    value = _check_richardson(*derivative_forms, label="pure QFI (derivative form)")
    fidelity_value = _richardson(*fidelity_forms)
    return FisherEstimate(
        value=lever2 * value,
        fidelity_value=lever2 * fidelity_value,
        coarse=lever2 * derivative_forms[0],
        fine=lever2 * derivative_forms[1],
        delta=delta,
        n_max=n_max,
    )


def qfi_pure_fd(theta, alpha, tau, p, n_max=None, delta_g=None):
    """Richardson-extrapolated finite-difference QFI of the Fock-space state, s^4/m^2."""
    return pure_fisher_estimates(theta, alpha, tau, p, n_max=n_max, delta_g=delta_g).value


def truncation_convergence(theta, alpha, tau, p, n_max=None):
    """Relative change of the oracle QFI when n_max is doubled."""
    p = _test_params(p)
    if n_max is None:
        n_max = default_n_max(alpha, p.k, p.G_bar)
    base = qfi_pure_fd(theta, alpha, tau, p, n_max=n_max)
    doubled = qfi_pure_fd(theta, alpha, tau, p, n_max=2 * n_max)
    return abs(doubled - base) / max(abs(doubled), 1e-300)


def collapse_operators(p, n_max):
    """
    Lab-frame jump operators scaled to dimensionless rates (rate / omega_m).

    Qubit relaxation |0><1|, bare pure dephasing sigma_z, phonon loss a and
    phonon gain a^dag. Channels with zero rate are omitted.
    """
    n_max = _check_n_max(n_max)
    a = destroy(n_max + 1)
    # destroy(2) is |0><1|: the decay that empties |1>
    channels = [
        (p.Gamma_1, tensor(destroy(2), qeye(n_max + 1))),
        (p.Gamma_phi, tensor(sigmaz(), qeye(n_max + 1))),
        (p.gamma_m * (p.n_th + 1.0), tensor(qeye(2), a)),
        (p.gamma_m * p.n_th, tensor(qeye(2), a.dag())),
    ]
    return [math.sqrt(rate / p.omega_m) * operator.full() for rate, operator in channels if rate > 0]


class _Liouvillian:
    """Right-hand side of the master equation with the jump terms folded into H_eff."""

    def __init__(self, H, jumps):
        decay_part = sum((L.conj().T @ L for L in jumps), np.zeros_like(H))
        self.H_eff = sparse.csr_matrix(H - 0.5j * decay_part)
        self.H_eff_dag = sparse.csr_matrix(self.H_eff.conj().T)
        self.jumps = [(sparse.csr_matrix(L), sparse.csr_matrix(L.conj().T)) for L in jumps]

    def __call__(self, rho):
        drho = -1j * (self.H_eff @ rho - (self.H_eff_dag.T @ rho.T).T)
        for L, L_dag in self.jumps:
            drho += L @ (L_dag.T @ rho.T).T
        return drho

    def rk4_step(self, rho, dt):
        k1 = self(rho)
        k2 = self(rho + 0.5 * dt * k1)
        k3 = self(rho + 0.5 * dt * k2)
        k4 = self(rho + dt * k3)
        return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _run_rk4(liouvillian, rho0, taus, dt):
    rho = rho0.copy()
    now = 0.0
    snapshots = []
    for target in taus:
        span = target - now
        steps = int(math.ceil(span / dt)) if span > 0 else 0
        for _ in range(steps):
            rho = liouvillian.rk4_step(rho, span / steps)
            rho = 0.5 * (rho + rho.conj().T)
        now = target
        snapshots.append(rho.copy())
    return snapshots


def _check_density(rho, n_max, tau):
    trace = np.trace(rho).real
    if abs(trace - 1.0) > TRACE_TOLERANCE:
        raise IntegrationError(f"trace drifted to {trace:.12f} at tau={tau:.6g}", achieved=abs(trace - 1.0))
    smallest = np.linalg.eigvalsh(rho)[0]
    if smallest < -POSITIVITY_TOLERANCE:
        raise IntegrationError(f"negative eigenvalue {smallest:.3e} at tau={tau:.6g}", achieved=-smallest)
    leakage = rho[n_max, n_max].real + rho[2 * n_max + 1, 2 * n_max + 1].real
    if leakage > LEAKAGE_LIMIT:
        raise TruncationError(
            f"Fock level {n_max} holds {leakage:.3e} at tau={tau:.6g}; increase n_max",
            time=tau, leakage=leakage)


def lindblad_trajectory(rho0, times, p, n_max, tolerance=1e-8, max_halvings=6):
    """
    Integrate the lab-frame master equation with fixed-step RK4 and step halving.

    The step is halved until two successive step sizes agree to `tolerance`
    (largest element difference) at every requested time.

    Args:
        rho0 (numpy.ndarray): Initial joint density matrix.
        times (list): Increasing sample times, s.
        p (DerivedParams): Parameters with a test-sized G_bar.
        n_max (int): Fock truncation.
        tolerance (float): Agreement required between successive step sizes.
        max_halvings (int): Halvings attempted before giving up.

    Returns:
        list: Density matrices at each requested time.

    Raises:
        IntegrationError: If halving does not converge, or trace or positivity fails.
        TruncationError: If the top Fock level becomes populated.
    """
    n_max = _check_n_max(n_max)
    taus = [p.omega_m * t for t in times]
    if any(tau < 0 for tau in taus) or any(b < a for a, b in zip(taus, taus[1:])):
        raise DomainError("sample times must be non-negative and increasing", field='times')
    H = build_hamiltonian(p, n_max)
    liouvillian = _Liouvillian(H, collapse_operators(p, n_max))
    spectral_scale = n_max + 1.0 + 2.0 * (abs(p.k) + abs(p.G_bar)) * math.sqrt(n_max + 1.0)
    dt = 0.5 / spectral_scale

    rho0 = np.asarray(rho0, dtype=complex)
    coarse = _run_rk4(liouvillian, rho0, taus, dt)
    achieved = math.inf
    for _ in range(max_halvings):
        dt *= 0.5
        fine = _run_rk4(liouvillian, rho0, taus, dt)
        achieved = max(np.max(np.abs(a - b)) for a, b in zip(coarse, fine)) if taus else 0.0
        logger.debug("RK4 dt=%.3e: step-halving difference %.3e", dt, achieved)
        if achieved <= tolerance:
            for tau, rho in zip(taus, fine):
                _check_density(rho, n_max, tau)
            return fine
        coarse = fine
    raise IntegrationError(
        f"step halving stalled at {achieved:.3e} (tolerance {tolerance:.1e}) after {max_halvings} halvings",
        achieved=achieved)


def lindblad_integrate(rho0, t, p, n_max, tolerance=1e-8):
    """Joint density matrix at time t (s) under the master equation."""
    return lindblad_trajectory(rho0, [t], p, n_max, tolerance=tolerance)[-1]


def _bloch_qfi(centre, plus, minus, delta):
    r = centre.bloch().as_array()
    derivative = (plus.bloch().as_array() - minus.bloch().as_array()) / (2.0 * delta)
    purity_gap = 1.0 - float(r @ r)
    radial = float(r @ derivative)
    value = float(derivative @ derivative)
    if purity_gap <= 1e-12:
        if abs(radial) > 1e-9 * max(math.sqrt(value), 1e-300):
            raise SingularQfiError("Bloch vector QFI is singular: pure state with radial drift", field='r')
        return value
    return value + radial ** 2 / purity_gap


def qfi_mixed_bloch(rho_of_g, g, delta_g):
    """
    Two-level QFI |dr|^2 + (r.dr)^2 / (1 - |r|^2) from central differences of the Bloch vector.

    Args:
        rho_of_g (callable): Maps g (m/s^2) to a QubitDensityMatrix.
        g (float): Evaluation point, m/s^2.
        delta_g (float): Step, m/s^2; delta_g/2 is also run for Richardson extrapolation.

    Returns:
        float: F_Q in s^4/m^2.

    Raises:
        SingularQfiError: If |r| = 1 while r.dr does not vanish.
    """
    if not delta_g > 0:
        raise DomainError(f"delta_g must be positive, got {delta_g!r}", field='delta_g')
    centre = rho_of_g(g)
    estimates = [_bloch_qfi(centre, rho_of_g(g + step), rho_of_g(g - step), step)
                 for step in (delta_g, 0.5 * delta_g)]
    return _check_richardson(*estimates, label="Bloch-vector QFI")
