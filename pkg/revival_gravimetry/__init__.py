"""
Revival gravimetry - quantum-limited gravity sensing with a transmon qubit
longitudinally coupled to a nanomechanical resonator.

The package evaluates the quantum and classical Fisher information of the
qubit-oscillator sensor, finds the optimal revival time for a device, and checks
the analytic results against a truncated Fock-space oracle.
"""

from .params import DeviceInput, DerivedParams, derive
from .closed_system import qfi_closed_form, qfi_revival, crb_delta_g
from .open_system import DephasingModel, qfi_decohered, effective_fisher_and_sensitivity
from .scenario import ScenarioSpec, evaluate_scenario, find_optimal_time, sweep

__version__ = '1.0.0'
