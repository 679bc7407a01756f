"""
Tests for the unitary branch dynamics and the pure-state QFI.
"""

import math
import os
import sys
import unittest

from hypothesis import given, settings, strategies as st

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from revival_gravimetry.closed_system import (
    branch_overlap,
    branch_state,
    crb_delta_g,
    cycle_terms,
    first_cycle_peak,
    hybrid_state,
    linear_entropy,
    qfi_closed_form,
    qfi_revival,
    simple_revival_amplitudes,
)
from revival_gravimetry.errors import DomainError
from revival_gravimetry.params import derive, override
from tests.devices import SCENARIO_ONE

TWO_PI = 2.0 * math.pi


def expected_qfi(theta, tau, p):
    """4 gamma^2 (|eta|^2 + 16 k^2 p0 p1 (tau - sin tau)^2), written out directly."""
    p0 = math.cos(theta / 2) ** 2
    eta2 = 2.0 * (1.0 - math.cos(tau))
    sweep = tau - math.sin(tau)
    return 4.0 * p.gamma_lever ** 2 * (eta2 + 16.0 * p.k ** 2 * p0 * (1.0 - p0) * sweep ** 2)


class TestCycleTerms(unittest.TestCase):
    """Range reduction of the mechanical phase."""

    def test_revivals_close_exactly(self):
        """eta vanishes exactly at every whole period."""
        for n in (1, 2, 26, 100, 10_000):
            with self.subTest(n=n):
                self.assertEqual(cycle_terms(n * TWO_PI).eta, 0j)

    def test_half_period(self):
        """At tau = pi the loop is widest: eta = 2."""
        ct = cycle_terms(math.pi)
        self.assertAlmostEqual(ct.eta.real, 2.0, places=12)
        self.assertAlmostEqual(ct.eta.imag, 0.0, places=12)
        self.assertAlmostEqual(ct.sweep, math.pi, places=12)

    def test_small_tau_series(self):
        """tau - sin tau keeps full relative precision for tiny tau."""
        tau = 1e-4
        self.assertAlmostEqual(cycle_terms(tau).sweep / (tau ** 3 / 6.0), 1.0, places=8)

    def test_negative_tau(self):
        """Negative times are rejected."""
        with self.assertRaises(DomainError):
            cycle_terms(-1.0)


class TestBranchDynamics(unittest.TestCase):
    """Conditional trajectories and the hybrid state."""

    def setUp(self):
        """Near-term device with a test-sized gravity."""
        self.p = override(derive(SCENARIO_ONE), G_bar=0.5)

    def test_branches_return_to_start(self):
        """At a revival both branches come back to the initial amplitude."""
        alpha = 0.7 - 0.2j
        for j in (0, 1):
            branch = branch_state(j, alpha, TWO_PI, self.p)
            self.assertAlmostEqual(branch.alpha, alpha, places=12)

    def test_geometric_phase_at_revival(self):
        """The geometric phase after one period is 2 pi Z_j^2."""
        branch = branch_state(1, 0j, TWO_PI, self.p)
        self.assertAlmostEqual(branch.geometric_phase, TWO_PI * (0.5 - 0.2) ** 2, places=12)

    def test_branches_do_not_depend_on_preparation_angle(self):
        """theta only changes the weights c0 and c1, never the branch trajectories."""
        first = hybrid_state(0.4, 0.3 + 0.1j, 2.7, self.p)
        second = hybrid_state(2.2, 0.3 + 0.1j, 2.7, self.p)
        self.assertEqual(first.branches, second.branches)
        self.assertNotAlmostEqual(first.c0, second.c0)

    def test_invalid_branch(self):
        """Only branches 0 and 1 exist."""
        with self.assertRaises(DomainError):
            branch_state(2, 0j, 1.0, self.p)

    def test_coherence_is_restored_at_revival(self):
        """The reduced coherence has full magnitude c0 c1 after a whole period."""
        state = hybrid_state(math.pi / 2, 0.3j, TWO_PI, self.p)
        self.assertAlmostEqual(abs(state.coherence()), 0.5, places=12)

    def test_coherence_is_suppressed_mid_cycle(self):
        """Half a period in, the branch overlap is exp(-|4k|^2 / 2)."""
        state = hybrid_state(math.pi / 2, 0j, math.pi, self.p)
        self.assertAlmostEqual(abs(state.coherence()), 0.5 * math.exp(-0.5 * (4 * 0.2) ** 2), places=12)


class TestClosedFormQfi(unittest.TestCase):
    """The pure-state QFI and its special values."""

    def setUp(self):
        """Near-term device."""
        self.p = derive(SCENARIO_ONE)

    def test_revival_identity(self):
        """At tau = 2 pi the QFI is 256 pi^2 gamma^2 k^2 p0 p1."""
        for theta in (0.3, 1.0, math.pi / 2, 2.5):
            p0 = math.cos(theta / 2) ** 2
            expected = qfi_revival(self.p.gamma_lever, self.p.k, p0)
            self.assertAlmostEqual(qfi_closed_form(theta, 0j, TWO_PI, self.p) / expected, 1.0, places=9)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(min_value=0.1, max_value=math.pi - 0.1),
        st.floats(min_value=-3.0, max_value=3.0),
        st.floats(min_value=-3.0, max_value=3.0),
        st.floats(min_value=0.0, max_value=1e4),
        st.floats(min_value=0.05, max_value=40.0),
    )
    def test_independent_of_alpha_and_gravity(self, theta, re, im, G_bar, tau):
        """Neither the initial amplitude nor the value of gravity enters the QFI."""
        p = override(self.p, G_bar=G_bar)
        value = qfi_closed_form(theta, complex(re, im), tau, p)
        self.assertAlmostEqual(value / expected_qfi(theta, tau, p), 1.0, places=7)

    def test_poles_only_keep_the_loop_term(self):
        """A qubit eigenstate leaves only 4 gamma^2 |eta|^2."""
        value = qfi_closed_form(0.0, 0j, math.pi, self.p)
        self.assertAlmostEqual(value / (4.0 * self.p.gamma_lever ** 2 * 4.0), 1.0, places=12)

    def test_revival_qfi_rejects_bad_population(self):
        """Populations must lie in [0, 1]."""
        with self.assertRaises(DomainError):
            qfi_revival(1.0, 0.2, 1.5)

    def test_first_cycle_peak_precedes_the_revival(self):
        """Within the first cycle the QFI peaks before tau = 2 pi and above the revival value."""
        tau, value = first_cycle_peak(math.pi / 2, 0j, self.p)
        self.assertGreater(tau, math.pi)
        self.assertLess(tau, TWO_PI)
        self.assertGreater(value, qfi_closed_form(math.pi / 2, 0j, TWO_PI, self.p))


class TestCramerRao(unittest.TestCase):
    """Cramer-Rao bound on the gravity uncertainty."""

    def test_repetitions_average_down(self):
        """Four repetitions halve the bound."""
        self.assertAlmostEqual(crb_delta_g(1e10, 4), 0.5 * crb_delta_g(1e10), places=18)

    def test_single_shot(self):
        """One repetition gives 1/sqrt(F_Q)."""
        self.assertAlmostEqual(crb_delta_g(1e10), 1e-5, places=18)

    def test_rejects_degenerate_inputs(self):
        """Zero information or a fractional repetition count is an error."""
        with self.assertRaises(DomainError):
            crb_delta_g(0.0)
        with self.assertRaises(DomainError):
            crb_delta_g(1.0, N=2.5)


class TestEntanglement(unittest.TestCase):
    """Branch overlaps and the linear entropy."""

    def test_overlap_magnitude(self):
        """|<a1|a0>|^2 = exp(-|a0 - a1|^2)."""
        overlap, squared = branch_overlap(1.0 + 0.5j, -0.2 + 0.1j)
        separation = abs((1.0 + 0.5j) - (-0.2 + 0.1j)) ** 2
        self.assertAlmostEqual(squared, math.exp(-separation), places=14)
        self.assertAlmostEqual(abs(overlap) ** 2, squared, places=14)

    def test_entropy_vanishes_at_revival(self):
        """The branches disentangle after a whole period."""
        p = derive(SCENARIO_ONE)
        a0, a1 = simple_revival_amplitudes(TWO_PI, p)
        self.assertEqual(linear_entropy(0.5, a0, a1), 0.0)

    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=50.0))
    def test_entropy_is_bounded(self, population, tau):
        """S_L never exceeds 2 p (1 - p) <= 1/2."""
        p = derive(SCENARIO_ONE)
        a0, a1 = simple_revival_amplitudes(tau, p)
        value = linear_entropy(population, a0, a1)
        self.assertGreaterEqual(value, 0.0)
        self.assertLessEqual(value, 2.0 * population * (1.0 - population) + 1e-15)

    def test_entropy_rejects_bad_population(self):
        """Populations outside [0, 1] are rejected."""
        with self.assertRaises(DomainError):
            linear_entropy(-0.1, 0j, 1j)


class TestEntanglementCycle(unittest.TestCase):
    """Entanglement over mechanical periods."""

    def setUp(self):
        """Near-term device with a test-sized gravity and a displaced resonator."""
        self.p = override(derive(SCENARIO_ONE), G_bar=0.5)
        self.alpha = 0.4 - 0.3j

    def entropy(self, tau, p=None):
        state = hybrid_state(math.pi / 2, self.alpha, tau, p or self.p)
        b0, b1 = state.branches
        return linear_entropy(state.c0 ** 2, b0.alpha, b1.alpha)

    def overlap_squared(self, tau):
        b0, b1 = hybrid_state(math.pi / 2, self.alpha, tau, self.p).branches
        return branch_overlap(b0.alpha, b1.alpha)[1]

    def test_entropy_peaks_at_odd_half_periods(self):
        """Within each period S_L is largest at tau = (2n + 1) pi, where it is (1 - e^{-16 k^2}) / 2."""
        peak = 0.5 * -math.expm1(-16.0 * self.p.k ** 2)
        for n in range(3):
            with self.subTest(n=n):
                top = self.entropy((2 * n + 1) * math.pi)
                self.assertAlmostEqual(top, peak, places=12)
                for step in range(1, 200):
                    tau = 2 * n * math.pi + step * TWO_PI / 200
                    self.assertLessEqual(self.entropy(tau), top + 1e-15)

    def test_entropy_and_overlap_are_periodic(self):
        """S_L and |O|^2 repeat every 2 pi."""
        for tau in (0.3, 1.7, 2.9, 4.4, 6.0):
            with self.subTest(tau=tau):
                self.assertAlmostEqual(self.entropy(tau + TWO_PI), self.entropy(tau), places=12)
                self.assertAlmostEqual(self.overlap_squared(tau + TWO_PI), self.overlap_squared(tau), places=12)

    def test_peak_entropy_grows_with_coupling(self):
        """A stronger coupling entangles more at the half period."""
        peaks = [self.entropy(math.pi, override(self.p, k=k)) for k in (0.05, 0.1, 0.2, 0.3)]
        for before, after in zip(peaks, peaks[1:]):
            self.assertLess(before, after)


if __name__ == '__main__':
    unittest.main()
