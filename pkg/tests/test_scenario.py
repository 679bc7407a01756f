"""
Tests for the optimal-time search, scenario reports and sweeps.
"""

import dataclasses
import math
import os
import sys
import unittest

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.dirname(os.path.dirname(__file__))))

from revival_gravimetry.errors import DomainError, EmptyGridError
from revival_gravimetry.open_system import DephasingModel
from revival_gravimetry.params import derive
from revival_gravimetry.scenario import (
    ScenarioSpec,
    evaluate_scenario,
    find_optimal_time,
    run_jobs,
    sweep,
    time_series,
)
from tests.devices import SCENARIO_ONE, SCENARIO_TWO

PUBLISHED_ONE = {
    'n_star': 52,
    't_star_s': 260e-6,
    'eta_g': 6.5e-8,
    'F_Q': 6.2e10,
    'F_Q_ideal': 1.7e11,
    'resolution': 6.5e-9,
}


class TestOptimalTime(unittest.TestCase):
    """Search over revivals."""

    def test_scenario_one(self):
        """The near-term device peaks at the 26th revival, 260 us."""
        n_star, t_star = find_optimal_time(ScenarioSpec('scenario1', SCENARIO_ONE))
        self.assertEqual(n_star, 52)
        self.assertAlmostEqual(t_star / 260e-6, 1.0, places=12)

    def test_scenario_two(self):
        """The high-mass device peaks at the fifth revival, 250 us."""
        n_star, t_star = find_optimal_time(ScenarioSpec('scenario2', SCENARIO_TWO))
        self.assertEqual(n_star, 10)
        self.assertAlmostEqual(t_star / 250e-6, 1.0, places=12)

    def test_search_bound_is_reported(self):
        """A short search window ends on its last revival and says so."""
        report = evaluate_scenario(ScenarioSpec('short', SCENARIO_ONE, n_half_cycle_max=20), periods=0)
        self.assertEqual(report.n_star, 20)
        self.assertTrue(report.search_at_boundary)

    def test_no_information(self):
        """Without coupling no revival carries information."""
        spec = ScenarioSpec('uncoupled', dataclasses.replace(SCENARIO_ONE, g0_over_2pi=0.0))
        with self.assertRaises(DomainError):
            find_optimal_time(spec)

    def test_rejects_bad_search_window(self):
        """At least one revival must be searchable."""
        with self.assertRaises(DomainError):
            find_optimal_time(ScenarioSpec('bad', SCENARIO_ONE, n_half_cycle_max=1))


class TestScenarioReport(unittest.TestCase):
    """Headline figures of both devices."""

    def test_scenario_one_figures(self):
        """QFI and sensitivity of the near-term device, both columns."""
        report = evaluate_scenario(ScenarioSpec('scenario1', SCENARIO_ONE), periods=0)
        self.assertEqual(report.mode, 'realistic')
        self.assertAlmostEqual(report.F_Q_realistic / 6.248e10, 1.0, delta=2e-3)
        self.assertAlmostEqual(report.F_Q_ideal / 1.7302e11, 1.0, delta=2e-3)
        self.assertAlmostEqual(report.eta_g_realistic / 6.515e-8, 1.0, delta=2e-3)
        self.assertAlmostEqual(report.eta_g_ideal / 3.8766e-8, 1.0, delta=2e-3)
        self.assertEqual(report.eta_g, report.eta_g_realistic)
        self.assertAlmostEqual(report.delta_g_at_T_int, report.eta_g / math.sqrt(600.0), places=20)

    def test_scenario_two_figures(self):
        """QFI and sensitivity of the high-mass device."""
        report = evaluate_scenario(ScenarioSpec('scenario2', SCENARIO_TWO), periods=0)
        self.assertAlmostEqual(report.F_Q_realistic / 5.668e12, 1.0, delta=2e-3)
        self.assertAlmostEqual(report.F_Q_ideal / 1.509e13, 1.0, delta=2e-3)
        self.assertAlmostEqual(report.eta_g_realistic / 6.708e-9, 1.0, delta=2e-3)
        self.assertAlmostEqual(report.eta_g_ideal / 4.07e-9, 1.0, delta=3e-3)

    def test_ideal_column_is_self_consistent(self):
        """Ideal over realistic QFI is exactly the Gamma_2 envelope at t*."""
        report = evaluate_scenario(ScenarioSpec('scenario1', SCENARIO_ONE), periods=0)
        p = derive(SCENARIO_ONE)
        ratio = report.F_Q_ideal / report.F_Q_realistic
        self.assertAlmostEqual(ratio / math.exp(2.0 * p.Gamma_2 * report.t_star), 1.0, places=10)
        self.assertGreater(report.eta_g_ideal_with_readout, report.eta_g_ideal)

    def test_ideal_mode(self):
        """The ideal flag switches the headline figures, not the optimum."""
        spec = ScenarioSpec('scenario1', SCENARIO_ONE, ideal=True)
        report = evaluate_scenario(spec, periods=0)
        self.assertEqual(report.mode, 'ideal')
        self.assertEqual(report.n_star, 52)
        self.assertEqual(report.eta_g, report.eta_g_ideal)
        self.assertEqual(report.F_Q_at_t_star, report.F_Q_ideal)

    def test_reference_checks(self):
        """Published figures within 3% pass; the absolute resolution is flagged."""
        spec = ScenarioSpec('scenario1', SCENARIO_ONE, reference=PUBLISHED_ONE)
        report = evaluate_scenario(spec, periods=0)
        checks = {check.name: check for check in report.reference_checks}
        self.assertEqual(set(checks), set(PUBLISHED_ONE))
        for name in ('n_star', 't_star_s', 'eta_g', 'F_Q', 'F_Q_ideal'):
            self.assertFalse(checks[name].flagged, name)
        self.assertTrue(checks['resolution'].flagged)
        self.assertEqual(report.flagged_references, ['resolution'])

    def test_sensitivity_matches_fisher_information(self):
        """eta_g^2 F_eff equals the cycle time t* + T_over."""
        device = dataclasses.replace(SCENARIO_ONE, T_over=50e-6)
        report = evaluate_scenario(ScenarioSpec('padded', device), periods=0)
        self.assertAlmostEqual(report.eta_g ** 2 * report.F_eff / (report.t_star + 50e-6), 1.0, places=12)

    def test_thermal_model_series_respects_the_quantum_bound(self):
        """Under the thermal model every row keeps F_C_max <= F_Q."""
        spec = ScenarioSpec('thermal', SCENARIO_ONE, model=DephasingModel.THERMAL_WHICH_PATH)
        points = time_series(spec, derive(SCENARIO_ONE), 4, 8)
        for point in points:
            self.assertLessEqual(point.F_C_max, point.F_Q * (1.0 + 1e-9))
        revivals = [point for point in points if point.F_Q > 0]
        self.assertEqual(len(revivals), 4)
        for point in revivals:
            self.assertGreater(point.F_C_max, 0.0)

    def test_unknown_reference_key(self):
        """Reference figures must be known report fields."""
        spec = ScenarioSpec('scenario1', SCENARIO_ONE, reference={'Gamma_2': 1958.0})
        with self.assertRaises(DomainError):
            evaluate_scenario(spec, periods=0)

    def test_thermal_model_has_no_information_in_hot_resonator(self):
        """At 20 mK the thermal which-path factor kills every mid-cycle point but not the revivals."""
        spec = ScenarioSpec('thermal', SCENARIO_ONE, model=DephasingModel.THERMAL_WHICH_PATH)
        report = evaluate_scenario(spec, periods=0)
        self.assertGreater(report.F_Q_realistic, 0.0)


class TestTimeSeries(unittest.TestCase):
    """Time grids of the metrology figures."""

    def setUp(self):
        """Near-term scenario."""
        self.spec = ScenarioSpec('scenario1', SCENARIO_ONE)
        self.p = derive(SCENARIO_ONE)

    def test_grid_layout(self):
        """periods * points rows, strictly increasing, ending on a revival."""
        points = time_series(self.spec, self.p, 2, 8)
        self.assertEqual(len(points), 16)
        times = [point.t for point in points]
        self.assertEqual(times, sorted(times))
        self.assertAlmostEqual(points[-1].tau_over_pi, 4.0, places=12)
        self.assertEqual(points[-1].S_L, 0.0)

    def test_empty_grid(self):
        """Zero periods is an error."""
        with self.assertRaises(EmptyGridError):
            time_series(self.spec, self.p, 0, 40)

    def test_default_series_runs_to_t_star(self):
        """Without an explicit length the series covers n*/2 periods."""
        report = evaluate_scenario(self.spec, points_per_period=8)
        self.assertEqual(len(report.time_series), 26 * 8)
        self.assertAlmostEqual(report.time_series[-1].t / report.t_star, 1.0, places=12)

    def test_unreachable_point_has_infinite_sensitivity(self):
        """Where the QFI underflows the sensitivity is reported as infinite."""
        spec = ScenarioSpec('thermal', SCENARIO_ONE, model=DephasingModel.THERMAL_WHICH_PATH)
        points = time_series(spec, self.p, 1, 8)
        self.assertEqual(points[3].F_Q, 0.0)
        self.assertEqual(points[3].eta_g_if_stopped_here, math.inf)


class TestSweep(unittest.TestCase):
    """Single-axis parameter sweeps."""

    def setUp(self):
        """Near-term scenario."""
        self.spec = ScenarioSpec('scenario1', SCENARIO_ONE)

    def test_coupling_sweep_scales_as_k_squared(self):
        """The ideal peak QFI goes as k^2 while the optimum stays at n* = 52."""
        rows = sweep(self.spec, 'k', [0.1, 0.2, 0.3])
        self.assertEqual([row.n_star for row in rows], [52, 52, 52])
        base = rows[0].FQ_peak_ideal
        self.assertAlmostEqual(rows[1].FQ_peak_ideal / base, 4.0, places=9)
        self.assertAlmostEqual(rows[2].FQ_peak_ideal / base, 9.0, places=9)

    def test_temperature_sweep_degrades_sensitivity(self):
        """A hotter bath never improves the sensitivity."""
        rows = sweep(self.spec, 'T_bath', [0.02, 0.2, 2.0])
        etas = [row.eta_g_at_opt for row in rows]
        self.assertEqual(etas, sorted(etas))

    def test_half_period_visibility_falls_with_coupling(self):
        """Stronger coupling leaves less contrast at tau = pi."""
        rows = sweep(self.spec, 'k', [0.1, 0.2, 0.3])
        visibilities = [row.visibility_tau_pi for row in rows]
        for before, after in zip(visibilities, visibilities[1:]):
            self.assertLess(after, before)

    def test_cold_bath_barely_moves_gamma_2(self):
        """Between 10 and 40 mK the mechanical share changes Gamma_2 by under 0.1%."""
        rows = sweep(self.spec, 'T_bath', [0.010, 0.020, 0.040])
        omega_m = derive(SCENARIO_ONE).omega_m
        rates = []
        for row in rows:
            t_star = row.n_star * math.pi / omega_m
            rates.append(math.log(row.FQ_peak_ideal / row.FQ_peak_decohered) / (2.0 * t_star))
        self.assertLess((max(rates) - min(rates)) / rates[1], 1e-3)
        self.assertAlmostEqual(rates[1], derive(SCENARIO_ONE).Gamma_2, delta=1e-6 * rates[1])

    def test_threads_preserve_order(self):
        """Parallel rows come back in input order."""
        values = [0.15, 0.1, 0.25]
        rows = sweep(self.spec, 'k', values, jobs=3)
        self.assertEqual([row.value for row in rows], values)

    def test_unknown_axis(self):
        """Only the listed axes can be swept."""
        with self.assertRaises(DomainError):
            sweep(self.spec, 'Gamma_2', [1.0])

    def test_empty_values(self):
        """A sweep needs at least one value."""
        with self.assertRaises(DomainError):
            sweep(self.spec, 'k', [])

    def test_invalid_value_names_the_field(self):
        """A non-physical sweep value is rejected."""
        with self.assertRaises(DomainError) as context:
            sweep(self.spec, 'F_r', [0.3])
        self.assertEqual(context.exception.field, 'F_r')


class TestRunJobs(unittest.TestCase):
    """Thread-pool helper."""

    def test_order_is_kept(self):
        """Results follow the input order for any worker count."""
        items = list(range(10))
        for jobs in (1, 4):
            self.assertEqual(run_jobs(lambda x: x * x, items, jobs), [x * x for x in items])


if __name__ == '__main__':
    unittest.main()
