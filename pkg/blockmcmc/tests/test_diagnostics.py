import math

import numpy as np
from django.test import SimpleTestCase, tag

from blockmcmc.diagnostics import (
    effective_sample_size,
    efficiency_report,
    fit_ar,
    integrated_autocorrelation_time,
    max_ar_order,
)
from blockmcmc.example_models import compound_symmetric_mvn
from blockmcmc.exceptions import TooFewSamples
from blockmcmc.samplers import ChainMatrix, SamplerPlan, run_mcmc

from .oracles import ar1_chain, truncated_sum_tau


def chain_matrix(samples, seconds=1.0, names=None):
    samples = np.asarray(samples, dtype=float)
    return ChainMatrix(
        samples=samples,
        slot_names=names or [f'x{k}' for k in range(samples.shape[1])],
        sampling_seconds=seconds,
    )


class AutocorrelationTimeTests(SimpleTestCase):
    def test_independent_draws(self):
        x = np.random.default_rng(0).standard_normal(100_000)
        tau = integrated_autocorrelation_time(x, clamp=False)
        self.assertTrue(0.8 <= tau <= 1.25, tau)
        self.assertTrue(0.8 <= effective_sample_size(x) / x.size <= 1.0)
        self.assertGreaterEqual(integrated_autocorrelation_time(x), 1.0)

    def test_ar1(self):
        x = ar1_chain(0.9, 100_000, seed=1)
        tau = integrated_autocorrelation_time(x)
        self.assertLess(abs(tau - 19.0), 0.1 * 19.0)

    def test_constant_chain_never_mixes(self):
        self.assertEqual(integrated_autocorrelation_time(np.full(100, 3.0)), math.inf)
        self.assertEqual(effective_sample_size(np.full(100, 3.0)), 0.0)

    def test_scale_and_shift_invariance(self):
        x = ar1_chain(0.6, 2_000, seed=2)
        tau = integrated_autocorrelation_time(x)
        self.assertAlmostEqual(integrated_autocorrelation_time(5.0 * x + 7.0) / tau, 1.0, places=6)

    def test_too_few_samples(self):
        with self.assertRaises(TooFewSamples):
            integrated_autocorrelation_time(np.arange(9.0))

    def test_effective_sample_size(self):
        x = ar1_chain(0.5, 4_000, seed=3)
        self.assertAlmostEqual(effective_sample_size(x), 4_000 / integrated_autocorrelation_time(x))

    def test_order_limit(self):
        self.assertEqual(max_ar_order(10), 9)
        self.assertEqual(max_ar_order(10_000), 40)

    def test_ar_fit_recovers_coefficient(self):
        fit = fit_ar(ar1_chain(0.7, 20_000, seed=4))
        self.assertGreaterEqual(fit.order, 1)
        self.assertLess(abs(fit.coefficients[0] - 0.7), 0.05)
        self.assertLess(abs(fit.innovation_variance - 1.0), 0.05)


@tag('slow')
class OracleAgreementTests(SimpleTestCase):
    def test_matches_truncated_autocorrelation_sum(self):
        for phi, seed in ((0.5, 5), (0.8, 6), (0.95, 7)):
            x = ar1_chain(phi, 100_000, seed=seed)
            ours, reference = integrated_autocorrelation_time(x), truncated_sum_tau(x)
            self.assertLess(abs(ours - reference) / reference, 0.2, (phi, ours, reference))


class EfficiencyReportTests(SimpleTestCase):
    def test_independent_columns(self):
        samples = np.random.default_rng(8).standard_normal((5_000, 2))
        report = efficiency_report(chain_matrix(samples))
        self.assertTrue(0.7 <= report.algorithmic_efficiency <= 1.0)
        self.assertAlmostEqual(report.seconds_per_iteration, 1.0 / 5_000)
        self.assertAlmostEqual(report.efficiency, report.algorithmic_efficiency * 5_000)
        self.assertAlmostEqual(report.ess_per_10k, 10_000 * report.algorithmic_efficiency)
        self.assertAlmostEqual(report.runtime_per_10k, 2.0)

    def test_slowest_parameter_sets_algorithmic_efficiency(self):
        rng = np.random.default_rng(9)
        samples = np.column_stack([rng.standard_normal(5_000), ar1_chain(0.9, 5_000, seed=9)])
        report = efficiency_report(chain_matrix(samples, names=['fast', 'slow']))
        self.assertEqual(report.slowest, 'slow')
        self.assertAlmostEqual(report.algorithmic_efficiency, 1.0 / report.tau[1])
        self.assertAlmostEqual(report.ess[1], 5_000 / report.tau[1])

    def test_stuck_column(self):
        rng = np.random.default_rng(10)
        samples = np.column_stack([rng.standard_normal(500), np.zeros(500)])
        report = efficiency_report(chain_matrix(samples, names=['a', 'b']))
        self.assertEqual(report.algorithmic_efficiency, 0.0)
        self.assertEqual(report.efficiency, 0.0)
        self.assertEqual(report.stuck, ['b'])
        self.assertIsNone(report.to_dict()['parameters'][1]['tau'])

    def test_runtime_changes_only_overall_efficiency(self):
        samples = np.random.default_rng(11).standard_normal((1_000, 3))
        fast = efficiency_report(chain_matrix(samples, seconds=1.0))
        slow = efficiency_report(chain_matrix(samples, seconds=2.0))
        self.assertEqual(fast.algorithmic_efficiency, slow.algorithmic_efficiency)
        self.assertAlmostEqual(fast.efficiency, 2.0 * slow.efficiency)

    def test_zero_runtime(self):
        samples = np.random.default_rng(12).standard_normal((200, 1))
        self.assertEqual(efficiency_report(chain_matrix(samples, seconds=0.0)).efficiency, math.inf)

    def test_too_few_iterations(self):
        with self.assertRaises(TooFewSamples):
            efficiency_report(chain_matrix(np.zeros((5, 2))))

    def test_summary_without_parameters(self):
        samples = np.random.default_rng(13).standard_normal((200, 2))
        summary = efficiency_report(chain_matrix(samples)).to_dict(per_parameter=False)
        self.assertNotIn('parameters', summary)
        self.assertEqual(summary['iterations'], 200)


@tag('slow')
class AlgorithmicEfficiencyShapeTests(SimpleTestCase):
    def scalar_efficiency(self, d, rho):
        graph = compound_symmetric_mvn(d, rho)
        chain = run_mcmc(graph, SamplerPlan.all_scalar(d), 40_000, seed=d)
        return efficiency_report(chain).algorithmic_efficiency

    def test_correlation_slows_scalar_sampling(self):
        independent = {}
        for d in (2, 16):
            values = [self.scalar_efficiency(d, rho) for rho in (0.0, 0.5, 0.9)]
            self.assertGreater(values[0], values[1])
            self.assertGreater(values[1], values[2])
            independent[d] = values[0]
        self.assertLess(abs(independent[2] - independent[16]) / independent[2], 0.3)
